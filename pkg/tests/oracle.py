"""Independent reference computations used to freeze derived test values.

Nothing here imports the package. Run ``python3 tests/oracle.py`` to
reprint the constants stored in ``frozen.py``.
"""

from __future__ import annotations

import numpy as np
import mpmath as mp
from scipy.linalg import expm
from scipy.optimize import minimize


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return v


def w(n: int) -> np.ndarray:
    return sum(ket("".join("1" if i == k else "0" for i in range(n))) for k in range(n)) / np.sqrt(n)


def ghz(n: int) -> np.ndarray:
    return (ket("0" * n) + ket("1" * n)) / np.sqrt(2)


def reduce(psi: np.ndarray, n: int, keep: list[int]) -> np.ndarray:
    t = psi.reshape([2] * n)
    letters = "abcdefghij"[:n]
    out = [letters[i] for i in keep]
    bra = "".join(c.upper() if i in keep else c for i, c in enumerate(letters))
    expr = f"{letters},{bra}->{''.join(out)}{''.join(c.upper() for c in out)}"
    r = np.einsum(expr, t, t.conj())
    d = 2 ** len(keep)
    return r.reshape(d, d)


def linear_entropy(r: np.ndarray) -> float:
    return float(2 * (1 - np.trace(r @ r).real))


def wootters_tangle(r: np.ndarray) -> float:
    yy = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]])
    s = np.linalg.eigvals(r @ yy @ r.conj() @ yy)
    lam = np.sort(np.sqrt(np.abs(s.real)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3]) ** 2


def _unitary(x: np.ndarray, m: int) -> np.ndarray:
    h = np.zeros((m, m), dtype=complex)
    iu = np.triu_indices(m, 1)
    k = len(iu[0])
    h[iu] = x[:k] + 1j * x[k:2 * k]
    h = h + h.conj().T + np.diag(x[2 * k:])
    return expm(1j * h)


def roof_scipy(r: np.ndarray, measure, m: int, maximize: bool, starts: int = 20, seed: int = 1) -> float:
    """Optimize the average measure over m-member decompositions with BFGS on a unitary generator."""
    w_, v = np.linalg.eigh(r)
    keep = w_ > 1e-12
    base = v[:, keep] * np.sqrt(w_[keep])  # d x k
    k = base.shape[1]
    sgn = -1.0 if maximize else 1.0

    def f(x):
        u = _unitary(x, m)[:, :k]
        rows = u @ base.T
        tot = 0.0
        for row in rows:
            p = np.vdot(row, row).real
            if p > 1e-14:
                phi = row / np.sqrt(p)
                tot += p * measure(phi)
        return sgn * tot

    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(starts):
        res = minimize(f, rng.normal(size=m * m), method="BFGS", options={"gtol": 1e-10})
        best = min(best, res.fun)
    return sgn * best


def tangle_2q(phi):
    a = phi.reshape(2, 2)
    ra = a @ a.conj().T
    return linear_entropy(ra)


def vn_2q(phi):
    a = phi.reshape(2, 2)
    ev = np.linalg.eigvalsh(a @ a.conj().T)
    ev = ev[ev > 1e-14]
    return float(-np.sum(ev * np.log2(ev)))


def derive() -> dict:
    mp.mp.dps = 30
    h13 = -(mp.mpf(1) / 3) * mp.log(mp.mpf(1) / 3, 2) - (mp.mpf(2) / 3) * mp.log(mp.mpf(2) / 3, 2)
    w3, w4, g3 = w(3), w(4), ghz(3)
    r_w3 = reduce(w3, 3, [0, 1])
    r_g3 = reduce(g3, 3, [0, 1])
    out = {
        "h_one_third": float(h13),
        "w4_lhs": linear_entropy(reduce(w4, 4, [0])),
        "w4_pair": wootters_tangle(reduce(w4, 4, [0, 1])),
        "w3_pair": wootters_tangle(r_w3),
        "w3_tau_a": roof_scipy(r_w3, tangle_2q, 4, True),
        "w3_e_a": roof_scipy(r_w3, vn_2q, 4, True),
        "w3_eof": roof_scipy(r_w3, vn_2q, 4, False),
        "ghz3_tau_a": roof_scipy(r_g3, tangle_2q, 4, True),
        "ghz3_e_a": roof_scipy(r_g3, vn_2q, 4, True),
        "sep_pair_tau_a": roof_scipy(np.diag([0, 0.5, 0.5, 0]).astype(complex), tangle_2q, 4, True),
        "mixed_tau_a": roof_scipy(np.eye(4, dtype=complex) / 4, tangle_2q, 4, True),
    }
    return out


if __name__ == "__main__":
    for k, v in derive().items():
        print(f"{k.upper()} = {v!r}")
