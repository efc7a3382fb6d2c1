"""Pure-numpy implementation of the ensemble local-search kernel.

Mirrors ``_kernel.pyx`` decision for decision. Each round of the schedule
consists of disjoint row pairs, so a whole round is proposed and accepted in
one vectorized step without changing the outcome relative to the sequential
compiled loop.
"""

from __future__ import annotations

import numpy as np

LINEAR = 0
VON_NEUMANN = 1

_TINY = 1e-300
_ZERO_EIG = 1e-12
# moves must gain more than this; round-off gains would keep the step from shrinking
MIN_GAIN = 1e-13


def _reduced_gram(rows: np.ndarray, da: int, db: int) -> np.ndarray:
    """Unnormalized reduced matrices on the smaller side, shape (n, k, k)."""
    t = rows.reshape(-1, da, db)
    if da <= db:
        return np.einsum("nab,ncb->nac", t, t.conj())
    return np.einsum("nab,nac->nbc", t, t.conj())


def contributions(rows: np.ndarray, da: int, db: int, code: int) -> np.ndarray:
    """``p_i * mu(psi_i / |psi_i|)`` for every row."""
    p = np.einsum("ij,ij->i", rows.real, rows.real) + np.einsum("ij,ij->i", rows.imag, rows.imag)
    g = _reduced_gram(rows, da, db)
    safe = np.where(p > _TINY, p, 1.0)
    if code == LINEAR:
        fro = np.einsum("nab,nab->n", g.real, g.real) + np.einsum("nab,nab->n", g.imag, g.imag)
        out = 2.0 * (p - fro / safe)
    elif code == VON_NEUMANN:
        w = np.linalg.eigvalsh(g) / safe[:, None]
        w = np.where(w > _ZERO_EIG, w, 1.0)
        out = -p * np.sum(w * np.log2(w), axis=1)
    else:
        raise ValueError(f"unknown measure code {code}")
    return np.where(p > _TINY, out, 0.0)


def _rotate(a: np.ndarray, b: np.ndarray, c: np.ndarray, s: np.ndarray, e: np.ndarray):
    c = c[:, None]
    s = s[:, None]
    e = e[:, None]
    return c * a - e.conj() * s * b, e * s * a + c * b


def run_sweeps(psi, da, db, code, sign, pairs, perms, u, phi, contrib, step, step_min, step_max,
               contrib_fn=None):
    """Run up to ``len(u)`` sweeps in place on ``psi``/``contrib``.

    Returns ``(step, sweeps_done, converged)``. ``contrib_fn(rows)`` overrides
    the built-in measure when given.
    """
    m = psi.shape[0]
    fn = contrib_fn if contrib_fn is not None else (lambda rows: contributions(rows, da, db, code))
    n_slots = perms.shape[1]
    per_round = n_slots // 2
    n_rounds = pairs.shape[0] // per_round
    n_real = m * (m - 1) // 2
    for s in range(u.shape[0]):
        perm = perms[s]
        accepted = 0
        for r in range(n_rounds):
            sl = slice(r * per_round, (r + 1) * per_round)
            ii = perm[pairs[sl, 0]]
            jj = perm[pairs[sl, 1]]
            live = (ii < m) & (jj < m)
            if not live.any():
                continue
            ii, jj = ii[live], jj[live]
            theta = step * (0.5 + u[s, sl][live])
            e = np.exp(1j * phi[s, sl][live])
            old = contrib[ii] + contrib[jj]
            a, b = psi[ii], psi[jj]
            todo = np.ones(ii.size, dtype=bool)
            for sgn in (1.0, -1.0):
                idx = np.flatnonzero(todo)
                if idx.size == 0:
                    break
                na, nb = _rotate(a[idx], b[idx], np.cos(theta[idx]), sgn * np.sin(theta[idx]), e[idx])
                ca, cb = fn(na), fn(nb)
                better = sign * (ca + cb) < sign * old[idx] - MIN_GAIN
                hit = idx[better]
                psi[ii[hit]] = na[better]
                psi[jj[hit]] = nb[better]
                contrib[ii[hit]] = ca[better]
                contrib[jj[hit]] = cb[better]
                todo[hit] = False
                accepted += int(better.sum())
        rate = accepted / n_real if n_real else 0.0
        if rate > 0.5:
            step = min(step * 1.5, step_max)
        elif rate < 0.1:
            step *= 0.5
        if step < step_min:
            return step, s + 1, True
    return step, u.shape[0], False


def _h(w: np.ndarray) -> float:
    w = np.where(w > _ZERO_EIG, w, 1.0)
    return float(-np.sum(w * np.log2(w)))


def half_cmi(phi: np.ndarray, da: int, db: int, de: int, dg: int) -> float:
    """``I(A;B|E) / 2`` of the pure state ``phi`` on ``(A B) x (E G)`` after tracing ``G``."""
    t = phi.reshape(da, db, de, dg)
    rho_ae = np.einsum("abeg,cbfg->aecf", t, t.conj()).reshape(da * de, -1)
    rho_be = np.einsum("abeg,acfg->becf", t, t.conj()).reshape(db * de, -1)
    rho_g = np.einsum("abeg,abeh->gh", t, t.conj())  # S(ABE) = S(G)
    rho_e = np.einsum("abeg,abfg->ef", t, t.conj())
    h = [_h(np.linalg.eigvalsh(m)) for m in (rho_ae, rho_be, rho_g, rho_e)]
    return 0.5 * (h[0] + h[1] - h[2] - h[3])


def ext_run_sweeps(phi, x, da, db, de, dg, chosen, u, phi_angle, value, step, step_min, step_max):
    """Numpy mirror of the compiled extension search; same return contract."""
    k = chosen.shape[1]
    for s in range(chosen.shape[0]):
        accepted = 0
        for q in range(k):
            i, j = chosen[s, q]
            theta = step * (0.5 + u[s, q])
            e = np.exp(1j * phi_angle[s, q])
            c = np.cos(theta)
            ci, cj = phi[:, i].copy(), phi[:, j].copy()
            for sg in (1.0, -1.0):
                sn = sg * np.sin(theta)
                phi[:, i] = c * ci - e.conjugate() * sn * cj
                phi[:, j] = e * sn * ci + c * cj
                val = half_cmi(phi, da, db, de, dg)
                if val < value - MIN_GAIN:
                    value = val
                    xi, xj = x[i].copy(), x[j].copy()
                    x[i] = c * xi - e.conjugate() * sn * xj
                    x[j] = e * sn * xi + c * xj
                    accepted += 1
                    break
            else:
                phi[:, i], phi[:, j] = ci, cj
        rate = accepted / k if k else 0.0
        if rate > 0.5:
            step = min(step * 1.5, step_max)
        elif rate < 0.1:
            step *= 0.5
        if step < step_min:
            return value, step, s + 1, True
    return value, step, chosen.shape[0], False
