"""Named states: Bell pairs, GHZ, W and W-class, computational basis."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .qcore import PureState, StateError

_S = 1 / math.sqrt(2)

BELL_LABELS = ("psi+", "psi-", "phi+", "phi-")

_BELL = {
    # (|00>, |01>, |10>, |11>) amplitudes
    "phi+": (_S, 0, 0, _S),
    "phi-": (_S, 0, 0, -_S),
    "psi+": (0, _S, _S, 0),
    "psi-": (0, _S, -_S, 0),
}

_ALIASES = {
    "Φ⁺": "phi+", "Φ⁻": "phi-", "Ψ⁺": "psi+", "Ψ⁻": "psi-",
    "phi_plus": "phi+", "phi_minus": "phi-", "psi_plus": "psi+", "psi_minus": "psi-",
}


def bell(kind: str) -> PureState:
    """One of the four Bell states, e.g. ``bell("psi-")`` for the singlet."""
    key = _ALIASES.get(kind, str(kind).lower())
    if key not in _BELL:
        raise StateError(f"unknown Bell label {kind!r}; expected one of {BELL_LABELS}")
    return PureState([2, 2], np.array(_BELL[key], dtype=complex))


def ghz(n: int) -> PureState:
    if n < 2:
        raise StateError(f"GHZ state needs n >= 2 parties, got {n}")
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = _S
    return PureState([2] * n, v)


def w_state(n: int) -> PureState:
    """Equal superposition of the ``n`` weight-one basis states."""
    if n < 2:
        raise StateError(f"W state needs n >= 2 parties, got {n}")
    v = np.zeros(2**n, dtype=complex)
    for k in range(n):
        v[1 << k] = 1 / math.sqrt(n)
    return PureState([2] * n, v)


def w_class(a: complex, b: complex, c: complex, *, normalize: bool = False) -> PureState:
    """``a|100> + b|010> + c|001>``.

    Unless ``normalize`` is set, ``|a|^2 + |b|^2 + |c|^2`` must equal one
    within 1e-9 (the vector is then renormalized to machine precision).
    """
    coeffs = np.array([a, b, c], dtype=complex)
    norm2 = float(np.sum(np.abs(coeffs) ** 2))
    if norm2 == 0:
        raise StateError("W-class amplitudes are all zero")
    if not normalize and abs(norm2 - 1.0) > 1e-9:
        raise StateError(f"|a|^2+|b|^2+|c|^2 = {norm2!r}; pass normalize=True to rescale")
    v = np.zeros(8, dtype=complex)
    v[0b100], v[0b010], v[0b001] = coeffs
    return PureState.normalized([2, 2, 2], v)


def basis_state(dims: Sequence[int], digits: Sequence[int]) -> PureState:
    dims = [int(d) for d in dims]
    digits = [int(x) for x in digits]
    if len(dims) != len(digits):
        raise StateError(f"{len(digits)} digits given for {len(dims)} subsystems")
    for x, d in zip(digits, dims):
        if not 0 <= x < d:
            raise StateError(f"digit {x} out of range for dimension {d}")
    v = np.zeros(math.prod(dims), dtype=complex)
    v[np.ravel_multi_index(digits, dims)] = 1.0
    return PureState(dims, v)


def antisymmetric_state(d: int = 3) -> PureState:
    """Totally antisymmetric state of ``d`` qudits of dimension ``d``."""
    from itertools import permutations

    v = np.zeros(d**d, dtype=complex)
    for perm in permutations(range(d)):
        inversions = sum(1 for i in range(d) for j in range(i + 1, d) if perm[i] > perm[j])
        v[np.ravel_multi_index(perm, [d] * d)] = (-1) ** inversions
    return PureState.normalized([d] * d, v)


def parse_state_name(name: str, *, n: int | None = None, dims: Sequence[int] | None = None) -> PureState:
    """Build a state from the CLI naming scheme.

    ``ghz`` / ``w`` (with ``n``), ``bell:psi-``, ``wclass:a,b,c`` (complex
    literals accepted), ``basis:0,1,0`` (with ``dims``, default all qubits) and
    ``antisym`` (three qutrits).
    """
    head, _, arg = name.partition(":")
    head = head.lower()
    if head == "ghz":
        return ghz(3 if n is None else n)
    if head == "w":
        return w_state(3 if n is None else n)
    if head == "bell":
        return bell(arg)
    if head == "wclass":
        try:
            a, b, c = (complex(t.strip().replace(" ", "")) for t in arg.split(","))
        except ValueError:
            raise StateError(f"wclass needs three comma-separated amplitudes, got {arg!r}") from None
        return w_class(a, b, c, normalize=True)
    if head == "basis":
        digits = [int(t) for t in arg.replace(",", " ").split()] if "," in arg else [int(t) for t in arg]
        return basis_state(dims if dims is not None else [2] * len(digits), digits)
    if head == "antisym":
        return antisymmetric_state(3)
    raise StateError(f"unknown state name {name!r}")
