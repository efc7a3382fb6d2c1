"""Tangle across a cut for pure states, and the closed-form two-qubit quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import binary_entropy, linear_entropy
from .qcore import (
    Bipartition,
    DensityOperator,
    PureState,
    State,
    StateError,
    as_density,
    clip_spectrum,
    partial_trace,
)

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(SIGMA_Y, SIGMA_Y)

LAMBDA_NEG_TOL = 1e-9


@dataclass(frozen=True)
class TangleValue:
    value: float
    cut: Bipartition

    def __float__(self) -> float:
        return self.value


def pure_tangle(psi: PureState, cut: Bipartition) -> TangleValue:
    """Linear entropy of the reduced state on ``cut.side_a``."""
    if not isinstance(psi, PureState):
        raise StateError("pure_tangle needs a PureState; use the convex roof for mixed states")
    cut.validate_for(psi.n)
    # the smaller side gives the same purity with a cheaper reduction
    side = cut.side_a
    da = math.prod(psi.dims[i] for i in cut.side_a)
    db = math.prod(psi.dims[i] for i in cut.side_b)
    if db < da:
        side = cut.side_b
    val = linear_entropy(partial_trace(psi, side))
    return TangleValue(max(val, 0.0), cut)


def _check_two_qubit(rho: State) -> DensityOperator:
    rho = as_density(rho)
    if tuple(rho.dims) != (2, 2):
        raise StateError(f"two-qubit quantity needs dims [2, 2], got {list(rho.dims)}")
    return rho


def spin_flip(rho: State) -> DensityOperator:
    rho = _check_two_qubit(rho)
    return DensityOperator([2, 2], _YY @ rho.matrix.conj() @ _YY)


def wootters_lambdas(rho: State) -> np.ndarray:
    """Eigenvalues of ``sqrt(sqrt(rho) rho~ sqrt(rho))``, descending.

    With ``rho = L L^+`` the squares of these are the eigenvalues of
    ``rho rho~ = L (M^+ M) L^-1`` where ``M = L^T (sy x sy) L``, so they are the
    singular values of ``M``. This avoids square roots of tiny eigenvalues,
    which would amplify 1e-16 noise to 1e-8 on rank-deficient states.
    """
    rho = _check_two_qubit(rho)
    w, v = rho.eigh()
    w = clip_spectrum(w)
    low = v * np.sqrt(w)
    sv = np.linalg.svd(low.T @ _YY.real @ low, compute_uv=False)
    return np.sort(sv)[::-1]


def wootters_lambdas_product_route(rho: State) -> np.ndarray:
    """Square roots of the eigenvalues of ``rho @ spin_flip(rho)``; kept as a cross-check."""
    rho = _check_two_qubit(rho)
    m = rho.matrix
    ev = np.linalg.eigvals(m @ (_YY @ m.conj() @ _YY)).real
    if ev.min() < -LAMBDA_NEG_TOL:
        raise StateError(f"rho rho~ has eigenvalue {ev.min():.3g}; input is not a valid state")
    return np.sort(np.sqrt(np.clip(ev, 0.0, None)))[::-1]


def wootters_lambdas_sqrt_route(rho: State) -> np.ndarray:
    """Same spectrum via two matrix square roots; kept as a cross-check."""
    from .qcore import psd_sqrt

    rho = _check_two_qubit(rho)
    s = psd_sqrt(rho.matrix)
    inner = s @ spin_flip(rho).matrix @ s
    inner = 0.5 * (inner + inner.conj().T)
    w = np.linalg.eigvalsh(psd_sqrt(inner))
    return np.sort(np.clip(w, 0.0, None))[::-1]


def concurrence(rho: State) -> float:
    lam = wootters_lambdas(rho)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def two_qubit_tangle(rho: State) -> TangleValue:
    return TangleValue(concurrence(rho) ** 2, Bipartition([0], [1]))


def eof_from_concurrence(c: float) -> float:
    c = min(max(float(c), 0.0), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c))))


def eof_two_qubit(rho: State) -> float:
    """Entanglement of formation in bits, ``h((1 + sqrt(1 - C^2)) / 2)``."""
    return eof_from_concurrence(concurrence(rho))
