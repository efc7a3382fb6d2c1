"""Spectral entropies of density operators.

Logarithms are base 2 throughout, so one Bell pair carries one unit of
entanglement. Tsallis entropies are polynomial in the spectrum and carry no
base; their ``q -> 1`` limit is therefore the natural-log von Neumann entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import State, StateError, as_density, clip_spectrum

ZERO_EIG = 1e-12
LN2 = math.log(2.0)


def _spectrum(rho: State) -> np.ndarray:
    return as_density(rho).spectrum()


def shannon_bits(p) -> float:
    """Base-2 Shannon entropy, treating entries below 1e-12 as exact zeros."""
    p = np.asarray(p, dtype=float)
    p = p[p > ZERO_EIG]
    h = float(-np.sum(p * np.log2(p)))
    return abs(h) if h == 0 else h


def binary_entropy(x: float) -> float:
    return shannon_bits([x, 1.0 - x])


def purity(rho: State) -> float:
    m = as_density(rho).matrix
    return float(np.vdot(m, m).real)


def linear_entropy(rho: State) -> float:
    """``2 (1 - tr rho^2)``."""
    return 2.0 * (1.0 - purity(rho))


def von_neumann(rho: State) -> float:
    return shannon_bits(_spectrum(rho))


def von_neumann_from_spectrum(w) -> float:
    return shannon_bits(clip_spectrum(w))


def _trace_power(w: np.ndarray, a: float) -> float:
    w = w[w > ZERO_EIG]
    return float(np.sum(w**a))


def renyi(rho: State, alpha: float) -> float:
    """Rényi entropy of order ``alpha`` in bits; ``alpha == 1`` gives von Neumann."""
    if alpha <= 0:
        raise StateError(f"Rényi order must be positive, got {alpha}")
    w = _spectrum(rho)
    if alpha == 1:
        return shannon_bits(w)
    return max(0.0, math.log2(_trace_power(w, alpha)) / (1.0 - alpha))


def tsallis(rho: State, q: float) -> float:
    """Tsallis-q entropy; at ``q == 1`` the natural-log von Neumann entropy."""
    if q <= 0:
        raise StateError(f"Tsallis index must be positive, got {q}")
    w = _spectrum(rho)
    if q == 1:
        return shannon_bits(w) * LN2
    return max(0.0, (1.0 - _trace_power(w, q)) / (q - 1.0))


@dataclass(frozen=True)
class EntropyKind:
    family: str
    parameter: float = 1.0

    FAMILIES = ("linear", "von_neumann", "renyi", "tsallis")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise StateError(f"unknown entropy family {self.family!r}")
        if self.parameter <= 0:
            raise StateError(f"entropy parameter must be positive, got {self.parameter}")

    @classmethod
    def parse(cls, text: str) -> "EntropyKind":
        """Parse ``linear``, ``vn``, ``renyi:2`` or ``tsallis:0.5``."""
        head, _, arg = text.partition(":")
        head = {"vn": "von_neumann", "von-neumann": "von_neumann"}.get(head, head)
        if head in ("renyi", "tsallis"):
            try:
                return cls(head, float(arg))
            except ValueError:
                raise StateError(f"{head} needs a numeric parameter, got {arg!r}") from None
        return cls(head)

    def __call__(self, rho: State) -> float:
        if self.family == "linear":
            return linear_entropy(rho)
        if self.family == "von_neumann":
            return von_neumann(rho)
        if self.family == "renyi":
            return renyi(rho, self.parameter)
        return tsallis(rho, self.parameter)

    def __str__(self) -> str:
        if self.family in ("renyi", "tsallis"):
            return f"{self.family}:{self.parameter:g}"
        return "vn" if self.family == "von_neumann" else self.family
