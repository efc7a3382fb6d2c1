"""Conditional mutual information and variational squashed-entanglement bounds.

Extensions of a bipartite ``rho_AB`` are generated from its minimal
purification ``|Psi>_ABR``: an isometry ``X: R -> E (x) G`` followed by a trace
over ``G`` yields a valid ``rho_ABE`` for every ``X``. Minimizing
``I(A;B|E) / 2`` over such ``X`` at fixed ``d_E`` therefore gives an upper bound
on the squashed entanglement, never an estimate from below.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .entropy import von_neumann
from .qcore import (
    DensityOperator,
    State,
    StateError,
    as_density,
    partial_trace,
    permute,
    random_isometry,
    tensor_product,
)
from . import kernels
from .roof import CHUNK, ENTROPY, STEP0, STEP_MAX, Ensemble, RoofConfig, eigensystem, roof_minimize, sweep_randomness

log = logging.getLogger(__name__)

SSA_TOL = 1e-9

DEFAULT_CFG = RoofConfig(restarts=2, max_iterations=300, tolerance=1e-6)


def _entropy_of(rho: DensityOperator, subset: Iterable[int]) -> float:
    subset = sorted(set(subset))
    if not subset:
        return 0.0
    if len(subset) == rho.n:
        return von_neumann(rho)
    return von_neumann(partial_trace(rho, subset))


def _cmi_sets(rho: DensityOperator, a, b, e) -> float:
    a, b, e = set(a), set(b), set(e)
    return (
        _entropy_of(rho, a | e)
        + _entropy_of(rho, b | e)
        - _entropy_of(rho, a | b | e)
        - _entropy_of(rho, e)
    )


def _check_partition(n: int, parts: Sequence[Iterable[int]], allow_empty_last: bool = True) -> list[set[int]]:
    sets = [set(int(i) for i in p) for p in parts]
    for k, s in enumerate(sets):
        if not s and not (allow_empty_last and k == len(sets) - 1):
            raise StateError("index sets must be non-empty")
    union = set().union(*sets)
    if sum(len(s) for s in sets) != len(union):
        raise StateError("index sets overlap")
    if union != set(range(n)):
        raise StateError(f"index sets do not cover subsystems 0..{n - 1}")
    return sets


def cmi(rho: State, parts) -> float:
    """``I(A;B|E) = S(AE) + S(BE) - S(ABE) - S(E)`` in bits.

    ``parts`` is ``(A, B, E)``, three index sets partitioning the subsystems
    (``E`` may be empty). Values in ``[-1e-9, 0)`` are clipped to zero; anything
    lower would contradict strong subadditivity and raises.
    """
    rho = as_density(rho)
    a, b, e = _check_partition(rho.n, parts)
    val = _cmi_sets(rho, a, b, e)
    if val < -SSA_TOL:
        raise StateError(f"conditional mutual information {val:.3g} < 0: strong subadditivity violated")
    return max(val, 0.0)


@dataclass(frozen=True)
class ChainRuleCheck:
    lhs: float
    rhs: float
    residue: float
    terms: tuple[float, float]

    def __iter__(self):
        yield self.lhs
        yield self.rhs
        yield self.residue


def chain_rule_check(rho: State, parts) -> ChainRuleCheck:
    """Compare ``I(A;BC|E)`` with ``I(A;B|E) + I(A;C|BE)``."""
    rho = as_density(rho)
    a, b, c, e = _check_partition(rho.n, parts)
    lhs = _cmi_sets(rho, a, b | c, e)
    t1 = _cmi_sets(rho, a, b, e)
    t2 = _cmi_sets(rho, a, c, b | e)
    return ChainRuleCheck(lhs, t1 + t2, abs(lhs - (t1 + t2)), (t1, t2))


# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtensionCandidate:
    """``state`` on dims ``base.dims + [d_E]`` whose AB marginal is ``base``."""

    state: DensityOperator
    base: DensityOperator

    def __post_init__(self):
        if tuple(self.state.dims[:-1]) != tuple(self.base.dims):
            raise StateError("extension dims must be the base dims plus one environment")
        red = partial_trace(self.state, range(self.base.n))
        dev = float(np.max(np.abs(red.matrix - self.base.matrix)))
        if dev > 1e-8:
            raise StateError(f"extension marginal deviates from base by {dev:.3g}")

    @property
    def d_e(self) -> int:
        return self.state.dims[-1]

    def cmi(self) -> float:
        n = self.base.n
        return cmi(self.state, (range(n - 1), [n - 1], [n]))


@dataclass(frozen=True)
class SquashedBound:
    value: float
    extension_dim: int
    converged: bool
    extension: Optional[ExtensionCandidate] = field(default=None, repr=False, compare=False)
    exact: bool = False

    @property
    def direction(self) -> str:
        return "exact" if self.exact else "upper"


class _Extender:
    """Evaluates ``I(A;B|E)/2`` for isometries ``X: R -> E (x) G``."""

    def __init__(self, rho: DensityOperator, d_e: int, d_g: int):
        self.rho = rho
        self.da, self.db = rho.dims
        lam, vec = eigensystem(rho)
        self.lam, self.vec = lam, vec
        self.r = lam.size
        self.weighted = vec * np.sqrt(lam)  # d x r
        self.d_e, self.d_g = d_e, d_g

    def joint(self, x: np.ndarray) -> np.ndarray:
        phi = self.weighted @ x.T  # (dA dB) x (dE dG)
        return phi.reshape(self.da, self.db, self.d_e, self.d_g)

    def phi(self, x: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(self.weighted @ x.T)

    def half_cmi(self, x: np.ndarray) -> float:
        return float(kernels.get().half_cmi(self.phi(x), self.da, self.db, self.d_e, self.d_g))

    def refine(self, x0: np.ndarray, rng: np.random.Generator, cfg: RoofConfig,
               max_pairs: Optional[int] = None) -> tuple[float, np.ndarray, bool]:
        """Givens-rotation descent on the rows of ``x0`` (same step rule as the roof search)."""
        kern = kernels.get()
        x = np.array(x0, dtype=complex, order="C")
        phi = self.phi(x)
        value = float(kern.half_cmi(phi, self.da, self.db, self.d_e, self.d_g))
        m = x.shape[0]
        all_pairs = np.array([(i, j) for i in range(m) for j in range(i + 1, m)], dtype=np.int64)
        if len(all_pairs) == 0:
            return value, x, True
        k = len(all_pairs) if max_pairs is None else min(max_pairs, len(all_pairs))
        step, done, converged = STEP0, 0, False
        while not converged and done < cfg.max_iterations:
            n = min(CHUNK, cfg.max_iterations - done)
            chosen = np.ascontiguousarray(
                np.stack([all_pairs[rng.permutation(len(all_pairs))[:k]] for _ in range(n)])
            )
            u, ang = sweep_randomness(rng, n, k)
            value, step, used, converged = kern.ext_run_sweeps(
                phi, x, self.da, self.db, self.d_e, self.d_g, chosen, u, ang, value,
                step, cfg.tolerance, STEP_MAX,
            )
            done += used
        # drop accumulated rounding before reporting
        return self.half_cmi(x), x, bool(converged)

    def extension(self, x: np.ndarray) -> ExtensionCandidate:
        t = self.joint(x).reshape(self.da * self.db * self.d_e, self.d_g)
        m = t @ t.conj().T
        m = 0.5 * (m + m.conj().T)
        st = DensityOperator([self.da, self.db, self.d_e], m, min_dim=1, validate=False)
        return ExtensionCandidate(st, self.rho)

    def flag_isometry(self, e: Ensemble) -> Optional[np.ndarray]:
        """Isometry realizing ``sum_i p_i |psi_i><psi_i| (x) |i><i|_E``."""
        m = len(e)
        if m > self.d_e or m > self.d_g:
            return None
        x = np.zeros((self.d_e * self.d_g, self.r), dtype=complex)
        for i, (p, s) in enumerate(e):
            coeff = (self.vec.conj().T @ s.amplitudes) * math.sqrt(p) / np.sqrt(self.lam)
            x[i * self.d_g + i] = coeff
        dev = np.max(np.abs(x.conj().T @ x - np.eye(self.r)))
        if dev > 1e-8:
            return None
        return x


def _embed(x: np.ndarray, old: tuple[int, int], new: tuple[int, int]) -> np.ndarray:
    """Pad an isometry on ``E (x) G`` to larger ``(d_E, d_G)`` without changing the extension."""
    (de0, dg0), (de1, dg1) = old, new
    out = np.zeros((de1, dg1, x.shape[1]), dtype=complex)
    out[:de0, :dg0] = x.reshape(de0, dg0, -1)
    return out.reshape(de1 * dg1, -1)


def _pure_bound(rho: DensityOperator) -> SquashedBound:
    val = von_neumann(partial_trace(rho, [0]))
    d = rho.dim
    ext = DensityOperator(list(rho.dims) + [1], rho.matrix.reshape(d, d), min_dim=1, validate=False)
    return SquashedBound(val, 1, True, ExtensionCandidate(ext, rho), exact=True)


def squashed_upper_bound(rho: State, d_e: int = 4, cfg: Optional[RoofConfig] = None,
                         seed_ensembles: Sequence[Ensemble] = (),
                         seed_extensions: Sequence[DensityOperator] = ()) -> SquashedBound:
    """Upper bound on the squashed entanglement (bits) of a bipartite state.

    The search runs on a ladder ``d = 1 .. d_e``. Level ``d`` refines the best
    extension of level ``d - 1`` (padded), a classical-flag extension built from
    an entanglement-of-formation witness when it fits, any ``seed_ensembles``,
    and ``cfg.restarts`` random isometries. The bound is therefore
    non-increasing in ``d_e``. ``seed_extensions`` are complete extensions
    evaluated as given and kept if they beat the search.
    """
    rho = as_density(rho)
    if rho.n != 2:
        raise StateError(f"squashed_upper_bound needs a bipartite state, got {rho.n} subsystems")
    if d_e < 1:
        raise StateError("d_E must be >= 1")
    cfg = cfg or DEFAULT_CFG
    if rho.rank() == 1:
        return _pure_bound(rho)

    r = rho.rank()
    dims_at = lambda d: (d, max(d, r))
    best_x, best_val, best_conv = None, math.inf, True
    best_dims = dims_at(1)
    flag_cache: dict[int, Optional[Ensemble]] = {}

    for d in range(1, d_e + 1):
        de, dg = dims_at(d)
        ext = _Extender(rho, de, dg)
        starts = []
        if best_x is not None:
            starts.append(_embed(best_x, best_dims, (de, dg)))
        if d == 1:
            starts.append(np.eye(dg, r, dtype=complex))
        else:
            if d >= r and d not in flag_cache:
                flag_cache[d] = roof_minimize(
                    rho, ENTROPY, None, RoofConfig(cardinality=d, restarts=4, seed=cfg.seed)
                ).ensemble
            for e in ([flag_cache.get(d)] if flag_cache.get(d) is not None else []) + list(seed_ensembles):
                x = ext.flag_isometry(e)
                if x is not None:
                    starts.append(x)
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, d]))
            starts += [random_isometry(de * dg, r, rng) for _ in range(cfg.restarts)]
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, d, 1]))
        level_best = None
        for x0 in starts:
            if d == 1:
                val, x, conv = ext.half_cmi(x0), x0, True
            else:
                val, x, conv = ext.refine(x0, rng, cfg, max_pairs=4 * de * dg)
            if level_best is None or val < level_best[0]:
                level_best = (val, x, conv)
        val, x, conv = level_best
        if val <= best_val or best_x is None:
            best_val, best_x, best_conv = val, x, conv
        else:
            best_x = _embed(best_x, best_dims, (de, dg))
        best_dims = (de, dg)

    ext = _Extender(rho, *best_dims)
    candidate = ext.extension(best_x)
    bound = SquashedBound(max(best_val, 0.0), best_dims[0], best_conv, candidate)
    for s in seed_extensions:
        cand = ExtensionCandidate(as_density(s), rho)
        v = 0.5 * cand.cmi()
        if v < bound.value:
            bound = SquashedBound(v, cand.d_e, True, cand)
    return bound


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class SquashedMonogamyDiagnostic:
    lhs: SquashedBound
    pair_ab: SquashedBound
    pair_ac: SquashedBound
    chain: Optional[ChainRuleCheck]

    @property
    def residual(self) -> float:
        return self.lhs.value - self.pair_ab.value - self.pair_ac.value

    @property
    def consistent(self) -> bool:
        """Whether the bounds are compatible with ``E(A|BC) >= E(AB) + E(AC)``.

        All three values are upper bounds, so this is a diagnostic only.
        """
        return self.residual >= -1e-4

    def to_dict(self) -> dict:
        return {
            "lhs": {"value": self.lhs.value, "direction": self.lhs.direction, "d_E": self.lhs.extension_dim},
            "rhs": [
                {"pair": "AB", "value": self.pair_ab.value, "direction": self.pair_ab.direction},
                {"pair": "AC", "value": self.pair_ac.value, "direction": self.pair_ac.direction},
            ],
            "residual": self.residual,
            "consistent": self.consistent,
            "chain_rule": None if self.chain is None else {
                "I(A;BC|E)": self.chain.lhs,
                "I(A;B|E)": self.chain.terms[0],
                "I(A;C|BE)": self.chain.terms[1],
                "residue": self.chain.residue,
                "direction": "exact",
            },
        }


def _as_bipartite(rho: DensityOperator, side_a: Sequence[int], side_b: Sequence[int]) -> DensityOperator:
    order = list(side_a) + list(side_b)
    p = permute(rho, order) if order != list(range(rho.n)) else rho
    da = math.prod(rho.dims[i] for i in side_a)
    db = math.prod(rho.dims[i] for i in side_b)
    return DensityOperator([da, db], p.matrix, min_dim=1, validate=False)


def squashed_monogamy_diag(rho: State, d_e: int = 4, cfg: Optional[RoofConfig] = None) -> SquashedMonogamyDiagnostic:
    rho = as_density(rho)
    if rho.n != 3:
        raise StateError(f"squashed_monogamy_diag needs three subsystems, got {rho.n}")
    lhs = squashed_upper_bound(_as_bipartite(rho, [0], [1, 2]), d_e, cfg)
    ab = squashed_upper_bound(partial_trace(rho, [0, 1]), d_e, cfg)
    ac = squashed_upper_bound(partial_trace(rho, [0, 2]), d_e, cfg)
    chain = None
    if lhs.extension is not None:
        da, db, dc = rho.dims
        st = lhs.extension.state
        full = DensityOperator([da, db, dc, st.dims[-1]], st.matrix, min_dim=1, validate=False)
        chain = chain_rule_check(full, ([0], [1], [2], [3]))
    return SquashedMonogamyDiagnostic(lhs, ab, ac, chain)


@dataclass(frozen=True)
class SuperadditivityDiagnostic:
    joint: SquashedBound
    pair_1: SquashedBound
    pair_2: SquashedBound
    product: SquashedBound

    @property
    def superadditivity_gap(self) -> float:
        return self.joint.value - self.pair_1.value - self.pair_2.value

    @property
    def subadditive_on_product(self) -> bool:
        return self.product.value <= self.pair_1.value + self.pair_2.value + 1e-6

    def to_dict(self) -> dict:
        f = lambda b: {"value": b.value, "direction": b.direction, "d_E": b.extension_dim}
        return {
            "joint": f(self.joint),
            "pair_A1B1": f(self.pair_1),
            "pair_A2B2": f(self.pair_2),
            "product_of_pairs": f(self.product),
            "superadditivity_gap": self.superadditivity_gap,
            "subadditive_on_product": self.subadditive_on_product,
        }


def superadditivity_diag(rho: State, cfg: Optional[RoofConfig] = None, d_e: int = 4) -> SuperadditivityDiagnostic:
    """Subsystems are ordered ``(A1, A2, B1, B2)``."""
    rho = as_density(rho)
    if rho.n != 4:
        raise StateError(f"superadditivity_diag needs four subsystems, got {rho.n}")
    joint = squashed_upper_bound(_as_bipartite(rho, [0, 1], [2, 3]), d_e, cfg)
    r1 = partial_trace(rho, [0, 2])
    r2 = partial_trace(rho, [1, 3])
    b1 = squashed_upper_bound(r1, d_e, cfg)
    b2 = squashed_upper_bound(r2, d_e, cfg)
    # rho_A1B1 (x) rho_A2B2 regrouped as A1A2 | B1B2
    prod = _as_bipartite(tensor_product(r1, r2), [0, 2], [1, 3])
    seeds = []
    if b1.extension is not None and b2.extension is not None:
        e1, e2 = b1.extension.state, b2.extension.state
        big = tensor_product(e1, e2)  # A1 B1 E1 A2 B2 E2
        big = permute(big, [0, 3, 1, 4, 2, 5])
        da = r1.dims[0] * r2.dims[0]
        db = r1.dims[1] * r2.dims[1]
        seeds.append(DensityOperator([da, db, e1.dims[-1] * e2.dims[-1]], big.matrix, min_dim=1, validate=False))
    product = squashed_upper_bound(prod, d_e, cfg, seed_extensions=seeds)
    return SuperadditivityDiagnostic(joint, b1, b2, product)
