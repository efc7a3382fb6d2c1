"""Convex-roof minimization and maximization over pure-state decompositions.

Every cardinality-``m`` decomposition of a rank-``r`` state is obtained by
mixing the scaled eigenvectors with an ``m x r`` isometry. The search starts
from random isometries and refines them with Givens rotations between pairs
of ensemble members; a rotation only touches two members, so each proposal
costs two pure-state evaluations. The inner loop lives in ``kernels``.

Values reported by the minimizer are upper bounds on the true roof (and lower
bounds for the maximizer): the returned witness ensemble always reproduces
them.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from . import kernels
from .entropy import linear_entropy, von_neumann
from .qcore import (
    RANK_CUTOFF,
    Bipartition,
    DensityOperator,
    PureState,
    State,
    StateError,
    as_density,
    group,
    partial_trace,
    permute,
    random_isometry,
)

log = logging.getLogger(__name__)

ISOMETRY_TOL = 1e-9


@dataclass(frozen=True)
class PureMeasure:
    """A real function of a pure state across a cut, vanishing on product states.

    ``code`` selects a compiled implementation (see ``kernels``); measures
    without one run through the numpy path using ``fn``.
    """

    name: str
    fn: Callable[[PureState, Bipartition], float]
    code: Optional[int] = None

    def __call__(self, psi: PureState, cut: Bipartition) -> float:
        return float(self.fn(psi, cut))


def _reduced_side(psi: PureState, cut: Bipartition) -> DensityOperator:
    cut.validate_for(psi.n)
    return partial_trace(psi, cut.side_a)


TANGLE = PureMeasure("tangle", lambda psi, cut: linear_entropy(_reduced_side(psi, cut)), kernels.LINEAR)
ENTROPY = PureMeasure("entropy", lambda psi, cut: von_neumann(_reduced_side(psi, cut)), kernels.VON_NEUMANN)

MEASURES = {"tangle": TANGLE, "entropy": ENTROPY, "vn": ENTROPY}


def entropy_measure(kind) -> PureMeasure:
    """Pure-state measure ``S(rho_A)`` for an ``EntropyKind``."""
    if kind.family == "linear":
        return TANGLE
    if kind.family == "von_neumann":
        return ENTROPY
    return PureMeasure(str(kind), lambda psi, cut: kind(_reduced_side(psi, cut)))


@dataclass(frozen=True)
class Ensemble:
    """Probability-weighted pure states sharing the same dims."""

    members: tuple[tuple[float, PureState], ...]

    def __init__(self, members):
        members = tuple((float(p), s) for p, s in members)
        if not members:
            raise StateError("an ensemble needs at least one member")
        dims = members[0][1].dims
        for p, s in members:
            if not 0.0 < p <= 1.0 + 1e-12:
                raise StateError(f"member probability {p!r} outside (0, 1]")
            if s.dims != dims:
                raise StateError("ensemble members must share dims")
        total = sum(p for p, _ in members)
        if abs(total - 1.0) > 1e-9:
            raise StateError(f"ensemble probabilities sum to {total!r}")
        object.__setattr__(self, "members", members)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.members[0][1].dims

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def density(self) -> DensityOperator:
        d = math.prod(self.dims)
        m = np.zeros((d, d), dtype=complex)
        for p, s in self.members:
            m += p * np.outer(s.amplitudes, s.amplitudes.conj())
        return DensityOperator(self.dims, m, min_dim=1, validate=False)

    def residue(self, rho: State) -> float:
        """Max elementwise deviation between the ensemble average and ``rho``."""
        return float(np.max(np.abs(self.density().matrix - as_density(rho).matrix)))

    def to_dict(self) -> dict:
        from .qcore import state_to_dict

        return {
            "dims": list(self.dims),
            "members": [dict(state_to_dict(s), probability=p) for p, s in self.members],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Ensemble":
        from .qcore import state_from_dict

        return cls([(m["probability"], state_from_dict(m)) for m in obj["members"]])


@dataclass(frozen=True)
class RoofConfig:
    """Search controls. ``cardinality=None`` picks ``min(rank**2, 8)`` (at least the rank)."""

    cardinality: Optional[int] = None
    restarts: int = 16
    max_iterations: int = 2000
    tolerance: float = 1e-6
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.restarts < 1:
            raise StateError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise StateError("tolerance must be positive")
        if self.max_iterations < 1:
            raise StateError("max_iterations must be >= 1")
        if self.cardinality is not None and self.cardinality < 1:
            raise StateError("cardinality must be >= 1")

    def cardinality_for(self, rank: int) -> int:
        m = self.cardinality if self.cardinality is not None else max(rank, min(rank * rank, 8))
        if m < rank:
            raise StateError(f"cardinality {m} is below the state rank {rank}")
        return m

    def refined(self) -> "RoofConfig":
        """The stricter configuration used to confirm borderline results."""
        return RoofConfig(
            cardinality=None if self.cardinality is None else 2 * self.cardinality,
            restarts=4 * self.restarts,
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            seed=self.seed + 1,
            workers=self.workers,
        )


@dataclass(frozen=True)
class RoofResult:
    value: float
    ensemble: Ensemble
    converged: bool
    bound: str  # "upper" for minimization, "lower" for maximization, "exact" for pure input
    restarts_converged: int = 0
    restart_values: tuple[float, ...] = field(default=(), repr=False)

    def __iter__(self) -> Iterator:
        yield self.value
        yield self.ensemble


# --------------------------------------------------------------------------


def eigensystem(rho: State, cutoff: float = RANK_CUTOFF) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero eigenvalues (descending) and eigenvectors as columns.

    Ties keep the ascending basis order returned by the solver, so diagonal
    states decompose into computational basis vectors in index order.
    """
    w, v = as_density(rho).eigh()
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    keep = w > cutoff
    return w[keep], v[:, keep]


def _rows_to_ensemble(rows: np.ndarray, dims: Sequence[int]) -> Ensemble:
    p = np.sum(np.abs(rows) ** 2, axis=1)
    total = p.sum()
    members = []
    for pi, row in zip(p, rows):
        if pi / total > 1e-15:
            members.append((pi / total, PureState.normalized(dims, row, min_dim=1)))
    # absorb rounding so probabilities sum to one exactly enough
    s = sum(q for q, _ in members)
    return Ensemble([(q / s, st) for q, st in members])


def ensemble_from_isometry(rho: State, mix) -> Ensemble:
    """Decomposition ``psi_i = sum_j mix[i, j] sqrt(l_j) |v_j>`` of ``rho``."""
    lam, vec = eigensystem(rho)
    mix = np.asarray(mix, dtype=complex)
    r = lam.size
    if mix.ndim != 2 or mix.shape[1] != r:
        raise StateError(f"mixing matrix needs {r} columns (the rank), got shape {mix.shape}")
    if mix.shape[0] < r:
        raise StateError(f"mixing matrix has {mix.shape[0]} rows, fewer than the rank {r}")
    dev = np.max(np.abs(mix.conj().T @ mix - np.eye(r)))
    if dev > ISOMETRY_TOL:
        raise StateError(f"mixing matrix columns are not orthonormal (deviation {dev:.3g})")
    rows = mix @ (vec * np.sqrt(lam)).T
    return _rows_to_ensemble(rows, as_density(rho).dims)


def average_measure(e: Ensemble, mu: PureMeasure, cut: Bipartition) -> float:
    return float(sum(p * mu(s, cut) for p, s in e))


# --------------------------------------------------------------------------


def round_robin_pairs(m: int) -> np.ndarray:
    """Circle-method schedule on ``m`` (rounded up to even) slots.

    Rows ``[r*M/2, (r+1)*M/2)`` of the result form round ``r``; pairs within a
    round are disjoint.
    """
    n = m + (m % 2)
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    slots = list(range(n))
    out = []
    for _ in range(n - 1):
        for k in range(n // 2):
            out.append((slots[k], slots[n - 1 - k]))
        slots = [slots[0], slots[-1]] + slots[1:-1]
    return np.asarray(out, dtype=np.int64)


CHUNK = 64
STEP0 = 0.3
STEP_MAX = math.pi / 4


@dataclass
class _Problem:
    weighted: np.ndarray  # r x d, rows sqrt(l_j) v_j in grouped order
    da: int
    db: int
    m: int
    code: Optional[int]
    contrib_fn: Optional[Callable[[np.ndarray], np.ndarray]]
    sign: float


def _generic_contrib(mu: PureMeasure, da: int, db: int) -> Callable[[np.ndarray], np.ndarray]:
    cut = Bipartition([0], [1])

    def fn(rows: np.ndarray) -> np.ndarray:
        out = np.zeros(rows.shape[0])
        for k, row in enumerate(rows):
            p = float(np.vdot(row, row).real)
            if p > 1e-300:
                out[k] = p * mu(PureState([da, db], row / math.sqrt(p), min_dim=1), cut)
        return out

    return fn


def _restart(prob: _Problem, start: np.ndarray, rng: np.random.Generator, cfg: RoofConfig, backend):
    kern = backend
    fn = prob.contrib_fn
    if fn is not None:
        kern = kernels.get("python")
    psi = np.ascontiguousarray(start @ prob.weighted)
    contrib = fn(psi) if fn is not None else kern.contributions(psi, prob.da, prob.db, prob.code)
    contrib = np.ascontiguousarray(contrib, dtype=float)
    pairs = round_robin_pairs(prob.m)
    slots = prob.m + (prob.m % 2)
    step, done, converged = STEP0, 0, prob.m < 2
    while not converged and done < cfg.max_iterations:
        n = min(CHUNK, cfg.max_iterations - done)
        perms = np.ascontiguousarray(np.argsort(rng.random((n, slots)), axis=1), dtype=np.int64)
        u, phi = sweep_randomness(rng, n, pairs.shape[0])
        step, k, converged = kern.run_sweeps(
            psi, prob.da, prob.db, prob.code if prob.code is not None else -1, prob.sign,
            pairs, perms, u, phi, contrib, step, cfg.tolerance, STEP_MAX,
            **({"contrib_fn": fn} if fn is not None else {}),
        )
        done += k
    final = fn(psi) if fn is not None else kern.contributions(psi, prob.da, prob.db, prob.code)
    return float(np.sum(final)), psi, bool(converged)


def _search(rho: State, mu: PureMeasure, cut: Bipartition, cfg: RoofConfig, sign: float,
            starts: Sequence[np.ndarray] = (), backend: Optional[str] = None) -> RoofResult:
    rho = as_density(rho)
    cut.validate_for(rho.n)
    order = sorted(cut.side_a) + sorted(cut.side_b)
    inverse = list(np.argsort(order))
    grouped = group(rho, cut)
    da, db = grouped.dims
    lam, vec = eigensystem(grouped)
    r = lam.size
    bound = "upper" if sign > 0 else "lower"

    def to_original(rows: np.ndarray) -> Ensemble:
        e = _rows_to_ensemble(rows, grouped.dims)
        pdims = [rho.dims[i] for i in order]
        return Ensemble(
            [(p, permute(PureState(pdims, s.amplitudes, min_dim=1), inverse)) for p, s in e]
        )

    if r == 1:
        psi = PureState.normalized([da, db], vec[:, 0], min_dim=1)
        val = mu(psi, Bipartition([0], [1]))
        return RoofResult(val, to_original(vec[:, :1].T), True, "exact", 1, (val,))

    m = cfg.cardinality_for(r)
    code = mu.code
    kern = kernels.get(backend)
    prob = _Problem(
        weighted=np.ascontiguousarray((vec * np.sqrt(lam)).T),
        da=da,
        db=db,
        m=m,
        code=code,
        contrib_fn=None if code is not None else _generic_contrib(mu, da, db),
        sign=sign,
    )
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)

    def job(k: int):
        rng = np.random.default_rng(seeds[k])
        if k < len(starts):
            start = np.asarray(starts[k], dtype=complex)
            if start.shape != (m, r):
                raise StateError(f"start isometry has shape {start.shape}, expected {(m, r)}")
        else:
            start = random_isometry(m, r, rng)
        return _restart(prob, start, rng, cfg, kern)

    n_jobs = max(cfg.restarts, len(starts))
    if n_jobs > cfg.restarts:
        seeds = np.random.SeedSequence(cfg.seed).spawn(n_jobs)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(job, range(n_jobs)))
    else:
        results = [job(k) for k in range(n_jobs)]

    values = [v for v, _, _ in results]
    best = int(np.argmin([sign * v for v in values]))
    value, rows, conv = results[best]
    n_conv = sum(c for _, _, c in results)
    if not conv:
        log.info("roof search: best restart hit max_iterations=%d", cfg.max_iterations)
    value = max(value, 0.0)
    return RoofResult(value, to_original(rows), conv, bound, n_conv, tuple(values))


def roof_minimize(rho: State, mu: PureMeasure = TANGLE, cut: Optional[Bipartition] = None,
                  cfg: Optional[RoofConfig] = None, **kw) -> RoofResult:
    """Smallest average of ``mu`` found over decompositions of ``rho`` (an upper bound on the roof)."""
    rho = as_density(rho)
    cut = cut if cut is not None else Bipartition.focus(0, rho.n)
    return _search(rho, mu, cut, cfg or RoofConfig(), +1.0, **kw)


def roof_maximize(rho: State, mu: PureMeasure = TANGLE, cut: Optional[Bipartition] = None,
                  cfg: Optional[RoofConfig] = None, **kw) -> RoofResult:
    """Largest average of ``mu`` found over decompositions (a lower bound on the assisted value)."""
    rho = as_density(rho)
    cut = cut if cut is not None else Bipartition.focus(0, rho.n)
    return _search(rho, mu, cut, cfg or RoofConfig(), -1.0, **kw)


def assisted_entanglement(rho: State, cut: Optional[Bipartition] = None,
                          cfg: Optional[RoofConfig] = None) -> float:
    """Lower bound on the entanglement of assistance (von Neumann, bits)."""
    return roof_maximize(rho, ENTROPY, cut, cfg).value


def tangle_of_assistance(rho: State, cut: Optional[Bipartition] = None,
                         cfg: Optional[RoofConfig] = None) -> float:
    return roof_maximize(rho, TANGLE, cut, cfg).value


def entanglement_of_formation(rho: State, cut: Optional[Bipartition] = None,
                              cfg: Optional[RoofConfig] = None) -> float:
    """Upper bound on the entanglement of formation in any dimension."""
    return roof_minimize(rho, ENTROPY, cut, cfg).value


def sweep_randomness(rng: np.random.Generator, n: int, n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    """Angle offsets in [0, 1) and phases in [0, 2 pi) for ``n`` sweeps."""
    return rng.random((n, n_pairs)), rng.random((n, n_pairs)) * (2 * math.pi)
