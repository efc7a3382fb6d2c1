"""Monogamy and polygamy inequalities for shared entanglement.

Each check produces a :class:`MonogamyReport` holding the focus-cut
entanglement (``lhs``), one term per partner (``rhs_terms``), and their
difference. Terms obtained from a numerical roof search are bounds, not
values; the report records which direction each bound points so a verdict is
only called sound when optimizer slack cannot have produced it.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .entropy import von_neumann
from .qcore import (
    Bipartition,
    PureState,
    State,
    StateError,
    as_density,
    haar_random_pure,
    partial_trace,
)
from .roof import ENTROPY, TANGLE, RoofConfig, roof_maximize, roof_minimize
from .states import antisymmetric_state
from .tangle import pure_tangle, two_qubit_tangle

log = logging.getLogger(__name__)

ANALYTIC_TOL = 1e-8
ROOF_TOL = 1e-4

MONOGAMY = "monogamy"
POLYGAMY = "polygamy"


@dataclass(frozen=True)
class MonogamyReport:
    """One inequality evaluation.

    For ``orientation == "monogamy"`` the inequality reads
    ``lhs >= sum(rhs_terms)`` and holds when ``residual >= -tolerance``; for
    ``"polygamy"`` it reads ``lhs <= sum(rhs_terms)`` and holds when
    ``residual <= tolerance``.
    """

    lhs: float
    rhs_terms: tuple[float, ...]
    residual: float
    satisfied: bool
    focus: int
    partners: tuple[int, ...]
    lhs_method: str
    rhs_methods: tuple[str, ...]
    tolerance: float
    orientation: str = MONOGAMY
    sound: bool = True
    refined: bool = False
    note: str = ""

    @classmethod
    def build(cls, lhs, rhs_terms, focus, partners, lhs_method, rhs_methods,
              orientation=MONOGAMY, tolerance=None, note="") -> "MonogamyReport":
        rhs_terms = tuple(float(x) for x in rhs_terms)
        rhs_methods = tuple(rhs_methods)
        lhs = float(lhs)
        residual = lhs - sum(rhs_terms)
        analytic = lhs_method == "analytic" and all(m == "analytic" for m in rhs_methods)
        if tolerance is None:
            tolerance = ANALYTIC_TOL if analytic else ROOF_TOL
        if orientation == MONOGAMY:
            satisfied = residual >= -tolerance
            # lhs upper bound + exact rhs: a pass is protected only if lhs is exact;
            # a failure with exact lhs and upper-bound rhs is also inconclusive
            sound = analytic or (satisfied and lhs_method == "analytic") or (
                not satisfied and lhs_method != "analytic" and all(m == "analytic" for m in rhs_methods)
            )
        elif orientation == POLYGAMY:
            satisfied = residual <= tolerance
            # rhs are lower bounds: passing is sound, failing is inconclusive
            sound = satisfied
        else:
            raise ValueError(f"unknown orientation {orientation!r}")
        return cls(lhs, rhs_terms, residual, bool(satisfied), int(focus), tuple(int(p) for p in partners),
                   lhs_method, rhs_methods, float(tolerance), orientation, bool(sound), False, note)

    @property
    def rhs_total(self) -> float:
        return float(sum(self.rhs_terms))

    def method_tags(self) -> str:
        return ";".join([f"lhs:{self.lhs_method}"] + [f"{p}:{m}" for p, m in zip(self.partners, self.rhs_methods)])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rhs_terms"] = list(self.rhs_terms)
        d["partners"] = list(self.partners)
        d["rhs_methods"] = list(self.rhs_methods)
        d["bound_directions"] = {
            "lhs": _direction(self.lhs_method, self.orientation, lhs=True),
            "rhs": [_direction(m, self.orientation, lhs=False) for m in self.rhs_methods],
        }
        return d


def _direction(method: str, orientation: str, *, lhs: bool) -> str:
    if method == "analytic":
        return "exact"
    if method == "roof-min":
        return "upper"
    if method == "roof-max":
        return "lower"
    return method


def _require_qubits(state: State, n: Optional[int] = None) -> None:
    if any(d != 2 for d in state.dims):
        raise StateError(
            f"this inequality is stated for qubits only; got dims {list(state.dims)}"
        )
    if n is not None and len(state.dims) != n:
        raise StateError(f"expected {n} qubits, got {len(state.dims)}")


def _pair_tangle(state: State, i: int, j: int) -> float:
    return two_qubit_tangle(partial_trace(state, [i, j])).value


def tau1(psi: PureState) -> float:
    """Mean one-versus-rest tangle of a three-qubit pure state."""
    _require_qubits(psi, 3)
    return sum(pure_tangle(psi, Bipartition.focus(k, 3)).value for k in range(3)) / 3.0


def tau2(psi: PureState) -> float:
    """Mean two-qubit tangle over the three pairwise reductions."""
    _require_qubits(psi, 3)
    return (_pair_tangle(psi, 0, 1) + _pair_tangle(psi, 1, 2) + _pair_tangle(psi, 0, 2)) / 3.0


def ckw_check_pure(psi: PureState, focus: int = 0) -> MonogamyReport:
    if not isinstance(psi, PureState):
        raise StateError("ckw_check_pure needs a pure state")
    _require_qubits(psi, 3)
    return n_qubit_monogamy(psi, focus)


def ckw_check_mixed(rho: State, focus: int = 0, cfg: Optional[RoofConfig] = None) -> MonogamyReport:
    _require_qubits(rho, 3)
    return n_qubit_monogamy(as_density(rho), focus, cfg)


def _focus_tangle(state: State, focus: int, cfg: Optional[RoofConfig]) -> tuple[float, str]:
    cut = Bipartition.focus(focus, len(state.dims))
    if isinstance(state, PureState):
        return pure_tangle(state, cut).value, "analytic"
    rho = as_density(state)
    if rho.rank() == 1:
        w, v = rho.eigh()
        psi = PureState.normalized(rho.dims, v[:, -1], min_dim=1)
        return pure_tangle(psi, cut).value, "analytic"
    return roof_minimize(rho, TANGLE, cut, cfg or RoofConfig()).value, "roof-min"


def n_qubit_monogamy(state: State, focus: int = 0, cfg: Optional[RoofConfig] = None) -> MonogamyReport:
    """CKW-type check ``tau(focus | rest) >= sum_k tau(focus, k)`` on ``n >= 3`` qubits."""
    _require_qubits(state)
    n = len(state.dims)
    if n < 3:
        raise StateError(f"monogamy needs at least three qubits, got {n}")
    lhs, method = _focus_tangle(state, focus, cfg)
    partners = [k for k in range(n) if k != focus]
    rhs = [_pair_tangle(state, min(focus, k), max(focus, k)) for k in partners]
    return MonogamyReport.build(lhs, rhs, focus, partners, method, ["analytic"] * len(rhs))


def polygamy_tangle(psi: PureState, focus: int = 0, cfg: Optional[RoofConfig] = None) -> MonogamyReport:
    """``tau(focus | rest) <= sum_k tau_a(focus, k)`` with assisted tangles from the roof maximizer."""
    _require_qubits(psi)
    if not isinstance(psi, PureState):
        raise StateError("polygamy_tangle needs a pure state")
    n = psi.n
    cfg = cfg or RoofConfig()
    lhs = pure_tangle(psi, Bipartition.focus(focus, n)).value
    partners = [k for k in range(n) if k != focus]
    rhs = [
        roof_maximize(partial_trace(psi, sorted((focus, k))), TANGLE, Bipartition([0], [1]), cfg).value
        for k in partners
    ]
    return MonogamyReport.build(
        lhs, rhs, focus, partners, "analytic", ["roof-max"] * len(rhs), POLYGAMY,
        note="rhs terms are lower bounds: 'satisfied' is sound, a violation is inconclusive",
    )


def polygamy_vn(psi: PureState, cfg: Optional[RoofConfig] = None, focus: int = 0) -> MonogamyReport:
    """``S(rho_A) <= E_a(rho_AB) + E_a(rho_AC)`` for a tripartite pure state of any dims."""
    if not isinstance(psi, PureState):
        raise StateError("polygamy_vn needs a pure state")
    if psi.n != 3:
        raise StateError(f"polygamy_vn needs exactly three subsystems, got {psi.n}")
    cfg = cfg or RoofConfig()
    lhs = von_neumann(partial_trace(psi, [focus]))
    partners = [k for k in range(3) if k != focus]
    rhs = []
    for k in partners:
        pair = sorted((focus, k))
        cut = Bipartition([pair.index(focus)], [pair.index(k)])
        rhs.append(roof_maximize(partial_trace(psi, pair), ENTROPY, cut, cfg).value)
    return MonogamyReport.build(
        lhs, rhs, focus, partners, "analytic", ["roof-max"] * 2, POLYGAMY,
        note="rhs terms are lower bounds: 'satisfied' is sound, a violation is inconclusive",
    )


# --------------------------------------------------------------------------
# higher-dimensional search


def _qudit_pair_tangle(psi: PureState, focus: int, k: int, cfg: RoofConfig) -> tuple[float, str]:
    pair = sorted((focus, k))
    rho = partial_trace(psi, pair)
    if tuple(rho.dims) == (2, 2):
        return two_qubit_tangle(rho).value, "analytic"
    cut = Bipartition([pair.index(focus)], [pair.index(k)])
    return roof_minimize(rho, TANGLE, cut, cfg).value, "roof-min"


def qudit_monogamy(psi: PureState, focus: int, cfg: RoofConfig) -> MonogamyReport:
    """Tangle monogamy on a tripartite pure state of arbitrary dims.

    Pairwise terms are roof upper bounds unless the pair is two qubits, in
    which case the closed form is used.
    """
    if psi.n != 3:
        raise StateError("qudit_monogamy needs a tripartite state")
    lhs = pure_tangle(psi, Bipartition.focus(focus, 3)).value
    partners = [k for k in range(3) if k != focus]
    terms = [_qudit_pair_tangle(psi, focus, k, cfg) for k in partners]
    return MonogamyReport.build(
        lhs, [t for t, _ in terms], focus, partners, "analytic", [m for _, m in terms],
    )


def violation_search(dims: Sequence[int], samples: int, cfg: Optional[RoofConfig] = None, seed: int = 0,
                     threshold: float = 1e-3, foci: Sequence[int] = (0,),
                     include_trial_states: bool = True, discarded: Optional[list] = None) -> list[MonogamyReport]:
    """Search tripartite pure states for tangle-monogamy violations.

    Candidates with ``residual < -threshold`` are re-evaluated with
    ``cfg.refined()`` (four times the restarts, doubled cardinality); only those
    still below ``-threshold`` are returned, flagged ``refined``. Candidates
    that do not survive are appended to ``discarded`` when given.
    """
    dims = [int(d) for d in dims]
    if len(dims) != 3:
        raise StateError(f"violation_search needs three subsystems, got {dims}")
    cfg = cfg or RoofConfig()
    trial: list[PureState] = []
    if include_trial_states and dims == [3, 3, 3]:
        trial.append(antisymmetric_state(3))
    seeds = np.random.SeedSequence(seed).spawn(max(samples, 0))
    states = trial[:samples] + [haar_random_pure(dims, s) for s in seeds[len(trial[:samples]):]]
    out = []
    for idx, psi in enumerate(states):
        for focus in foci:
            rep = qudit_monogamy(psi, focus, cfg)
            if rep.residual >= -threshold:
                continue
            if all(m == "analytic" for m in rep.rhs_methods):
                # nothing to refine; an exact violation would contradict the qubit theorem
                out.append(replace(rep, refined=True, note=f"sample {idx}"))
                continue
            again = qudit_monogamy(psi, focus, cfg.refined())
            again = replace(again, refined=True, note=f"sample {idx}; first pass residual {rep.residual:.6g}")
            if again.residual < -threshold:
                out.append(again)
            else:
                log.info("sample %d focus %d discarded after refinement (%.3g)", idx, focus, again.residual)
                if discarded is not None:
                    discarded.append(again)
    return out
