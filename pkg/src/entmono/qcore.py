"""State containers and the dense linear algebra the measures are built on.

Subsystems are ordered row-major: the leftmost entry of ``dims`` is the most
significant digit of a computational-basis index, so ``|e1 e2 e3>`` maps to
index ``e1*d2*d3 + e2*d3 + e3``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
NEGATIVE_EIG_TOL = 1e-9
NORM_TOL = 1e-12
RANK_CUTOFF = 1e-12


class StateError(ValueError):
    """Raised for invalid states, cuts and dimension mismatches."""


def _check_dims(dims: Iterable[int], min_dim: int = 2) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise StateError("dims must be non-empty")
    if any(d < min_dim for d in dims):
        raise StateError(f"every subsystem dimension must be >= {min_dim}, got {dims}")
    return dims


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm amplitude vector over ``prod(dims)`` basis states."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __init__(self, dims: Sequence[int], amplitudes, *, min_dim: int = 2):
        dims = _check_dims(dims, min_dim)
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if vec.size != math.prod(dims):
            raise StateError(
                f"amplitude vector has length {vec.size}, expected {math.prod(dims)} for dims {dims}"
            )
        norm2 = float(np.vdot(vec, vec).real)
        if abs(norm2 - 1.0) > NORM_TOL:
            raise StateError(f"state is not normalized (|psi|^2 = {norm2!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", _frozen(vec))

    @classmethod
    def normalized(cls, dims: Sequence[int], amplitudes, **kw) -> "PureState":
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise StateError("cannot normalize the zero vector")
        return cls(dims, vec / norm, **kw)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> "DensityOperator":
        v = self.amplitudes
        return DensityOperator(self.dims, np.outer(v, v.conj()), min_dim=1)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amplitudes.reshape(self.dims)

    def __repr__(self) -> str:
        return f"PureState(dims={list(self.dims)})"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix with subsystem dims."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, dims: Sequence[int], matrix, *, min_dim: int = 2, validate: bool = True):
        dims = _check_dims(dims, min_dim)
        m = np.asarray(matrix, dtype=complex)
        d = math.prod(dims)
        if m.shape != (d, d):
            raise StateError(f"matrix has shape {m.shape}, expected {(d, d)} for dims {dims}")
        if validate:
            herm = np.max(np.abs(m - m.conj().T)) if d else 0.0
            if herm > HERMITIAN_TOL:
                raise StateError(f"matrix is not Hermitian (max deviation {herm:.3g})")
            tr = np.trace(m).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise StateError(f"trace is {tr!r}, expected 1")
            lo = np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]
            if lo < -NEGATIVE_EIG_TOL:
                raise StateError(f"matrix has negative eigenvalue {lo:.3g}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending, clipped at zero) and eigenvectors."""
        w, v = np.linalg.eigh(0.5 * (self.matrix + self.matrix.conj().T))
        return clip_spectrum(w), v

    def spectrum(self) -> np.ndarray:
        return clip_spectrum(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T)))

    def rank(self, cutoff: float = RANK_CUTOFF) -> int:
        return int(np.sum(self.spectrum() > cutoff))

    def is_pure(self, tol: float = 1e-9) -> bool:
        return abs(float(np.vdot(self.matrix, self.matrix).real) - 1.0) <= tol

    def __repr__(self) -> str:
        return f"DensityOperator(dims={list(self.dims)})"


State = Union[PureState, DensityOperator]


def clip_spectrum(w: np.ndarray, tol: float = NEGATIVE_EIG_TOL) -> np.ndarray:
    """Clip eigenvalues in ``[-tol, 0)`` to zero; anything lower is an error."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -tol:
        raise StateError(f"eigenvalue {w.min():.3g} below -{tol:g}")
    return np.where(w < 0, 0.0, w)


def as_density(state: State) -> DensityOperator:
    if isinstance(state, PureState):
        return state.projector()
    if isinstance(state, DensityOperator):
        return state
    raise TypeError(f"expected PureState or DensityOperator, got {type(state).__name__}")


@dataclass(frozen=True)
class Bipartition:
    """Split of subsystem indices into two disjoint, covering, non-empty sides."""

    side_a: frozenset[int]
    side_b: frozenset[int]

    def __init__(self, side_a: Iterable[int], side_b: Iterable[int]):
        a, b = frozenset(int(i) for i in side_a), frozenset(int(i) for i in side_b)
        if not a or not b:
            raise StateError("both sides of a cut must be non-empty")
        if a & b:
            raise StateError(f"cut sides overlap on {sorted(a & b)}")
        object.__setattr__(self, "side_a", a)
        object.__setattr__(self, "side_b", b)

    @classmethod
    def focus(cls, index: int, n: int) -> "Bipartition":
        """The cut ``index | everything else`` on ``n`` subsystems."""
        if not 0 <= index < n:
            raise StateError(f"focus {index} out of range for {n} subsystems")
        return cls([index], [i for i in range(n) if i != index])

    @classmethod
    def parse(cls, text: str) -> "Bipartition":
        """Parse ``"0|1,2"`` style cut syntax."""
        try:
            left, right = text.split("|")
            return cls(
                [int(t) for t in left.split(",") if t.strip()],
                [int(t) for t in right.split(",") if t.strip()],
            )
        except ValueError as exc:
            raise StateError(f"malformed cut {text!r}: {exc}") from None

    @property
    def members(self) -> frozenset[int]:
        return self.side_a | self.side_b

    def validate_for(self, n: int) -> None:
        """Check that the cut covers exactly the subsystems ``0..n-1``."""
        if self.members != frozenset(range(n)):
            raise StateError(
                f"cut {self} does not cover subsystems 0..{n - 1} exactly"
            )

    def swapped(self) -> "Bipartition":
        return Bipartition(self.side_b, self.side_a)

    def __str__(self) -> str:
        return ",".join(map(str, sorted(self.side_a))) + "|" + ",".join(map(str, sorted(self.side_b)))


@dataclass(frozen=True, eq=False)
class WitnessOperator:
    dims: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, dims: Sequence[int], matrix):
        dims = _check_dims(dims)
        m = np.asarray(matrix, dtype=complex)
        d = math.prod(dims)
        if m.shape != (d, d):
            raise StateError(f"witness has shape {m.shape}, expected {(d, d)}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise StateError(f"witness is not Hermitian (max deviation {herm:.3g})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen(m))


# --------------------------------------------------------------------------
# tensor structure


def tensor_product(a: State, b: State) -> State:
    """Kronecker product with concatenated dims. Both operands must be the same kind."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes), min_dim=1)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(a.dims + b.dims, np.kron(a.matrix, b.matrix), min_dim=1)
    raise StateError(
        f"cannot tensor {type(a).__name__} with {type(b).__name__}; convert with as_density first"
    )


def _check_indices(indices: Iterable[int], n: int) -> list[int]:
    idx = sorted(set(int(i) for i in indices))
    if not idx:
        raise StateError("index set must be non-empty")
    if idx[0] < 0 or idx[-1] >= n:
        raise StateError(f"subsystem index out of range for {n} subsystems: {idx}")
    return idx


def partial_trace(rho: State, keep: Iterable[int]) -> DensityOperator:
    """Reduce to the subsystems in ``keep``; kept subsystems retain their order."""
    keep = _check_indices(keep, len(rho.dims))
    dims = rho.dims
    if isinstance(rho, PureState):
        # contract the amplitude tensor with its conjugate over traced legs
        drop = [i for i in range(len(dims)) if i not in keep]
        psi = np.transpose(rho.tensor(), keep + drop).reshape(
            math.prod(dims[i] for i in keep), -1
        )
        red = psi @ psi.conj().T
    else:
        n = len(dims)
        t = rho.matrix.reshape(dims + dims)
        drop = [i for i in range(n) if i not in keep]
        perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
        dk = math.prod(dims[i] for i in keep)
        dd = math.prod(dims[i] for i in drop)
        t = np.transpose(t, perm).reshape(dk, dd, dk, dd)
        red = np.einsum("ajbj->ab", t)
    return DensityOperator([dims[i] for i in keep], red, min_dim=1, validate=False)


def permute(state: State, order: Sequence[int]) -> State:
    """Reorder subsystems: new subsystem ``k`` is old subsystem ``order[k]``."""
    n = len(state.dims)
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise StateError(f"{order} is not a permutation of 0..{n - 1}")
    dims = [state.dims[i] for i in order]
    if isinstance(state, PureState):
        vec = np.transpose(state.tensor(), order).reshape(-1)
        return PureState(dims, vec, min_dim=1)
    t = state.matrix.reshape(state.dims + state.dims)
    t = np.transpose(t, order + [n + i for i in order])
    d = state.dim
    return DensityOperator(dims, t.reshape(d, d), min_dim=1, validate=False)


def group(state: State, cut: Bipartition) -> State:
    """View ``state`` as a bipartite state on ``(side_a, side_b)`` with merged dims."""
    cut.validate_for(len(state.dims))
    a, b = sorted(cut.side_a), sorted(cut.side_b)
    p = permute(state, a + b)
    da = math.prod(state.dims[i] for i in a)
    db = math.prod(state.dims[i] for i in b)
    if isinstance(p, PureState):
        return PureState([da, db], p.amplitudes, min_dim=1)
    return DensityOperator([da, db], p.matrix, min_dim=1, validate=False)


def embed_dims(state: State, dims: Sequence[int]) -> State:
    """Relabel the subsystem structure without touching the data."""
    if isinstance(state, PureState):
        return PureState(dims, state.amplitudes, min_dim=1)
    return DensityOperator(dims, state.matrix, min_dim=1, validate=False)


# --------------------------------------------------------------------------
# spectral helpers


def psd_sqrt(m) -> np.ndarray:
    """Square root of a Hermitian positive semidefinite matrix."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"expected a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise StateError("psd_sqrt requires a Hermitian matrix")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    w = clip_spectrum(w)
    return (v * np.sqrt(w)) @ v.conj().T


def purify(rho: State) -> PureState:
    """Minimal purification: ``dims`` gains one trailing environment of size rank(rho).

    The returned vector is ``sum_j sqrt(l_j) |v_j> |j>`` over eigenpairs with
    ``l_j > 1e-12``, renormalized to absorb the dropped weight.
    """
    if isinstance(rho, PureState):
        return PureState(rho.dims + (1,), rho.amplitudes, min_dim=1)
    w, v = rho.eigh()
    keep = w > RANK_CUTOFF
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    vec = (v * np.sqrt(w)).reshape(-1)
    return PureState.normalized(rho.dims + (int(w.size),), vec, min_dim=1)


def witness_expectation(rho: State, w: WitnessOperator) -> float:
    rho = as_density(rho)
    if tuple(rho.dims) != tuple(w.dims):
        raise StateError(f"witness dims {w.dims} do not match state dims {rho.dims}")
    val = np.trace(rho.matrix @ w.matrix)
    if abs(val.imag) > 1e-6:
        raise StateError(f"Tr(rho W) has imaginary part {val.imag:.3g}")
    return float(val.real)


# --------------------------------------------------------------------------
# random states


def haar_random_pure(dims: Sequence[int], seed) -> PureState:
    """Haar-distributed pure state from a normalized complex Gaussian vector."""
    dims = _check_dims(dims)
    rng = np.random.default_rng(seed)
    d = math.prod(dims)
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState.normalized(dims, z)


def ginibre_random_density(dims: Sequence[int], rank: int, seed) -> DensityOperator:
    """Random mixed state ``G G^+ / tr(G G^+)`` with ``G`` a ``d x rank`` Ginibre matrix."""
    dims = _check_dims(dims)
    d = math.prod(dims)
    if not 1 <= rank <= d:
        raise StateError(f"rank must lie in [1, {d}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(dims, m / np.trace(m).real)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(m: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """``m x r`` matrix with orthonormal columns, Haar-distributed."""
    z = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    q, rr = np.linalg.qr(z)
    ph = np.diag(rr) / np.abs(np.diag(rr))
    return q * ph


# --------------------------------------------------------------------------
# JSON state files


def _encode_complex(a: np.ndarray):
    if a.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in a]
    return [_encode_complex(row) for row in a]


def _decode_complex(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise StateError("state data entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_dict(state: State) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "kind": "pure", "data": _encode_complex(state.amplitudes)}
    return {"dims": list(state.dims), "kind": "mixed", "data": _encode_complex(state.matrix)}


def state_from_dict(obj: dict) -> State:
    try:
        dims, kind, data = obj["dims"], obj["kind"], obj["data"]
    except (KeyError, TypeError) as exc:
        raise StateError(f"state object missing field {exc}") from None
    arr = _decode_complex(data)
    if kind == "pure":
        if arr.ndim != 1:
            raise StateError("pure state data must be a vector")
        return PureState(dims, arr, min_dim=1)
    if kind == "mixed":
        if arr.ndim != 2:
            raise StateError("mixed state data must be a square matrix")
        return DensityOperator(dims, arr, min_dim=1)
    raise StateError(f"unknown state kind {kind!r}")


def save_state(state: State, path) -> None:
    # json writes floats with repr(), i.e. 17 significant digits
    Path(path).write_text(json.dumps(state_to_dict(state)) + "\n")


def load_state(path) -> State:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateError(f"{path}: not valid JSON ({exc})") from None
    return state_from_dict(obj)
