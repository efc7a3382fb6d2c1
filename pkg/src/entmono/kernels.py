"""Backend selection for the ensemble local-search kernel.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over with identical semantics.
"""

from __future__ import annotations

from types import ModuleType

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

LINEAR = _kernel_py.LINEAR
VON_NEUMANN = _kernel_py.VON_NEUMANN

_active: ModuleType = _compiled if _compiled is not None else _kernel_py


def backend() -> str:
    return "cython" if _active is _compiled else "python"


def available() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def use_backend(name: str) -> None:
    """Switch between ``"cython"`` and ``"python"`` for subsequent searches."""
    global _active
    if name == "python":
        _active = _kernel_py
    elif name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available in this installation")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def get(name: str | None = None) -> ModuleType:
    if name is None:
        return _active
    if name == "python":
        return _kernel_py
    if name == "cython" and _compiled is not None:
        return _compiled
    raise RuntimeError(f"backend {name!r} is not available")
