"""Kernel backend selection.

The compiled extension is used when it imports; otherwise (or when
``HOPCIRC_PURE_PYTHON=1``) the numpy fallback is used. Both expose the same
functions and give identical results.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

__all__ = ["kernels", "backend_name", "get_backend", "compiled_available"]


def _load_compiled() -> ModuleType | None:
    try:
        from . import _ckernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()


def compiled_available() -> bool:
    return _compiled is not None


def get_backend(name: str | None = None) -> ModuleType:
    """Return a kernel module: ``"compiled"``, ``"python"`` or ``None`` for the default."""
    if name is None:
        name = "python" if os.environ.get("HOPCIRC_PURE_PYTHON") == "1" else "auto"
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        return _compiled
    if name == "auto":
        return _compiled if _compiled is not None else _pykernels
    raise ValueError(f"unknown backend {name!r}")


kernels = get_backend()


def backend_name(mod: ModuleType | None = None) -> str:
    mod = kernels if mod is None else mod
    return "python" if mod is _pykernels else "compiled"
