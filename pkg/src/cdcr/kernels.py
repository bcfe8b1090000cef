"""Kernel dispatch: compiled extension when built, pure Python otherwise."""

from __future__ import annotations

from . import _kernels_py

try:
    from . import _kernels as _compiled  # type: ignore[attr-defined]

    BACKEND = "cython"
    _impl = _compiled
except ImportError:  # extension not built; fall back
    BACKEND = "python"
    _compiled = None
    _impl = _kernels_py

connected_components = _impl.connected_components
max_weight_assignment = _impl.max_weight_assignment


def backends() -> dict[str, object]:
    """Available kernel implementations keyed by name (for tests/benchmarks)."""
    out: dict[str, object] = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
