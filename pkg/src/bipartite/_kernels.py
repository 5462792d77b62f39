"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
implementation takes over. Set ``BIPARTITE_PURE_PYTHON=1`` to force the
fallback (the benchmark and the backend-equivalence tests do this).
"""
import os

from . import _jacobi_py

BACKEND = "python"

if os.environ.get("BIPARTITE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _jacobi_ext as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _jacobi_py
else:
    _impl = _jacobi_py

jacobi_hermitian = _impl.jacobi_hermitian
jacobi_eigvals_batch = _impl.jacobi_eigvals_batch


def available_backends():
    """Return ``{name: module}`` for every kernel backend importable here."""
    backends = {"python": _jacobi_py}
    try:
        from . import _jacobi_ext

        backends["compiled"] = _jacobi_ext
    except ImportError:
        pass
    return backends
