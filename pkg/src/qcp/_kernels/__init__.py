"""Kernel backend selection.

The compiled extension is used when it was built; ``QCP_PURE_PYTHON=1`` forces
the numpy/pure-Python fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("QCP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

energies_all = _impl.energies_all
strict_local_minima = _impl.strict_local_minima
anneal_flip = _impl.anneal_flip
anneal_onehot = _impl.anneal_onehot


def backend(name: str):
    """Return the kernel module for ``"cython"`` or ``"python"`` (for comparisons)."""
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
