"""Select the compiled kernels when importable, else the numpy fallback."""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("MAXJUMP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

sample_chain = _impl.sample_chain
propagate = _impl.propagate
kstep_deltas = _impl.kstep_deltas
