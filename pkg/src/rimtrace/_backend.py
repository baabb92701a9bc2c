"""Backend selection: compiled kernels when built, numpy fallback otherwise.

Set ``RIMTRACE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from rimtrace import _pykernels

pure = _pykernels
compiled = None

if os.environ.get("RIMTRACE_PURE_PYTHON", "") not in ("", "0"):
    impl = _pykernels
else:
    try:
        from rimtrace import _ckernels as compiled
    except ImportError:  # extension not built
        impl = _pykernels
    else:
        impl = compiled

name = "compiled" if impl is compiled else "python"


def use(backend: str) -> None:
    """Switch backend at runtime ('compiled' or 'python')."""
    global impl, name
    if backend == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not built")
        impl = compiled
    elif backend == "python":
        impl = _pykernels
    else:
        raise ValueError(f"unknown backend {backend!r}")
    name = backend
