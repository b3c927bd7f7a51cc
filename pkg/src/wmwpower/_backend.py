"""Select the kernel implementation at import time.

The compiled extension is preferred.  Set ``WMWPOWER_BACKEND=python`` to force
the numpy fallback (or ``compiled`` to fail loudly if the extension is missing).
"""

import os

from . import _fallback

fallback = _fallback

_choice = os.environ.get("WMWPOWER_BACKEND", "auto").strip().lower()

compiled = None
try:
    from . import _kernels as compiled
except ImportError:  # pragma: no cover - depends on the build
    if _choice == "compiled":
        raise

if _choice == "python" or compiled is None:
    active = _fallback
else:
    active = compiled


def get(name=None):
    """Return a backend module by name ('compiled', 'python'), or the active one."""
    if name is None:
        return active
    if name == "python":
        return _fallback
    if name == "compiled":
        if compiled is None:
            raise ImportError("compiled kernels are not available in this install")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
