"""Kernel selection: the compiled core when it imports, numpy otherwise.

Set ``ODDFORM_BACKEND=python`` to force the fallback.  ``ODDFORM_THREADS``
sets the default worker count of the compiled core.
"""

import os

from . import _closure_py

try:
    from . import _closure as _compiled
except ImportError:  # extension not built
    _compiled = None


def _pick(name):
    if name == "python" or _compiled is None:
        return _closure_py, "python"
    return _compiled, "compiled"


kernel, NAME = _pick(os.environ.get("ODDFORM_BACKEND", "auto"))


def get(name: str | None = None):
    """Kernel module by name ('compiled', 'python' or None for the default)."""
    if name is None:
        return kernel
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled closure kernel is not available")
        return _compiled
    return _closure_py


def available() -> list[str]:
    return ["compiled", "python"] if _compiled is not None else ["python"]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("ODDFORM_THREADS", "1")))
    except ValueError:
        return 1
