"""Hot-kernel backend selection.

The compiled extension (``_fastpath``) is preferred; the pure-Python twin is
the fallback when the extension is missing or ``HAULPATH_PURE=1`` is set.
Both implement identical algorithms with identical tie-breaking, so builds
and searches are bit-reproducible across backends.
"""

from __future__ import annotations

import os

from .pure import UNREACHABLE, WILDCARD
from . import pure

_forced_pure = os.environ.get("HAULPATH_PURE", "").lower() in ("1", "true", "yes")

if not _forced_pure:
    try:
        from . import _fastpath as _impl
    except ImportError:
        _impl = pure
else:
    _impl = pure

first_move_rows = _impl.first_move_rows
dijkstra_distances = _impl.dijkstra_distances
zstar_path = _impl.zstar_path


def backend_name() -> str:
    return "pure" if _impl is pure else "compiled"


def get_backend(name: str):
    """Fetch a specific backend module ("pure" or "compiled") for comparison
    runs; raises ImportError if the compiled extension is unavailable."""
    if name == "pure":
        return pure
    if name == "compiled":
        from . import _fastpath

        return _fastpath
    raise ValueError(f"unknown backend {name!r}")
