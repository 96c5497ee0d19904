"""Kernel backend selection.

The compiled extension ``bellshrink._native`` is preferred when it imported
successfully; ``bellshrink._pure`` is the drop-in fallback. Both produce
bit-identical results for a given seed. Set ``BELLSHRINK_PURE_PYTHON=1`` to
force the fallback (used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

from bellshrink import _pure


def _want_pure() -> bool:
    return os.environ.get("BELLSHRINK_PURE_PYTHON", "").strip() not in ("", "0")


if _want_pure():
    impl = _pure
else:
    try:
        from bellshrink import _native as impl  # type: ignore[no-redef]
    except ImportError:
        impl = _pure

BACKEND: str = impl.BACKEND


def available_backends() -> dict:
    """Importable kernel backends keyed by name (for benchmarks and tests)."""
    found = {"python": _pure}
    try:
        from bellshrink import _native

        found["compiled"] = _native
    except ImportError:
        pass
    return found
