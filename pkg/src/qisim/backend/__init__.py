"""Kernel backend selection.

The compiled extension (``_fastcore``, Cython) is preferred when present;
otherwise the pure-numpy reference implementation is used. Both expose the
same functions and produce identical sampling results, so the choice only
affects speed. Set ``QISIM_BACKEND=python`` or ``QISIM_BACKEND=compiled``
to force one (the latter raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import reference

_forced = os.environ.get("QISIM_BACKEND")

if _forced == "python":
    active = reference
elif _forced == "compiled":
    from . import _fastcore as active  # noqa: F401
else:
    try:
        from . import _fastcore as active  # type: ignore[no-redef]
    except ImportError:
        active = reference

BACKEND_NAME: str = active.BACKEND_NAME


def available_backends():
    """Mapping of backend name to module, for benchmarks and parity tests."""
    out = {"python": reference}
    try:
        from . import _fastcore

        out["compiled"] = _fastcore
    except ImportError:
        pass
    return out
