"""Kernel backend selection.

Hot numeric loops ship in two implementations: numba-compiled kernels and
plain numpy.  The active backend is chosen once at import time from the
``NAMCOUNT_BACKEND`` environment variable:

* ``auto`` (default): numba when importable, numpy otherwise
* ``numba``: require numba, fail loudly if missing
* ``numpy``: force the pure-numpy fallback path

Both implementations are importable regardless of the switch so they can be
cross-checked and benchmarked against each other.
"""

from __future__ import annotations

import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    numba = None
    HAS_NUMBA = False

_ENV_VAR = "NAMCOUNT_BACKEND"
_choice = os.environ.get(_ENV_VAR, "auto").strip().lower()

if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"{_ENV_VAR} must be one of auto/numba/numpy, got {_choice!r}"
    )
if _choice == "numba" and not HAS_NUMBA:
    raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")

USE_NUMBA = HAS_NUMBA and _choice != "numpy"


def active_backend() -> str:
    """Name of the backend the dispatchers are using."""
    return "numba" if USE_NUMBA else "numpy"
