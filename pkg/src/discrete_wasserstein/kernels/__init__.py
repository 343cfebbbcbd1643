"""Hot kernels with a compiled core and a pure-Python fallback.

The compiled module ``_ctransport`` is used when it was built and importable;
set ``DISCRETE_WASSERSTEIN_PURE=1`` to force the fallback. Instances whose
integer data may overflow int64 are always routed to the Python version.
"""

from __future__ import annotations

import os

from ._pytransport import transport_min_cost as py_transport_min_cost

try:
    if os.environ.get("DISCRETE_WASSERSTEIN_PURE", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from ._ctransport import transport_min_cost as c_transport_min_cost
except ImportError:
    c_transport_min_cost = None

HAVE_EXTENSION = c_transport_min_cost is not None
BACKEND = "cython" if HAVE_EXTENSION else "python"

_INT64_SAFE = 2**62


def fits_int64(supply, demand, cost) -> bool:
    total = sum(supply)
    worst = max((abs(c) for row in cost for c in row), default=0)
    # Path distances are bounded by (nodes) * worst; costs by total * worst.
    bound = max(total, len(supply) + len(demand) + 2) * max(worst, 1)
    return total < _INT64_SAFE and bound < _INT64_SAFE


def transport_min_cost(supply, demand, cost, *, backend: str | None = None):
    """Dispatch to the compiled or Python solver; see ``_pytransport``."""
    supply = [int(s) for s in supply]
    demand = [int(d) for d in demand]
    use_c = backend != "python" and HAVE_EXTENSION and fits_int64(supply, demand, cost)
    if backend == "cython" and not use_c:
        raise RuntimeError("compiled kernel unavailable for this instance")
    if use_c:
        return c_transport_min_cost(supply, demand, cost)
    return py_transport_min_cost(supply, demand, cost)


__all__ = [
    "BACKEND",
    "HAVE_EXTENSION",
    "c_transport_min_cost",
    "fits_int64",
    "py_transport_min_cost",
    "transport_min_cost",
]
