"""Backend selection for the hot lookup loop.

The compiled extension is used when it imports; otherwise the pure-Python
implementation takes over. Both produce identical results.
"""

from . import _lookup_py

try:
    from . import _lookup_kernel
except ImportError:  # extension not built
    _lookup_kernel = None

BACKENDS = {"python": _lookup_py.lookup_batch}
if _lookup_kernel is not None:
    BACKENDS["compiled"] = _lookup_kernel.lookup_batch

DEFAULT_BACKEND = "compiled" if "compiled" in BACKENDS else "python"


def get_lookup_batch(backend=None):
    name = backend or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"lookup backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
