"""Statevector kernel backend selection.

The compiled extension is preferred; the numpy implementation is the
drop-in fallback when the extension was not built.  Set
``IAOQ_KERNELS=numpy`` to force the fallback (used by the benchmark and
the backend-equivalence tests).
"""

import os

from . import numpy_backend

try:
    from . import _statevec as _compiled
except ImportError:          # pragma: no cover - build-dependent
    _compiled = None

if os.environ.get("IAOQ_KERNELS", "").lower() == "numpy" or _compiled is None:
    _active = numpy_backend
else:
    _active = _compiled


def backend_name() -> str:
    return _active.NAME


def get_backend(name: str | None = None):
    """Return a kernel module by name (None = the active default)."""
    if name in (None, ""):
        return _active
    if name == "numpy":
        return numpy_backend
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


apply_1q = _active.apply_1q
apply_2q = _active.apply_2q
apply_cnot = _active.apply_cnot
apply_pauli = _active.apply_pauli
pauli_expect = _active.pauli_expect
pauli_masks = _active.pauli_masks
