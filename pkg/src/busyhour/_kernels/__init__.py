"""Numeric kernel backend selection.

The compiled extension (``_native``, built from Cython) is preferred when
importable; otherwise the NumPy reference implementations in ``pyref``
are used.  Set ``BUSYHOUR_PURE_PYTHON=1`` to force the fallback, e.g. to
cross-check results or run the kernel benchmark.
"""

from __future__ import annotations

import os

from . import pyref

_FORCE_PURE = os.environ.get("BUSYHOUR_PURE_PYTHON", "").lower() in ("1", "true", "yes")

_impl = pyref
_backend = "python"
if not _FORCE_PURE:
    try:
        from . import _native

        _impl = _native
        _backend = "native"
    except ImportError:
        pass

css_residuals = _impl.css_residuals
lstm_forward = _impl.lstm_forward
lstm_loss_grads = _impl.lstm_loss_grads


def backend() -> str:
    """Name of the active kernel backend: ``"native"`` or ``"python"``."""
    return _backend


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by backend name."""
    out: dict[str, object] = {"python": pyref}
    try:
        from . import _native as native_mod

        out["native"] = native_mod
    except ImportError:
        pass
    return out
