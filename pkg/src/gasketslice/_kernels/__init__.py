"""Hot-loop kernels with a compiled core and a NumPy fallback.

Two interchangeable implementations of the same four entry points:

* ``_fast``  - Cython extension, built at install time when a compiler is
  available (word enumeration and Monte Carlo chains are tight loops).
* ``_ref``   - pure NumPy, always available, used as ground truth in tests.

Selection happens once at import.  Set ``GASKETSLICE_BACKEND=python`` to
force the fallback or ``GASKETSLICE_BACKEND=cython`` to insist on the
extension (raises if it is missing).  Integer-valued kernels (``tally_dots``,
``envelope_scan``) return identical results under both backends; float
kernels agree to rounding.
"""
from __future__ import annotations

import os

_requested = os.environ.get("GASKETSLICE_BACKEND", "").strip().lower()

if _requested in ("", "cython"):
    try:
        from . import _fast as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "GASKETSLICE_BACKEND=cython but the compiled extension is not built"
            )
        from . import _ref as _impl
        BACKEND = "python"
elif _requested == "python":
    from . import _ref as _impl
    BACKEND = "python"
else:
    raise ValueError(f"unknown GASKETSLICE_BACKEND={_requested!r}")

tally_dots = _impl.tally_dots
envelope_scan = _impl.envelope_scan
score_words = _impl.score_words
sample_eta_words = _impl.sample_eta_words

__all__ = [
    "BACKEND",
    "tally_dots",
    "envelope_scan",
    "score_words",
    "sample_eta_words",
]
