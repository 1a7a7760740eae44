"""Scoring kernel selection: compiled extension if available, else pure Python.

``BACKEND`` reports which kernel is active ("cython" or "python").
Set ODQA_FORCE_PURE=1 to force the pure-Python kernel.
"""

from __future__ import annotations

import os

if os.environ.get("ODQA_FORCE_PURE") == "1":
    from odqa._scoring_py import BACKEND, accumulate_term
else:
    try:
        from odqa._scoring_cy import BACKEND, accumulate_term  # type: ignore
    except ImportError:
        from odqa._scoring_py import BACKEND, accumulate_term

__all__ = ["accumulate_term", "BACKEND"]
