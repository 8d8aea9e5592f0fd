"""Selects the compiled sign kernels when built, the numpy ones otherwise.

Set ``RELURANK_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if not os.environ.get("RELURANK_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "cython" if compiled_backend is not None else "numpy"

relu_difference_signs = backend.relu_difference_signs
poly_difference_signs = backend.poly_difference_signs

__all__ = ["relu_difference_signs", "poly_difference_signs", "BACKEND_NAME", "backend",
           "python_backend", "compiled_backend"]
