"""Select the compiled kernels when available, else the numpy fallback."""
import os

from . import _kernels_py

if os.environ.get("IMEXSTAB_PURE_PYTHON", "0") == "1":
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

max_root_modulus = kernels.max_root_modulus
first_exceeding = kernels.first_exceeding

__all__ = ["BACKEND", "kernels", "max_root_modulus", "first_exceeding"]
