"""Input checks for complex-valued arrays.

scikit-learn's ``check_array`` refuses complex input, so the estimators in
this package use these instead.
"""

from __future__ import annotations

import numbers

import numpy as np


def check_complex_array(arr, *, ndim: int, name: str = "array", allow_real: bool = True) -> np.ndarray:
    """Return ``arr`` as a finite ndarray with exactly ``ndim`` dimensions.

    Real input is kept real when ``allow_real``; everything else is cast to
    ``complex128``.
    """
    out = np.asarray(arr)
    if out.dtype == object or not (
        np.issubdtype(out.dtype, np.number) or out.dtype == bool
    ):
        raise TypeError(f"{name} must be numeric, got dtype {out.dtype}")
    if out.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {out.shape}")
    if 0 in out.shape:
        raise ValueError(f"{name} must be nonempty, got shape {out.shape}")
    if np.iscomplexobj(out) or not allow_real:
        out = out.astype(np.complex128, copy=False)
    else:
        out = out.astype(np.float64, copy=False)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains NaN or inf")
    return out


def check_scalar_param(value, name: str, *, min_val: float | None = None,
                       include_min: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if min_val is not None:
        bad = value < min_val if include_min else value <= min_val
        if bad:
            op = ">=" if include_min else ">"
            raise ValueError(f"{name} must be {op} {min_val}, got {value}")
    return value
