"""scikit-learn compatible wrappers around the solvers.

``ConvolutionalRidge`` deconvolves measurements ``Y = K * X + noise`` for a
known kernel: ``transform(Y)`` returns the ridge estimate of ``X`` and
``inverse_transform(X)`` applies the forward convolution.

``AMPRidge`` is a linear regressor (no intercept) fitted by approximate
message passing; on real data it agrees with
``sklearn.linear_model.Ridge(alpha=lam, fit_intercept=False)``.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex_array, check_scalar_param
from .amp import amp_ridge, solve_alpha
from .dft import transfer_of_kernel
from .signal_model import convolve
from .solvers import ridge_freq

__all__ = ["ConvolutionalRidge", "AMPRidge"]


class ConvolutionalRidge(TransformerMixin, BaseEstimator):
    """Ridge deconvolution with a known multichannel kernel.

    Parameters
    ----------
    kernel : array_like of shape (n_y, n_x, k)
        Convolution kernel, correlation convention with circular indexing.
    lam : float, default=1.0
        Ridge penalty. ``0`` gives least squares (minimum norm when
        underdetermined).

    Attributes
    ----------
    transfer_ : FreqTransfer
        Per-frequency transfer matrices for the fitted signal length.
    n_features_in_ : int
        Number of measurement channels ``n_y``.
    n_timesteps_ : int
    solution_ : RidgeSolution
        Result of the last :meth:`transform` call.
    """

    def __init__(self, kernel=None, lam=1.0):
        self.kernel = kernel
        self.lam = lam

    def fit(self, Y, y=None):
        """Validate ``Y`` of shape ``(n_y, T)`` and precompute the transfer for length ``T``."""
        K = check_complex_array(self.kernel, ndim=3, name="kernel", allow_real=False)
        check_scalar_param(self.lam, "lam", min_val=0.0)
        Y = check_complex_array(Y, ndim=2, name="Y", allow_real=False)
        if Y.shape[0] != K.shape[0]:
            raise ValueError(f"Y has {Y.shape[0]} channels but kernel expects {K.shape[0]}")
        self.transfer_ = transfer_of_kernel(K, Y.shape[1])
        self.n_features_in_ = Y.shape[0]
        self.n_timesteps_ = Y.shape[1]
        return self

    def transform(self, Y):
        """Ridge estimate ``X_hat`` of shape ``(n_x, T)``."""
        check_is_fitted(self, "transfer_")
        Y = check_complex_array(Y, ndim=2, name="Y", allow_real=False)
        if Y.shape != (self.n_features_in_, self.n_timesteps_):
            raise ValueError(
                f"Y must have shape {(self.n_features_in_, self.n_timesteps_)}, got {Y.shape}"
            )
        self.solution_ = ridge_freq(self.transfer_, Y, float(self.lam))
        return self.solution_.X_hat

    def inverse_transform(self, X):
        """Noiseless forward model ``K * X``."""
        check_is_fitted(self, "transfer_")
        X = check_complex_array(X, ndim=2, name="X", allow_real=False)
        return convolve(np.asarray(self.kernel), X)


class AMPRidge(BaseEstimator):
    """Ridge regression ``argmin ||y - A w||^2 + lam ||w||^2`` solved by AMP.

    Parameters
    ----------
    lam : float, default=1.0
    root : {"small", "large"}, default="small"
        Which root of the alpha/lambda quadratic drives the iteration. Only
        ``"small"`` converges; ``"large"`` is there to observe the instability.
    max_iter : int, default=2000
    tol : float, default=1e-10

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    shrinkage_ : float
        The AMP denoiser scale ``alpha``.
    n_iter_ : int
    converged_ : bool
    diverged_ : bool
    """

    def __init__(self, lam=1.0, root="small", max_iter=2000, tol=1e-10):
        self.lam = lam
        self.root = root
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, A, y):
        check_scalar_param(self.lam, "lam", min_val=0.0)
        if self.root not in ("small", "large"):
            raise ValueError(f"root must be 'small' or 'large', got {self.root!r}")
        A = check_complex_array(A, ndim=2, name="A")
        y = check_complex_array(y, ndim=1, name="y")
        if y.shape[0] != A.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but y has {y.shape[0]} entries")
        delta = A.shape[0] / A.shape[1]
        sol = solve_alpha(float(self.lam), delta)
        alpha = sol.alpha_small if self.root == "small" else sol.alpha_large
        res = amp_ridge(A, y, alpha, delta=delta, t_max=self.max_iter, tol=self.tol)
        self.coef_ = res.x
        self.shrinkage_ = alpha
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        self.diverged_ = res.diverged
        self.n_features_in_ = A.shape[1]
        if not res.converged:
            what = "diverged" if res.diverged else "did not converge"
            warnings.warn(f"AMP {what} after {res.iterations} iterations", ConvergenceWarning)
        return self

    def predict(self, A):
        check_is_fitted(self, "coef_")
        A = check_complex_array(A, ndim=2, name="A")
        if A.shape[1] != self.n_features_in_:
            raise ValueError(f"A has {A.shape[1]} columns, expected {self.n_features_in_}")
        return A @ self.coef_
