"""Exact ridge deconvolution.

``ridge_freq`` is the production path: the unitary DFT turns the problem

    argmin_X ||Y - K * X||_F^2 + lam ||X||_F^2

into ``T`` independent complex ridge regressions, one per frequency.
``ridge_time_oracle`` materialises the full time-domain operator and solves
the normal equations directly; it only exists to cross-check the fast path on
small problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .dft import FreqSignal, FreqTransfer, dft_forward
from .signal_model import convolve

__all__ = [
    "RidgeSolution",
    "ridge_freq",
    "ridge_time_oracle",
    "operator_matrix",
    "nmse",
    "ridge_objective",
    "ORACLE_MAX_UNKNOWNS",
]

ORACLE_MAX_UNKNOWNS = 4096


@dataclass(frozen=True)
class RidgeSolution:
    """Ridge estimate in time and frequency domain.

    Attributes
    ----------
    X_hat : ndarray of shape (n_x, T)
    X_hat_freq : FreqSignal
    per_freq_residual : ndarray of shape (T,)
        Relative stationarity residual
        ``||(H^H H + lam I) x - H^H y|| / ||H^H y||`` at each frequency.
    condition : ndarray of shape (T,)
        Cheap condition estimate of the factorised Gram matrix, from the
        spread of its Cholesky diagonal; ``inf`` where the minimum-norm
        fallback was needed.
    """

    X_hat: np.ndarray
    X_hat_freq: FreqSignal
    per_freq_residual: np.ndarray
    condition: np.ndarray


def _solve_one(H: np.ndarray, y: np.ndarray, lam: float):
    n_y, n_x = H.shape
    Hh = H.conj().T
    try:
        if n_x <= n_y:
            G = Hh @ H
            G[np.diag_indices_from(G)] += lam
            c, low = linalg.cho_factor(G, lower=True, check_finite=False)
            x = linalg.cho_solve((c, low), Hh @ y, check_finite=False)
        else:
            # dual (push-through) form; at lam=0 this is the minimum-norm solution
            G = H @ Hh
            G[np.diag_indices_from(G)] += lam
            c, low = linalg.cho_factor(G, lower=True, check_finite=False)
            x = Hh @ linalg.cho_solve((c, low), y, check_finite=False)
        d = np.abs(np.diag(c)) ** 2
        cond = float(d.max() / d.min())
    except linalg.LinAlgError:
        if lam > 0:
            raise
        x = linalg.lstsq(H, y, check_finite=False)[0]
        cond = np.inf
    return x, cond


def ridge_freq(H: FreqTransfer, Y, lam: float) -> RidgeSolution:
    """Solve the convolutional ridge problem frequency by frequency.

    Parameters
    ----------
    H : FreqTransfer
        Transfer of the known kernel (see :func:`convridge.dft.transfer_of_kernel`).
    Y : array_like, shape (n_y, T)
        Time-domain measurements.
    lam : float
        Ridge penalty ``>= 0``. With ``lam == 0`` and more unknowns than
        measurements per frequency the minimum-norm interpolant is returned.

    Returns
    -------
    RidgeSolution
    """
    if not lam >= 0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    Y = np.asarray(Y)
    T = H.grid.T
    if Y.shape != (H.n_y, T):
        raise ValueError(f"Y must have shape {(H.n_y, T)}, got {Y.shape}")
    Yf = dft_forward(Y)
    Xf = np.empty((H.n_x, T), dtype=complex)
    cond = np.empty(T)
    resid = np.empty(T)
    for m in range(T):
        Hm = H.slices[m]
        x, cond[m] = _solve_one(Hm, Yf[:, m], lam)
        Xf[:, m] = x
        rhs = Hm.conj().T @ Yf[:, m]
        r = Hm.conj().T @ (Hm @ x) + lam * x - rhs
        scale = np.linalg.norm(rhs)
        resid[m] = np.linalg.norm(r) / scale if scale > 0 else np.linalg.norm(r)
    X_freq = FreqSignal(Xf, H.grid)
    return RidgeSolution(X_freq.to_time(), X_freq, resid, cond)


def operator_matrix(K, T: int) -> np.ndarray:
    """Dense matrix ``C`` with ``vec(K * X) = C vec(X)`` (row-major ``vec``).

    Built column by column by convolving basis signals, so it inherits the
    exact convention of :func:`convridge.signal_model.convolve`.
    """
    K = np.asarray(K)
    n_y, n_x, _ = K.shape
    if n_x * T > ORACLE_MAX_UNKNOWNS:
        raise ValueError(
            f"oracle limited to n_x*T <= {ORACLE_MAX_UNKNOWNS}, got {n_x * T}"
        )
    C = np.empty((n_y * T, n_x * T), dtype=complex)
    E = np.zeros((n_x, T), dtype=complex)
    for j in range(n_x):
        for t in range(T):
            E[j, t] = 1.0
            C[:, j * T + t] = convolve(K, E, method="direct").ravel()
            E[j, t] = 0.0
    return C


def ridge_time_oracle(K, Y, lam: float) -> np.ndarray:
    """Ridge estimate from the materialised block-circulant operator.

    Solves ``(C^H C + lam I) x = C^H vec(Y)``; at ``lam == 0`` returns the
    minimum-norm least-squares solution. Limited to ``n_x * T <= 4096``.
    """
    if not lam >= 0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    K = np.asarray(K)
    Y = np.asarray(Y)
    n_y, n_x, _ = K.shape
    if Y.ndim != 2 or Y.shape[0] != n_y:
        raise ValueError(f"Y must have shape ({n_y}, T), got {Y.shape}")
    T = Y.shape[1]
    C = operator_matrix(K, T)
    y = Y.ravel()
    if lam > 0:
        A = C.conj().T @ C + lam * np.eye(n_x * T)
        x = linalg.solve(A, C.conj().T @ y, assume_a="her")
    else:
        x = linalg.lstsq(C, y)[0]
    return x.reshape(n_x, T)


def nmse(X_hat, X0) -> float:
    """Normalised squared error ``||X_hat - X0||_F^2 / ||X0||_F^2``."""
    X_hat = np.asarray(X_hat)
    X0 = np.asarray(X0)
    if X_hat.shape != X0.shape:
        raise ValueError(f"shape mismatch: {X_hat.shape} vs {X0.shape}")
    denom = np.vdot(X0, X0).real
    if denom == 0:
        raise ValueError("reference signal is identically zero")
    diff = X_hat - X0
    return float(np.vdot(diff, diff).real / denom)


def ridge_objective(K, X, Y, lam: float) -> float:
    """``||Y - K * X||_F^2 + lam ||X||_F^2``."""
    R = np.asarray(Y) - convolve(K, X)
    X = np.asarray(X)
    return float(np.vdot(R, R).real + lam * np.vdot(X, X).real)
