"""Unitary DFT utilities and the per-frequency transfer form of the convolution.

The transform is normalised by ``1/sqrt(T)`` so that it is an isometry::

    X~_j(w) = 1/sqrt(T) * sum_t X_jt exp(-i w t),   w = 2 pi m / T

The convolution used throughout the package is the machine-learning
(cross-correlation) convention ``Y_it = sum_j sum_s K_ijs X_j,(t+s) mod T``.
Under the unitary DFT it becomes a matrix product at every frequency,
``Y~(w) = H(w) X~(w)`` with ``H_ij(w) = sum_s K_ijs exp(+i w s)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "FreqGrid",
    "FreqSignal",
    "FreqTransfer",
    "dft_forward",
    "dft_inverse",
    "transfer_of_kernel",
]


@dataclass(frozen=True)
class FreqGrid:
    """Uniform grid of the ``T`` DFT angles ``2 pi m / T`` in ``[0, 2 pi)``."""

    T: int

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be a positive integer, got {self.T!r}")

    @cached_property
    def omegas(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.T) / self.T

    def __len__(self) -> int:
        return self.T


@dataclass(frozen=True)
class FreqSignal:
    """Row-wise DFT of a multichannel signal.

    Attributes
    ----------
    data : ndarray of shape (n, T)
        Column ``m`` holds the spectrum at ``grid.omegas[m]``.
    grid : FreqGrid
    """

    data: np.ndarray
    grid: FreqGrid

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] != self.grid.T:
            raise ValueError(
                f"data must have shape (n, {self.grid.T}), got {self.data.shape}"
            )

    def to_time(self) -> np.ndarray:
        return dft_inverse(self.data)


@dataclass(frozen=True)
class FreqTransfer:
    """Per-frequency transfer matrices of a multichannel circular convolution.

    Attributes
    ----------
    slices : ndarray of shape (T, n_y, n_x)
        ``slices[m]`` is ``H(omega_m)``.
    grid : FreqGrid
    """

    slices: np.ndarray
    grid: FreqGrid

    def __post_init__(self):
        if self.slices.ndim != 3 or self.slices.shape[0] != self.grid.T:
            raise ValueError(
                f"slices must have shape ({self.grid.T}, n_y, n_x), "
                f"got {self.slices.shape}"
            )

    @property
    def n_y(self) -> int:
        return self.slices.shape[1]

    @property
    def n_x(self) -> int:
        return self.slices.shape[2]

    def apply(self, X_freq: np.ndarray) -> np.ndarray:
        """Multiply ``H(w) X~(w)`` at every frequency; ``(n_x, T) -> (n_y, T)``."""
        X_freq = np.asarray(X_freq)
        if X_freq.shape != (self.n_x, self.grid.T):
            raise ValueError(
                f"expected spectrum of shape {(self.n_x, self.grid.T)}, got {X_freq.shape}"
            )
        return np.einsum("mij,jm->im", self.slices, X_freq)

    def apply_adjoint(self, Y_freq: np.ndarray) -> np.ndarray:
        """Multiply ``H(w)^H Y~(w)`` at every frequency; ``(n_y, T) -> (n_x, T)``."""
        Y_freq = np.asarray(Y_freq)
        if Y_freq.shape != (self.n_y, self.grid.T):
            raise ValueError(
                f"expected spectrum of shape {(self.n_y, self.grid.T)}, got {Y_freq.shape}"
            )
        return np.einsum("mij,im->jm", self.slices.conj(), Y_freq)


def dft_forward(x) -> np.ndarray:
    """Unitary DFT along the last axis.

    Parameters
    ----------
    x : array_like, shape (..., T)

    Returns
    -------
    ndarray of complex, shape (..., T)
    """
    x = np.asarray(x)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ValueError("dft_forward needs at least one sample along the last axis")
    return np.fft.fft(x, axis=-1, norm="ortho")


def dft_inverse(x_freq) -> np.ndarray:
    """Inverse (adjoint) of :func:`dft_forward` along the last axis."""
    x_freq = np.asarray(x_freq)
    if x_freq.ndim == 0 or x_freq.shape[-1] < 1:
        raise ValueError("dft_inverse needs at least one sample along the last axis")
    return np.fft.ifft(x_freq, axis=-1, norm="ortho")


def transfer_of_kernel(K, T: int) -> FreqTransfer:
    """Per-frequency transfer matrices ``H(w_m) = sum_s K[:, :, s] exp(+i w_m s)``.

    Parameters
    ----------
    K : array_like, shape (n_y, n_x, k)
        Convolution kernel with ``k <= T``.
    T : int
        Signal length.

    Returns
    -------
    FreqTransfer
        Transfer whose action on ``dft_forward(X)`` equals the DFT of the
        circular (correlation-convention) convolution of ``K`` with ``X``.
    """
    K = np.asarray(K)
    if K.ndim != 3:
        raise ValueError(f"kernel must have shape (n_y, n_x, k), got {K.shape}")
    grid = FreqGrid(T)
    k = K.shape[2]
    if k > T:
        raise ValueError(f"kernel width k={k} exceeds signal length T={T}")
    # ifft carries exp(+i w s) / T; undo the 1/T.
    H = np.fft.ifft(K, n=T, axis=-1) * T
    return FreqTransfer(np.ascontiguousarray(np.moveaxis(H, -1, 0)), grid)
