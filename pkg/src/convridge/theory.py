"""Asymptotic error of convolutional ridge regression.

At every frequency the Fourier-domain problem is an ordinary complex ridge
regression whose signal has variance ``g(w)``. With ``alpha`` the stable
root for ``(lam, delta)`` the per-frequency error is

    (alpha - 1)^2 g + alpha^2 tau^2(g),
    tau^2(g) = (sigma^2 + (1 - alpha)^2 g / delta) / (1 - alpha^2 / delta),

and the time-domain mean squared error per entry is its average over
``w`` uniform on ``[0, 2 pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amp import StateEvolutionDivergence, se_ridge_fixed_point, solve_alpha
from .signal_model import ConstantDensity, SpectralDensity

__all__ = [
    "AsymptoticPrediction",
    "tau2_of_g",
    "pointwise_mse",
    "predict_mse",
    "predict_joint_moments",
    "empirical_w2_1d",
    "TAU2_FORMS",
]

# "recursion": fixed point of the state-evolution recursion.
# "one_minus_alpha_sq": the (1 - alpha^2) variant, kept only so the two can be
# compared against simulation.
TAU2_FORMS = ("recursion", "one_minus_alpha_sq")


def tau2_of_g(alpha, delta, sigma2, g, tau2_form: str = "recursion"):
    """Effective noise level ``tau^2`` for signal variance ``g`` (vectorised over ``g``)."""
    if tau2_form == "recursion":
        return se_ridge_fixed_point(alpha, delta, sigma2, g)
    if tau2_form == "one_minus_alpha_sq":
        if alpha * alpha >= delta:
            raise StateEvolutionDivergence(
                f"state evolution diverges: alpha^2={alpha * alpha:g} >= delta={delta:g}"
            )
        g = np.asarray(g, dtype=float)
        out = (sigma2 + (1.0 - alpha * alpha) * g / delta) / (1.0 - alpha * alpha / delta)
        return out if out.ndim else float(out)
    raise ValueError(f"unknown tau2_form {tau2_form!r}; expected one of {TAU2_FORMS}")


def pointwise_mse(alpha, delta, sigma2, g, tau2_form: str = "recursion"):
    """Per-frequency asymptotic error ``(alpha - 1)^2 g + alpha^2 tau^2(g)``."""
    tau2 = tau2_of_g(alpha, delta, sigma2, g, tau2_form)
    out = (alpha - 1.0) ** 2 * np.asarray(g, dtype=float) + alpha * alpha * np.asarray(tau2)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Predicted error of ridge deconvolution.

    Attributes
    ----------
    alpha : float
        Stable AMP scale for the effective penalty.
    omegas, g_values, tau2_of_omega : ndarray
        Quadrature nodes and the tabulated ``g`` and ``tau^2`` on them.
    mse : float
        Predicted ``||X_hat - X||_F^2 / (n_x T)``.
    nmse : float
        ``mse / c0``.
    c0 : float
        Signal variance ``(1/2pi) * integral g``.
    quadrature_points : int
    """

    alpha: float
    omegas: np.ndarray
    g_values: np.ndarray
    tau2_of_omega: np.ndarray
    mse: float
    nmse: float
    c0: float
    quadrature_points: int


def _effective(lam, sigmaK2):
    # H = sigmaK * A with A ~ CN(0, 1/n_y): rescale to the unit-kernel problem
    return lam / sigmaK2


def predict_mse(
    lam: float,
    delta: float,
    sigma2: float,
    g: SpectralDensity,
    n_quad: int = 4096,
    sigmaK2: float = 1.0,
    tau2_form: str = "recursion",
) -> AsymptoticPrediction:
    """Asymptotic (N)MSE of ridge deconvolution for a process with density ``g``.

    The error integrand is averaged with the periodic trapezoid rule on
    ``n_quad`` uniform nodes of ``[0, 2 pi)``, i.e. ``(1/2pi) * integral``.
    ``sigmaK2 != 1`` is handled by the exact rescaling
    ``lam -> lam / sigmaK2``, ``g -> sigmaK2 g``, ``mse -> mse / sigmaK2``.
    """
    if not lam >= 0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    if n_quad < 1:
        raise ValueError("n_quad must be >= 1")
    alpha = solve_alpha(_effective(lam, sigmaK2), delta).alpha_small
    if isinstance(g, ConstantDensity):
        omegas = np.zeros(1)
        gv = np.array([float(g.c0)])
    else:
        omegas = 2.0 * np.pi * np.arange(n_quad) / n_quad
        gv = np.asarray(g(omegas), dtype=float)
    if np.any(gv < 0):
        raise ValueError("spectral density must be nonnegative")
    tau2 = np.asarray(tau2_of_g(alpha, delta, sigma2, sigmaK2 * gv, tau2_form)) / sigmaK2
    integrand = (alpha - 1.0) ** 2 * gv + alpha * alpha * tau2
    mse = float(np.mean(integrand))
    c0 = float(np.mean(gv))
    if isinstance(g, ConstantDensity):
        omegas = 2.0 * np.pi * np.arange(n_quad) / n_quad
        gv = np.full(n_quad, gv[0])
        tau2 = np.full(n_quad, tau2[0])
    return AsymptoticPrediction(
        alpha=alpha,
        omegas=omegas,
        g_values=gv,
        tau2_of_omega=tau2,
        mse=mse,
        nmse=mse / c0 if c0 > 0 else float("nan"),
        c0=c0,
        quadrature_points=n_quad,
    )


def predict_joint_moments(lam, delta, sigma2, g_omega, sigmaK2: float = 1.0):
    """Predicted ``E[X_hat conj(X0)]`` and ``E|X_hat|^2`` at a frequency with density ``g_omega``.

    From ``X_hat = alpha (X0 + tau Z)`` with ``X0 ~ CN(0, g)``, ``Z ~ CN(0, 1)``:
    ``(alpha g, alpha^2 (g + tau^2))``.
    """
    alpha = solve_alpha(_effective(lam, sigmaK2), delta).alpha_small
    g = np.asarray(g_omega, dtype=float)
    tau2 = np.asarray(tau2_of_g(alpha, delta, sigma2, sigmaK2 * g)) / sigmaK2
    cross = alpha * g
    second = alpha * alpha * (g + tau2)
    if cross.ndim == 0:
        return float(cross), float(second)
    return cross, second


def empirical_w2_1d(samples_a, samples_b) -> float:
    """Wasserstein-2 distance between two equal-size 1-D samples (sorted coupling)."""
    a = np.sort(np.asarray(samples_a, dtype=float).ravel())
    b = np.sort(np.asarray(samples_b, dtype=float).ravel())
    if a.shape != b.shape:
        raise ValueError(f"sample sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("empty samples")
    return float(np.sqrt(np.mean((a - b) ** 2)))
