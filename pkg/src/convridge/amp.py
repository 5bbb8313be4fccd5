"""Approximate message passing for (complex) linear models.

General AMP with a componentwise denoiser ``eta_t``::

    z^t     = y - A x^t + (1/delta) z^{t-1} <eta'_{t-1}(A^H z^{t-1} + x^{t-1})>
    x^{t+1} = eta_t(A^H z^t + x^t)

with ``x^0 = 0`` and ``z^{-1} = 0``. A linear denoiser ``eta(r) = alpha r``
turns the iteration into a ridge solver whose penalty is
``lam = (1 - alpha)(1 - alpha/delta) / alpha``. Its scalar state evolution
``tau_{t+1}^2 = sigma^2 + ((1-alpha)^2 sigma_x^2 + alpha^2 tau_t^2) / delta``
has a closed-form fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "AlphaSolution",
    "StateEvolutionTrace",
    "Denoiser",
    "AMPResult",
    "StateEvolutionDivergence",
    "solve_alpha",
    "lambda_of_alpha",
    "stability_check",
    "amp_state_matrix",
    "se_ridge_fixed_point",
    "se_iterate",
    "linear_denoiser",
    "soft_threshold_denoiser",
    "amp_general",
    "amp_ridge",
]


class StateEvolutionDivergence(ValueError):
    """The ridge state evolution has no attracting fixed point (``alpha**2 >= delta``)."""


# ----------------------------------------------------------------------------
# alpha <-> lambda algebra
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class AlphaSolution:
    """Both roots of ``lam = (1 - a)(1 - a/delta) / a`` with stability flags."""

    alpha_small: float
    alpha_large: float
    stable_small: bool
    stable_large: bool
    lam: float
    delta: float

    @property
    def alpha(self) -> float:
        """The root that AMP converges with."""
        return self.alpha_small


def lambda_of_alpha(alpha, delta):
    """Ridge penalty reached by the fixed point of AMP with ``eta(r) = alpha r``."""
    alpha = np.asarray(alpha, dtype=float)
    return (1.0 - alpha) * (1.0 - alpha / delta) / alpha


def solve_alpha(lam: float, delta: float) -> AlphaSolution:
    """Solve ``a**2 - (1 + delta + delta lam) a + delta = 0`` for both positive roots.

    For ``lam >= 0`` the roots are real and satisfy
    ``0 < a_small <= min(1, delta) <= max(1, delta) <= a_large``.
    """
    if not lam >= 0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta!r}")
    b = 1.0 + delta + delta * lam
    # b^2 - 4 delta expanded into nonnegative terms (no cancellation near delta = 1)
    disc = (1.0 - delta) ** 2 + 2.0 * delta * lam * (1.0 + delta) + (delta * lam) ** 2
    large = 0.5 * (b + math.sqrt(disc))
    # product of roots is delta; avoids cancellation in the small root
    small = delta / large
    return AlphaSolution(
        alpha_small=small,
        alpha_large=large,
        stable_small=stability_check(small, delta),
        stable_large=stability_check(large, delta),
        lam=float(lam),
        delta=float(delta),
    )


def stability_check(alpha: float, delta: float, rtol: float = 1e-12) -> bool:
    """True iff ``|alpha| <= min(1, delta)``, up to a relative rounding slack ``rtol``."""
    bound = min(1.0, delta)
    return bool(abs(alpha) <= bound * (1.0 + rtol))


def amp_state_matrix(A, alpha: float, delta: float) -> np.ndarray:
    """Transition matrix of ridge AMP on the state ``(x^t, z^{t-1})``.

    Eliminating ``z^t`` gives ``x^{t+1} = alpha (I - A^H A) x^t +
    (alpha^2/delta) A^H z^{t-1} + const`` and ``z^t = -A x^t +
    (alpha/delta) z^{t-1} + y``.
    """
    A = np.asarray(A)
    n_y, n_x = A.shape
    Ah = A.conj().T
    top = np.hstack([alpha * (np.eye(n_x) - Ah @ A), (alpha**2 / delta) * Ah])
    bottom = np.hstack([-A, (alpha / delta) * np.eye(n_y)])
    return np.vstack([top, bottom])


# ----------------------------------------------------------------------------
# state evolution
# ----------------------------------------------------------------------------


def se_ridge_fixed_point(alpha, delta, sigma2, sigma_x2):
    """Fixed point of the ridge state evolution.

    ``tau^2 = (sigma^2 + (1 - alpha)^2 sigma_x^2 / delta) / (1 - alpha^2 / delta)``.
    Vectorises over ``sigma_x2``.

    Raises
    ------
    StateEvolutionDivergence
        If ``alpha**2 >= delta``.
    """
    if alpha * alpha >= delta:
        raise StateEvolutionDivergence(
            f"state evolution diverges: alpha^2={alpha * alpha:g} >= delta={delta:g}"
        )
    sigma_x2 = np.asarray(sigma_x2, dtype=float)
    tau2 = (sigma2 + (1.0 - alpha) ** 2 * sigma_x2 / delta) / (1.0 - alpha * alpha / delta)
    return tau2 if tau2.ndim else float(tau2)


@dataclass
class StateEvolutionTrace:
    taus2: list[float]
    tau2_fixed: float
    converged: bool
    iterations: int


def se_iterate(
    alpha: float,
    delta: float,
    sigma2: float,
    sigma_x2: float,
    tau0_2: float = 0.0,
    t_max: int = 100_000,
    tol: float = 1e-15,
) -> StateEvolutionTrace:
    """Run the ridge state-evolution recursion from ``tau0_2``.

    Stops when ``|tau_{t+1}^2 - tau_t^2| <= tol * max(1, tau_{t+1}^2)`` or when the
    iterate blows past ``1e300``. Divergence is reported through
    ``converged=False``; ``tau2_fixed`` is then the last finite iterate.
    """
    taus = [float(tau0_2)]
    signal_term = (1.0 - alpha) ** 2 * sigma_x2 / delta
    gain = alpha * alpha / delta
    converged = False
    for _ in range(t_max):
        nxt = sigma2 + signal_term + gain * taus[-1]
        if not math.isfinite(nxt) or nxt > 1e300:
            break
        taus.append(nxt)
        if abs(nxt - taus[-2]) <= tol * max(1.0, abs(nxt)):
            converged = True
            break
    return StateEvolutionTrace(
        taus2=taus, tau2_fixed=taus[-1], converged=converged, iterations=len(taus) - 1
    )


# ----------------------------------------------------------------------------
# AMP iterations
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Denoiser:
    """Componentwise denoiser ``eta(r, t)`` and its derivative ``eta_prime(r, t)``.

    ``eta_prime`` may return an array (averaged for the Onsager term) or a
    scalar that is used as the average directly.
    """

    eta: Callable[[np.ndarray, int], np.ndarray]
    eta_prime: Callable[[np.ndarray, int], np.ndarray | float]
    name: str = "denoiser"


def linear_denoiser(alpha: float) -> Denoiser:
    return Denoiser(lambda r, t: alpha * r, lambda r, t: alpha, name=f"linear({alpha:g})")


def soft_threshold_denoiser(theta: float) -> Denoiser:
    """Soft threshold ``sign(r) max(|r| - theta, 0)``; derivative is ``1{|r| > theta}``.

    The derivative is the real one, so use it with real-valued problems.
    """

    def eta(r, t):
        mag = np.abs(r)
        return r * np.maximum(1.0 - theta / np.maximum(mag, 1e-300), 0.0)

    def eta_prime(r, t):
        return (np.abs(r) > theta).astype(float)

    return Denoiser(eta, eta_prime, name=f"soft({theta:g})")


@dataclass
class AMPResult:
    """Outcome of an AMP run.

    ``history`` holds ``x^1, x^2, ...`` when requested; ``norms[t]`` is
    ``||x^t||`` starting from ``x^0 = 0``.
    """

    x: np.ndarray
    z: np.ndarray
    converged: bool
    diverged: bool
    iterations: int
    norms: list[float] = field(default_factory=list)
    history: list[np.ndarray] | None = None

    @property
    def stable(self) -> bool:
        return not self.diverged


def amp_general(
    A,
    y,
    denoiser: Denoiser,
    delta: float | None = None,
    t_max: int = 2000,
    tol: float = 1e-10,
    damping: float = 0.0,
    keep_history: bool = False,
    growth_window: int = 50,
    growth_factor: float = 10.0,
) -> AMPResult:
    """Run AMP with Onsager correction.

    Parameters
    ----------
    A : ndarray of shape (n_y, n_x)
        Measurement matrix (real or complex). Adjoints are conjugate transposes.
    y : ndarray of shape (n_y,)
    denoiser : Denoiser
    delta : float, optional
        Measurement ratio; defaults to ``n_y / n_x``.
    t_max, tol : int, float
        Stop after ``t_max`` updates or when
        ``||x^{t+1} - x^t|| <= tol * ||x^{t+1}||``.
    damping : float
        Convex damping of the ``x`` update, ``0`` disables it.
    keep_history : bool
        Store every iterate in ``result.history``.
    growth_window, growth_factor
        Divergence is declared if ``||x^t|| > growth_factor * ||x^{t-growth_window}||``
        or any iterate is non-finite.
    """
    A = np.asarray(A)
    y = np.asarray(y)
    n_y, n_x = A.shape
    if y.shape != (n_y,):
        raise ValueError(f"y must have shape ({n_y},), got {y.shape}")
    if delta is None:
        delta = n_y / n_x
    dtype = np.result_type(A, y, float)
    Ah = A.conj().T

    x = np.zeros(n_x, dtype=dtype)
    z_prev = np.zeros(n_y, dtype=dtype)
    onsager = 0.0
    norms = [0.0]
    history = [] if keep_history else None
    converged = diverged = False
    t = 0
    for t in range(t_max):
        z = y - A @ x + (onsager / delta) * z_prev
        r = Ah @ z + x
        x_new = denoiser.eta(r, t)
        if damping:
            x_new = (1.0 - damping) * x_new + damping * x
        onsager = np.mean(denoiser.eta_prime(r, t))
        step = np.linalg.norm(x_new - x)
        nrm = np.linalg.norm(x_new)
        x, z_prev = x_new, z
        norms.append(nrm)
        if keep_history:
            history.append(x.copy())
        if not np.isfinite(nrm):
            diverged = True
            break
        if step <= tol * nrm:
            converged = True
            break
        past = len(norms) - 1 - growth_window
        if past >= 1 and nrm > growth_factor * norms[past]:
            diverged = True
            break
    return AMPResult(
        x=x, z=z_prev, converged=converged, diverged=diverged,
        iterations=t + 1, norms=norms, history=history,
    )


def amp_ridge(
    A,
    y,
    alpha: float,
    delta: float | None = None,
    t_max: int = 2000,
    tol: float = 1e-10,
    **kwargs,
) -> AMPResult:
    """AMP with the linear denoiser ``eta(r) = alpha r``.

    A converged run returns the ridge solution
    ``(A^H A + lam I)^{-1} A^H y`` with ``lam = lambda_of_alpha(alpha, delta)``.
    Only ``alpha <= min(1, delta)`` gives a stable iteration; the larger root
    of :func:`solve_alpha` shows up as ``diverged=True``.
    """
    return amp_general(A, y, linear_denoiser(alpha), delta=delta, t_max=t_max, tol=tol, **kwargs)
