"""Statistical model of the convolutional measurement ``Y = K * X + Xi``.

Shapes used throughout:

* signal ``X``: complex ``(n_x, T)``, one row per input channel
* kernel ``K``: complex ``(n_y, n_x, k)``
* measurement / noise: complex ``(n_y, T)``

Spectral densities are normalised as ``g(w) = sum_t c_t exp(-i w t)`` so a
white process has ``g == c_0`` and ``(1/2pi) * integral g = c_0``.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Union

import numpy as np
from scipy.signal import lfilter

from .dft import FreqGrid, dft_forward, dft_inverse, transfer_of_kernel

__all__ = [
    "ConfigError",
    "ModelConfig",
    "IidComplexGaussian",
    "AR1",
    "ConstantDensity",
    "AR1Density",
    "TabulatedDensity",
    "sample_complex_normal",
    "sample_kernel",
    "sample_noise",
    "sample_signal",
    "convolve",
    "forward_model",
    "spectral_density",
    "empirical_spectrum",
    "ar1_burn_in",
    "load_config",
    "parse_config_text",
    "process_from_config",
    "CONFIG_KEYS",
]


class ConfigError(ValueError):
    """Invalid model configuration or configuration file."""


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions, variances and ridge penalty of one convolutional problem.

    ``sigmaK2`` is the kernel scale; individual kernel taps have variance
    ``sigmaK2 / (k * n_y)``.
    """

    n_x: int
    n_y: int
    T: int
    k: int
    sigma2: float = 0.0
    sigmaK2: float = 1.0
    lam: float = 0.0

    def __post_init__(self):
        for name in ("n_x", "n_y", "T", "k"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.k > self.T:
            raise ConfigError(f"kernel width k={self.k} exceeds T={self.T}")
        if not self.sigma2 >= 0:
            raise ConfigError(f"sigma2 must be >= 0, got {self.sigma2!r}")
        if not self.sigmaK2 > 0:
            raise ConfigError(f"sigmaK2 must be > 0, got {self.sigmaK2!r}")
        if not self.lam >= 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam!r}")

    @property
    def delta(self) -> float:
        return self.n_y / self.n_x

    @property
    def beta(self) -> float:
        return self.k / self.T

    def replace(self, **changes) -> "ModelConfig":
        return replace(self, **changes)


# ----------------------------------------------------------------------------
# processes and spectral densities
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class IidComplexGaussian:
    """Rows with i.i.d. ``CN(0, var)`` entries."""

    var: float

    def __post_init__(self):
        if not self.var > 0:
            raise ConfigError(f"process variance must be > 0, got {self.var!r}")


@dataclass(frozen=True)
class AR1:
    """Real AR(1) rows ``x_t = a x_{t-1} + xi_t`` embedded as complex signals.

    ``innovation`` is ``"gaussian"`` (``xi ~ N(0, innovation_var)``) or
    ``"rademacher"`` (``xi`` uniform on ``{-s, s}``, ``s**2 = innovation_var``).
    """

    a: float
    innovation_var: float
    innovation: str = "gaussian"

    def __post_init__(self):
        if not abs(self.a) < 1:
            raise ConfigError(f"AR(1) needs |a| < 1 for stationarity, got a={self.a!r}")
        if not self.innovation_var > 0:
            raise ConfigError(
                f"innovation variance must be > 0, got {self.innovation_var!r}"
            )
        if self.innovation not in ("gaussian", "rademacher"):
            raise ConfigError(
                f"innovation must be 'gaussian' or 'rademacher', got {self.innovation!r}"
            )

    @property
    def var(self) -> float:
        return self.innovation_var / (1.0 - self.a**2)

    def autocorrelation(self, lag) -> np.ndarray:
        return self.var * self.a ** np.abs(np.asarray(lag))


ProcessSpec = Union[IidComplexGaussian, AR1]


@dataclass(frozen=True)
class ConstantDensity:
    c0: float

    @property
    def variance(self) -> float:
        return self.c0

    def __call__(self, omega) -> np.ndarray:
        return np.full(np.shape(omega), float(self.c0))


@dataclass(frozen=True)
class AR1Density:
    """``g(w) = v / (1 - 2 a cos w + a**2)``."""

    a: float
    innovation_var: float

    @property
    def variance(self) -> float:
        return self.innovation_var / (1.0 - self.a**2)

    def __call__(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float)
        return self.innovation_var / (1.0 - 2.0 * self.a * np.cos(omega) + self.a**2)


@dataclass(frozen=True)
class TabulatedDensity:
    """Density sampled on a grid of ``[0, 2 pi)``; linear, periodic interpolation."""

    omegas: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if np.shape(self.omegas) != np.shape(self.values) or np.ndim(self.omegas) != 1:
            raise ValueError("omegas and values must be 1-D arrays of equal length")
        if np.any(np.asarray(self.values) < 0):
            raise ValueError("spectral density values must be nonnegative")

    @property
    def variance(self) -> float:
        # uniform grid: periodic trapezoid = arithmetic mean
        return float(np.mean(self.values))

    def __call__(self, omega) -> np.ndarray:
        omega = np.mod(np.asarray(omega, dtype=float), 2 * np.pi)
        return np.interp(omega, self.omegas, self.values, period=2 * np.pi)


SpectralDensity = Union[ConstantDensity, AR1Density, TabulatedDensity]


def spectral_density(spec: ProcessSpec) -> SpectralDensity:
    """Closed-form spectral density of a supported process."""
    if isinstance(spec, IidComplexGaussian):
        return ConstantDensity(spec.var)
    if isinstance(spec, AR1):
        return AR1Density(spec.a, spec.innovation_var)
    raise TypeError(f"unsupported process spec {spec!r}")


def empirical_spectrum(X) -> TabulatedDensity:
    """Row-averaged periodogram ``mean_i |X~_i(w_m)|**2``."""
    X = np.atleast_2d(np.asarray(X))
    if X.shape[0] < 1:
        raise ValueError("need at least one row")
    grid = FreqGrid(X.shape[1])
    values = np.mean(np.abs(dft_forward(X)) ** 2, axis=0)
    return TabulatedDensity(grid.omegas, values)


# ----------------------------------------------------------------------------
# sampling
# ----------------------------------------------------------------------------


def sample_complex_normal(rng: np.random.Generator, variance: float, size=None):
    """Draw circularly symmetric ``CN(0, variance)`` samples.

    Real and imaginary parts are independent ``N(0, variance / 2)``.
    """
    if not variance >= 0:
        raise ValueError(f"variance must be >= 0, got {variance!r}")
    scale = math.sqrt(variance / 2.0)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return scale * (re + 1j * im)


def sample_kernel(cfg: ModelConfig, rng: np.random.Generator) -> np.ndarray:
    """Kernel with i.i.d. ``CN(0, sigmaK2 / (k n_y))`` taps, shape ``(n_y, n_x, k)``."""
    var = cfg.sigmaK2 / (cfg.k * cfg.n_y)
    return sample_complex_normal(rng, var, (cfg.n_y, cfg.n_x, cfg.k))


def sample_noise(cfg: ModelConfig, rng: np.random.Generator) -> np.ndarray:
    """Measurement noise with i.i.d. ``CN(0, sigma2)`` entries, shape ``(n_y, T)``."""
    return sample_complex_normal(rng, cfg.sigma2, (cfg.n_y, cfg.T))


def ar1_burn_in(a: float) -> int:
    """Steps after which ``|a|**steps <= 1e-8``."""
    if a == 0:
        return 0
    return math.ceil(math.log(1e-8) / math.log(abs(a)))


def sample_signal(spec: ProcessSpec, n_x: int, T: int, rng: np.random.Generator) -> np.ndarray:
    """Signal matrix of shape ``(n_x, T)`` with independent rows drawn from ``spec``."""
    if isinstance(spec, IidComplexGaussian):
        return sample_complex_normal(rng, spec.var, (n_x, T))
    if isinstance(spec, AR1):
        burn = ar1_burn_in(spec.a)
        n = burn + T
        # Rademacher innovations are the signs of the Gaussian draws, so both
        # laws consume the generator identically and same-seed runs are paired
        z = rng.standard_normal((n_x, n))
        if spec.innovation == "rademacher":
            z = np.where(z >= 0, 1.0, -1.0)
        xi = math.sqrt(spec.innovation_var) * z
        x = lfilter([1.0], [1.0, -spec.a], xi, axis=1)
        return x[:, burn:].astype(complex)
    raise TypeError(f"unsupported process spec {spec!r}")


# ----------------------------------------------------------------------------
# forward model
# ----------------------------------------------------------------------------


def _check_shapes(K: np.ndarray, X: np.ndarray):
    if K.ndim != 3 or X.ndim != 2:
        raise ValueError(
            f"expected kernel (n_y, n_x, k) and signal (n_x, T), got {K.shape} and {X.shape}"
        )
    if K.shape[1] != X.shape[0]:
        raise ValueError(f"kernel has n_x={K.shape[1]} but signal has {X.shape[0]} rows")
    if K.shape[2] > X.shape[1]:
        raise ValueError(f"kernel width {K.shape[2]} exceeds signal length {X.shape[1]}")


def convolve(K, X, method: str = "auto") -> np.ndarray:
    """Circular multichannel convolution ``Y_it = sum_j sum_s K_ijs X_j,(t+s) mod T``.

    Parameters
    ----------
    K : array_like, shape (n_y, n_x, k)
    X : array_like, shape (n_x, T)
    method : {"auto", "direct", "fft"}
        ``"direct"`` evaluates the defining sum tap by tap; ``"fft"`` goes
        through the per-frequency transfer. ``"auto"`` uses the direct sum
        for narrow kernels.

    Returns
    -------
    ndarray of shape (n_y, T)
    """
    K = np.asarray(K)
    X = np.asarray(X)
    _check_shapes(K, X)
    k = K.shape[2]
    if method == "auto":
        method = "direct" if k <= 8 else "fft"
    if method == "direct":
        Y = np.zeros((K.shape[0], X.shape[1]), dtype=np.result_type(K, X, complex))
        for s in range(k):
            Y += K[:, :, s] @ np.roll(X, -s, axis=1)
        return Y
    if method == "fft":
        H = transfer_of_kernel(K, X.shape[1])
        return dft_inverse(H.apply(dft_forward(X)))
    raise ValueError(f"unknown method {method!r}")


def forward_model(cfg: ModelConfig, K, X, rng: np.random.Generator) -> np.ndarray:
    """Noisy measurement ``Y = K * X + Xi`` with ``Xi ~ CN(0, sigma2)`` entrywise."""
    K = np.asarray(K)
    X = np.asarray(X)
    if K.shape != (cfg.n_y, cfg.n_x, cfg.k) or X.shape != (cfg.n_x, cfg.T):
        raise ValueError(
            f"shapes {K.shape}, {X.shape} do not match config "
            f"{(cfg.n_y, cfg.n_x, cfg.k)}, {(cfg.n_x, cfg.T)}"
        )
    return convolve(K, X) + sample_noise(cfg, rng)


# ----------------------------------------------------------------------------
# config files
# ----------------------------------------------------------------------------

CONFIG_KEYS = (
    "n_x", "n_y", "T", "k", "sigma2", "sigmaK2", "lambda",
    "process.kind", "process.a", "process.var", "process.innovation",
    "seed", "trials",
)

_INT_KEYS = {"n_x", "n_y", "T", "k", "seed", "trials"}
_FLOAT_KEYS = {"sigma2", "sigmaK2", "lambda", "process.a", "process.var"}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines (``#`` comments allowed) into typed values.

    Unknown keys and malformed values raise :class:`ConfigError`.
    """
    parser = configparser.ConfigParser(
        delimiters=("=", ":"), comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw = dict(parser["config"])
    out = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key in _INT_KEYS:
                out[key] = int(value)
            elif key in _FLOAT_KEYS:
                out[key] = float(value)
            else:
                out[key] = value.strip().lower()
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if "seed" in out and not 0 <= out["seed"] < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if "trials" in out and out["trials"] < 1:
        raise ConfigError("trials must be >= 1")
    return out


def load_config(path) -> dict:
    """Read a flat key-value config file; see :data:`CONFIG_KEYS`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def process_from_config(values: dict, default: ProcessSpec | None = None) -> ProcessSpec:
    """Build a process spec from parsed ``process.*`` keys, falling back to ``default``."""
    kind = values.get("process.kind")
    if kind is None:
        if default is None:
            raise ConfigError("config does not define process.kind")
        if isinstance(default, AR1):
            return AR1(
                values.get("process.a", default.a),
                values.get("process.var", default.innovation_var),
                values.get("process.innovation", default.innovation),
            )
        return IidComplexGaussian(values.get("process.var", default.var))
    if kind in ("iid", "iid_gaussian", "iidcomplexgaussian"):
        if "process.var" not in values:
            raise ConfigError("process.var is required for an i.i.d. process")
        return IidComplexGaussian(values["process.var"])
    if kind == "ar1":
        missing = [k for k in ("process.a", "process.var") if k not in values]
        if missing:
            raise ConfigError(f"AR(1) process needs {', '.join(missing)}")
        return AR1(values["process.a"], values["process.var"],
                   values.get("process.innovation", "gaussian"))
    raise ConfigError(f"unknown process.kind {kind!r}")
