"""Ridge deconvolution: exact solvers, AMP, asymptotic error theory and a Monte-Carlo harness."""

from .amp import (
    AlphaSolution,
    AMPResult,
    Denoiser,
    StateEvolutionDivergence,
    StateEvolutionTrace,
    amp_general,
    amp_ridge,
    lambda_of_alpha,
    linear_denoiser,
    se_iterate,
    se_ridge_fixed_point,
    soft_threshold_denoiser,
    solve_alpha,
    stability_check,
)
from .dft import FreqGrid, FreqSignal, FreqTransfer, dft_forward, dft_inverse, transfer_of_kernel
from .estimators import AMPRidge, ConvolutionalRidge
from .signal_model import (
    AR1,
    AR1Density,
    ConfigError,
    ConstantDensity,
    IidComplexGaussian,
    ModelConfig,
    TabulatedDensity,
    convolve,
    empirical_spectrum,
    forward_model,
    sample_complex_normal,
    sample_kernel,
    sample_noise,
    sample_signal,
    spectral_density,
)
from .solvers import RidgeSolution, nmse, ridge_freq, ridge_time_oracle
from .theory import (
    AsymptoticPrediction,
    empirical_w2_1d,
    pointwise_mse,
    predict_joint_moments,
    predict_mse,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaSolution",
    "AMPResult",
    "Denoiser",
    "StateEvolutionDivergence",
    "StateEvolutionTrace",
    "amp_general",
    "amp_ridge",
    "lambda_of_alpha",
    "linear_denoiser",
    "se_iterate",
    "se_ridge_fixed_point",
    "soft_threshold_denoiser",
    "solve_alpha",
    "stability_check",
    "AR1",
    "AR1Density",
    "ConfigError",
    "ConstantDensity",
    "IidComplexGaussian",
    "ModelConfig",
    "TabulatedDensity",
    "convolve",
    "empirical_spectrum",
    "forward_model",
    "sample_complex_normal",
    "sample_kernel",
    "sample_noise",
    "sample_signal",
    "spectral_density",
    "AsymptoticPrediction",
    "empirical_w2_1d",
    "pointwise_mse",
    "predict_joint_moments",
    "predict_mse",
    "FreqGrid",
    "FreqSignal",
    "FreqTransfer",
    "dft_forward",
    "dft_inverse",
    "transfer_of_kernel",
    "AMPRidge",
    "ConvolutionalRidge",
    "RidgeSolution",
    "nmse",
    "ridge_freq",
    "ridge_time_oracle",
]
