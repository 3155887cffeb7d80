"""Reference-guided diffusion enhancement with fixed-point noise calibration."""

from .calibration import (
    CalibrationConfig,
    CalibrationTrace,
    TraceEntry,
    calibrate_noise,
    nc_sdedit,
    replace_low_freq,
)
from .denoiser import ConstantDenoiser, CountingDenoiser, Denoiser, GmmDenoiser, gmm_posterior_mean
from .diffusion import (
    SamplerConfig,
    ddim_step,
    ddpm_chain,
    ddpm_step,
    denoise_from,
    estimate_x0,
    forward_noise,
    sdedit_init,
)
from .frequency import FrequencyMask, content_objective, frequency_mask, high_pass, low_pass
from .metrics import MetricReport, d_sf, metric_report, mse, mse_low, spatial_frequency, ssim
from .schedule import NoiseSchedule, TimestepGrid, ddim_grid, linear_beta_schedule
from .tensor import (
    NonFiniteError,
    NumericError,
    RngSeed,
    VideoTensor,
    as_video,
    axpy,
    gaussian_noise,
    l2_norm,
)
from .toy import (
    band_limited_field,
    blurred,
    empirical_denoiser,
    toy_benchmark,
    toy_dataset,
    toy_schedule,
)
from .vio import (
    PnmFormatError,
    TensorFormatError,
    read_pnm,
    read_tensor,
    read_video,
    write_pnm,
    write_tensor,
    write_video,
)

__all__ = [
    "CalibrationConfig",
    "CalibrationTrace",
    "ConstantDenoiser",
    "CountingDenoiser",
    "Denoiser",
    "FrequencyMask",
    "GmmDenoiser",
    "MetricReport",
    "NoiseSchedule",
    "NonFiniteError",
    "NumericError",
    "PnmFormatError",
    "RngSeed",
    "SamplerConfig",
    "TensorFormatError",
    "TimestepGrid",
    "TraceEntry",
    "VideoTensor",
    "as_video",
    "axpy",
    "band_limited_field",
    "blurred",
    "calibrate_noise",
    "content_objective",
    "d_sf",
    "ddim_grid",
    "ddim_step",
    "ddpm_chain",
    "ddpm_step",
    "denoise_from",
    "empirical_denoiser",
    "estimate_x0",
    "forward_noise",
    "frequency_mask",
    "gaussian_noise",
    "gmm_posterior_mean",
    "high_pass",
    "l2_norm",
    "linear_beta_schedule",
    "low_pass",
    "metric_report",
    "mse",
    "mse_low",
    "nc_sdedit",
    "read_pnm",
    "read_tensor",
    "read_video",
    "replace_low_freq",
    "sdedit_init",
    "spatial_frequency",
    "ssim",
    "toy_benchmark",
    "toy_dataset",
    "toy_schedule",
    "write_pnm",
    "write_tensor",
    "write_video",
]
