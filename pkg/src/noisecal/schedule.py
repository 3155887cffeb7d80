"""Diffusion noise schedules and timestep subsequence selection.

Timesteps are 1-based: t runs over 1..T, and index 0 of the cumulative
product array is the identity (no noise) level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class NoiseSchedule:
    """Cumulative signal-retention curve of a forward noising process.

    alpha_bar[t] is the product of per-step retention factors through step t,
    with alpha_bar[0] == 1.  Monotone decrease guarantees every query below
    is well defined (all square roots of positive quantities).
    """

    alpha_bar: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.alpha_bar, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 2:
            raise ValueError("alpha_bar must be a 1-D array of length T+1 with T >= 1")
        if arr[0] != 1.0:
            raise ValueError(f"alpha_bar[0] must be exactly 1, got {arr[0]}")
        if not np.all(np.diff(arr) < 0):
            raise ValueError("alpha_bar must be strictly decreasing")
        if not 0.0 < arr[-1] < 1.0:
            raise ValueError(f"alpha_bar[T] must lie in (0, 1), got {arr[-1]}")
        arr.flags.writeable = False
        object.__setattr__(self, "alpha_bar", arr)

    @property
    def num_steps(self) -> int:
        return self.alpha_bar.shape[0] - 1

    def _check_t(self, t: int, low: int = 1) -> None:
        if not isinstance(t, (int, np.integer)):
            raise ValueError(f"timestep must be an integer, got {t!r}")
        if not low <= t <= self.num_steps:
            raise ValueError(f"timestep {t} outside [{low}, {self.num_steps}]")

    def signal_scale(self, t: int) -> float:
        """sqrt(alpha_bar[t]), coefficient of the clean signal at level t."""
        self._check_t(t, low=0)
        return float(np.sqrt(self.alpha_bar[t]))

    def noise_scale(self, t: int) -> float:
        """sqrt(1 - alpha_bar[t]), coefficient of the unit noise at level t."""
        self._check_t(t, low=0)
        return float(np.sqrt(1.0 - self.alpha_bar[t]))

    def alpha(self, t: int) -> float:
        """Per-step retention factor alpha_bar[t] / alpha_bar[t-1]."""
        self._check_t(t)
        return float(self.alpha_bar[t] / self.alpha_bar[t - 1])


def linear_beta_schedule(
    num_steps: int = 1000,
    beta_start: float = 1e-4,
    beta_end: float = 0.02,
) -> NoiseSchedule:
    """Schedule whose per-step noise rates interpolate linearly.

    beta[t] runs from beta_start at t=1 to beta_end at t=T;
    alpha_bar[t] = prod_{s<=t} (1 - beta[s]).
    """
    if num_steps < 1:
        raise ValueError(f"num_steps must be >= 1, got {num_steps}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ValueError(
            f"need 0 < beta_start <= beta_end < 1, got ({beta_start}, {beta_end})"
        )
    if num_steps == 1:
        betas = np.array([beta_start], dtype=np.float64)
    else:
        betas = np.linspace(beta_start, beta_end, num_steps, dtype=np.float64)
    alpha_bar = np.concatenate(([1.0], np.cumprod(1.0 - betas)))
    return NoiseSchedule(alpha_bar=alpha_bar)


# Strictly decreasing timesteps, each in [1, T]; may be empty.
TimestepGrid = list[int]


def ddim_grid(schedule: NoiseSchedule, num_steps: int, t0: int) -> TimestepGrid:
    """Decreasing subsequence of timesteps for accelerated sampling.

    Builds the evenly spaced grid round(i * T / num_steps) for i = 1..num_steps
    (integer-exact rounding), deduplicates, keeps only entries <= t0, and
    returns them in decreasing order.  Empty iff t0 falls below the first
    grid point; sampling then has nothing to do.
    """
    big_t = schedule.num_steps
    if not 1 <= num_steps <= big_t:
        raise ValueError(f"num_steps must be in [1, {big_t}], got {num_steps}")
    if not 0 <= t0 <= big_t:
        raise ValueError(f"t0 must be in [0, {big_t}], got {t0}")
    grid: list[int] = []
    for i in range(1, num_steps + 1):
        # round(i*T/n) without float roundoff, ties away from zero
        t = (2 * i * big_t + num_steps) // (2 * num_steps)
        if t > t0:
            break
        if not grid or grid[-1] != t:
            grid.append(t)
    grid.reverse()
    return grid
