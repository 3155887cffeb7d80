"""Noise-prediction models with closed-form posteriors.

A denoiser maps a noisy tensor x_t at level t to the noise it believes was
added.  The two views, predicted noise eps and posterior clean estimate
E[x0 | x_t], are interchangeable through

    x_t = signal_scale(t) * E[x0 | x_t] + noise_scale(t) * eps,

so subclasses implement whichever is natural and inherit the other.
GmmDenoiser is the exact Bayes-optimal denoiser for a Gaussian-mixture data
distribution; with all component variances zero it is the optimal denoiser
for a finite dataset (the empirical denoiser).
"""

from __future__ import annotations

import abc
import json
import threading
from pathlib import Path

import numpy as np

from .schedule import NoiseSchedule
from .tensor import VideoTensor, _freeze, as_video


class Denoiser(abc.ABC):
    """Pure, shape-preserving noise predictor."""

    @abc.abstractmethod
    def predict_eps(self, x_t: VideoTensor, t: int, schedule: NoiseSchedule) -> VideoTensor:
        """Predicted noise at level t; same shape as x_t.  Requires t >= 1."""

    def posterior_mean(self, x_t: VideoTensor, t: int, schedule: NoiseSchedule) -> VideoTensor:
        """E[x0 | x_t], derived from predict_eps unless overridden."""
        eps = self.predict_eps(x_t, t, schedule)
        return _freeze((x_t - schedule.noise_scale(t) * eps) / schedule.signal_scale(t))


def _check_level(t: int, schedule: NoiseSchedule) -> None:
    schedule._check_t(t)  # rejects t outside [1, T]; t=0 has no noise to predict


class ConstantDenoiser(Denoiser):
    """Returns one fixed noise tensor regardless of input values.

    Test double: feeding the exact noise of a noised tensor back through a
    sampler recovers closed-form trajectories.
    """

    def __init__(self, fixed_eps: VideoTensor) -> None:
        self.fixed_eps = as_video(fixed_eps)

    def predict_eps(self, x_t: VideoTensor, t: int, schedule: NoiseSchedule) -> VideoTensor:
        _check_level(t, schedule)
        if x_t.shape != self.fixed_eps.shape:
            raise ValueError(f"shape mismatch: {x_t.shape} vs {self.fixed_eps.shape}")
        return self.fixed_eps


class GmmDenoiser(Denoiser):
    """Bayes-optimal denoiser for an isotropic Gaussian-mixture distribution.

    Components are (weight, mean tensor, scalar variance) triples; weights
    are normalized to sum to 1 at construction.
    """

    def __init__(self, components) -> None:
        components = list(components)
        if not components:
            raise ValueError("GmmDenoiser needs at least one component")
        weights = np.array([float(w) for w, _, _ in components], dtype=np.float64)
        if np.any(weights <= 0):
            raise ValueError("component weights must be positive")
        means = [as_video(m) for _, m, _ in components]
        shape = means[0].shape
        for i, m in enumerate(means):
            if m.shape != shape:
                raise ValueError(f"component {i} mean shape {m.shape} != {shape}")
        variances = np.array([float(v) for _, _, v in components], dtype=np.float64)
        if np.any(variances < 0):
            raise ValueError("component variances must be >= 0")
        self.weights = weights / weights.sum()
        self.means = np.stack(means)  # (n, F, C, H, W)
        self.variances = variances
        self.weights.flags.writeable = False
        self.means.flags.writeable = False
        self.variances.flags.writeable = False

    @classmethod
    def from_dataset(cls, dir_path) -> "GmmDenoiser":
        """Empirical denoiser over a frame directory.

        Each frame becomes a zero-variance component of shape (1, C, H, W)
        with weight 1/F; the result denoises single-frame tensors.
        """
        from .vio import read_video

        video = read_video(dir_path)
        n = video.shape[0]
        return cls([(1.0 / n, video[i : i + 1], 0.0) for i in range(n)])

    @classmethod
    def from_json_spec(cls, path) -> "GmmDenoiser":
        """Mixture from a JSON list of {weight, mean, variance} entries.

        "mean" is a tensor file path, resolved relative to the spec file.
        """
        from .vio import read_tensor

        path = Path(path)
        spec = json.loads(path.read_text())
        if not isinstance(spec, list) or not spec:
            raise ValueError(f"{path}: expected a nonempty JSON list of components")
        components = []
        for i, entry in enumerate(spec):
            unknown = set(entry) - {"weight", "mean", "variance"}
            if unknown:
                raise ValueError(f"{path}: component {i} has unknown keys {sorted(unknown)}")
            mean = read_tensor(path.parent / entry["mean"])
            components.append((entry["weight"], mean, entry.get("variance", 0.0)))
        return cls(components)

    def posterior_mean(self, x_t: VideoTensor, t: int, schedule: NoiseSchedule) -> VideoTensor:
        _check_level(t, schedule)
        if x_t.shape != self.means.shape[1:]:
            raise ValueError(f"shape mismatch: {x_t.shape} vs {self.means.shape[1:]}")
        abar = float(schedule.alpha_bar[t])
        root = np.sqrt(abar)
        # per-component marginal variance of x_t and residual from scaled mean
        s = abar * self.variances + (1.0 - abar)  # (n,)
        resid = x_t[None, ...] - root * self.means  # (n, F, C, H, W)
        sq = np.sum(resid * resid, axis=(1, 2, 3, 4))  # (n,)
        dim = x_t.size
        log_r = np.log(self.weights) - sq / (2.0 * s) - 0.5 * dim * np.log(s)
        log_r -= log_r.max()  # log-sum-exp shift keeps exp in range
        r = np.exp(log_r)
        r /= r.sum()
        gain = root * self.variances / s  # (n,) shrinkage toward each mean
        comp_means = self.means + gain[:, None, None, None, None] * resid
        out = np.tensordot(r, comp_means, axes=1)
        return _freeze(out)

    def predict_eps(self, x_t: VideoTensor, t: int, schedule: NoiseSchedule) -> VideoTensor:
        x0 = self.posterior_mean(x_t, t, schedule)
        return _freeze((x_t - schedule.signal_scale(t) * x0) / schedule.noise_scale(t))


def gmm_posterior_mean(
    d: GmmDenoiser, x_t: VideoTensor, t: int, schedule: NoiseSchedule
) -> VideoTensor:
    """Mixture posterior mean E[x0 | x_t] under the forward noising at level t."""
    return d.posterior_mean(x_t, t, schedule)


class CountingDenoiser(Denoiser):
    """Delegating wrapper that counts predict_eps invocations (thread-safe)."""

    def __init__(self, inner: Denoiser) -> None:
        self.inner = inner
        self._lock = threading.Lock()
        self._calls = 0

    @property
    def calls(self) -> int:
        return self._calls

    def predict_eps(self, x_t: VideoTensor, t: int, schedule: NoiseSchedule) -> VideoTensor:
        with self._lock:
            self._calls += 1
        return self.inner.predict_eps(x_t, t, schedule)

    def posterior_mean(self, x_t: VideoTensor, t: int, schedule: NoiseSchedule) -> VideoTensor:
        with self._lock:
            self._calls += 1
        return self.inner.posterior_mean(x_t, t, schedule)
