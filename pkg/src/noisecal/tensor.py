"""Dense video tensors, splittable deterministic RNG, and elementwise helpers.

A video tensor is a read-only float64 numpy array of shape
(frames, channels, height, width).  Every public operation in the package
returns tensors in this form and guarantees all elements are finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# (frames, channels, height, width), float64, read-only
VideoTensor = np.ndarray

_MASK64 = (1 << 64) - 1


class NumericError(ArithmeticError):
    """A numeric consistency guarantee was violated."""


class NonFiniteError(NumericError):
    """A public operation produced NaN or Inf."""


def _splitmix64(z: int) -> int:
    """One SplitMix64 mixing round; used to derive independent RNG streams."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class RngSeed:
    """Key of a counter-based (Philox) random stream.

    The pair (seed, stream_id) fully determines the sample sequence,
    independently of platform and thread count.  Derived substreams are
    obtained by hashing integer tokens into stream_id, so parallel or
    reordered consumers still draw from fixed, non-overlapping streams.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= _MASK64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")

    def substream(self, *tokens: int) -> "RngSeed":
        """Derive an independent stream keyed by integer tokens."""
        s = self.stream_id
        for tok in tokens:
            s = _splitmix64((s ^ _splitmix64(tok & _MASK64)) & _MASK64)
        return RngSeed(self.seed, s)

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def _freeze(arr: np.ndarray) -> VideoTensor:
    """Finalize an internally-built array: check finiteness, make read-only."""
    if not np.isfinite(arr).all():
        raise NonFiniteError("operation produced NaN or Inf")
    arr.flags.writeable = False
    return arr


def as_video(data) -> VideoTensor:
    """Coerce array-like data to a validated video tensor.

    Accepts anything numpy can turn into a rank-4 array; copies unless the
    input is already a read-only float64 rank-4 array.
    """
    if (
        isinstance(data, np.ndarray)
        and data.dtype == np.float64
        and data.ndim == 4
        and not data.flags.writeable
    ):
        _validate_shape(data.shape)
        if not np.isfinite(data).all():
            raise NonFiniteError("tensor contains NaN or Inf")
        return data
    arr = np.array(data, dtype=np.float64)
    if arr.ndim != 4:
        raise ValueError(f"video tensor must be rank 4 (F,C,H,W), got rank {arr.ndim}")
    _validate_shape(arr.shape)
    return _freeze(arr)


def _validate_shape(shape: tuple[int, ...]) -> None:
    if len(shape) != 4:
        raise ValueError(f"invalid shape {shape}: expected 4 dims (F,C,H,W)")
    if any(d < 1 for d in shape):
        raise ValueError(f"invalid shape {shape}: all dims must be >= 1")


def _require_same_shape(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")


def gaussian_noise(shape: tuple[int, ...], rng: RngSeed) -> VideoTensor:
    """I.i.d. standard normal tensor; a pure function of (shape, rng)."""
    _validate_shape(tuple(shape))
    out = rng.generator().standard_normal(size=tuple(shape), dtype=np.float64)
    return _freeze(out)


def axpy(a: float, x: VideoTensor, b: float, y: VideoTensor) -> VideoTensor:
    """Elementwise a*x + b*y for tensors of identical shape."""
    _require_same_shape(x, y)
    return _freeze(a * x + b * y)


def l2_norm(x: VideoTensor) -> float:
    """Euclidean norm over all elements."""
    return float(np.linalg.norm(x.ravel()))
