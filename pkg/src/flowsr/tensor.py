"""Dense H x W x C grid type and the primitive numeric operators.

Layout is channel-last row-major float64 throughout.  One tensor type
serves both images (C=3, values in [0,1]) and feature maps; the role is
a convention, not a type distinction.  All operations are pure: tensors
are immutable and the same input produces bit-identical output.
"""

from dataclasses import dataclass, field

import numpy as np

from flowsr.backend import kernels
from flowsr.errors import ConfigurationError, SizeError

LEAKY_SLOPE = 0.1


@dataclass(frozen=True)
class FrameMotion:
    """Analytic motion attached to synthetic frames (oracle estimation)."""

    model: object  # exposes flow_field(t_from, t_to, h, w) -> (H,W,2)
    time: float


@dataclass(frozen=True)
class FrameTensor:
    """Immutable H x W x C grid of finite float64 values."""

    data: np.ndarray
    motion: FrameMotion | None = field(default=None, compare=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ConfigurationError(f"FrameTensor needs HxWxC data, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ConfigurationError("FrameTensor values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    def with_motion(self, motion):
        return FrameTensor(self.data, motion)


@dataclass(frozen=True)
class ConvSpec:
    """Kernel (Kh,Kw,Cin,Cout), bias (Cout,), stride and zero padding."""

    kernel: np.ndarray
    bias: np.ndarray
    stride: int = 1
    padding: int = 0

    def __post_init__(self):
        k = np.ascontiguousarray(self.kernel, dtype=np.float64)
        b = np.ascontiguousarray(self.bias, dtype=np.float64)
        if k.ndim != 4:
            raise ConfigurationError("kernel must be Kh x Kw x Cin x Cout")
        if k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
            raise ConfigurationError("kernel dims must be odd")
        if b.shape != (k.shape[3],):
            raise ConfigurationError("bias length must equal Cout")
        if self.stride < 1 or self.padding < 0:
            raise ConfigurationError("stride must be >= 1 and padding >= 0")
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "bias", b)

    @property
    def c_in(self):
        return self.kernel.shape[2]

    @property
    def c_out(self):
        return self.kernel.shape[3]


def conv2d(x: FrameTensor, spec: ConvSpec) -> FrameTensor:
    """Cross-correlation with zero padding; output dims per the usual floor rule."""
    if x.channels != spec.c_in:
        raise ConfigurationError(
            f"conv2d: input has {x.channels} channels, kernel expects {spec.c_in}"
        )
    y = kernels.conv2d_forward(x.data, spec.kernel, spec.bias, spec.stride, spec.padding)
    return FrameTensor(y)


def activation(x: FrameTensor, kind: str, slope: float = LEAKY_SLOPE) -> FrameTensor:
    """Elementwise leaky_relu(slope) or sigmoid."""
    if kind == "leaky_relu":
        y = np.where(x.data >= 0, x.data, slope * x.data)
    elif kind == "sigmoid":
        y = 1.0 / (1.0 + np.exp(-x.data))
    else:
        raise ConfigurationError(f"unknown activation {kind!r}")
    return FrameTensor(y)


def pixel_shuffle(x: FrameTensor, r: int) -> FrameTensor:
    """Rearrange C*r^2 channels into an r-times larger spatial grid."""
    h, w, c = x.data.shape
    if c % (r * r) != 0:
        raise ConfigurationError(f"pixel_shuffle: {c} channels not divisible by {r}^2")
    out = _shuffle_array(x.data, r)
    return FrameTensor(out)


def pixel_unshuffle(x: FrameTensor, r: int) -> FrameTensor:
    """Inverse of pixel_shuffle."""
    h, w, c = x.data.shape
    if h % r or w % r:
        raise ConfigurationError("pixel_unshuffle: spatial dims not divisible by r")
    v = x.data.reshape(h // r, r, w // r, r, c)
    out = v.transpose(0, 2, 4, 1, 3).reshape(h // r, w // r, c * r * r)
    return FrameTensor(out)


def _shuffle_array(a, r):
    # out(y, x, c) = in(y//r, x//r, c*r^2 + (y%r)*r + (x%r))
    h, w, c = a.shape
    co = c // (r * r)
    v = a.reshape(h, w, co, r, r)
    return np.ascontiguousarray(v.transpose(0, 3, 1, 4, 2).reshape(h * r, w * r, co))


def grid_coords(h: int, w: int) -> np.ndarray:
    """Identity sampling grid: coords[y, x] = (x, y)."""
    xs, ys = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    return np.ascontiguousarray(np.stack([xs, ys], axis=-1))


def bilinear_sample(x: FrameTensor, coords: np.ndarray) -> FrameTensor:
    """Bilinear interpolation at absolute (x, y) positions, border-replicate."""
    c = np.ascontiguousarray(coords, dtype=np.float64)
    return FrameTensor(kernels.bilinear_gather(x.data, c))


def _cubic_weight(d):
    # Catmull-Rom coefficients (a = -0.5)
    ad = np.abs(d)
    out = np.zeros_like(ad)
    near = ad <= 1.0
    out[near] = (1.5 * ad[near] - 2.5) * ad[near] * ad[near] + 1.0
    mid = (ad > 1.0) & (ad < 2.0)
    out[mid] = ((-0.5 * ad[mid] + 2.5) * ad[mid] - 4.0) * ad[mid] + 2.0
    return out


def _resize_axis(arr, axis, scale):
    n = arr.shape[axis]
    out_n = int(np.floor(n * scale + 0.5))
    if out_n < 1:
        raise SizeError(f"resize: axis of length {n} at scale {scale} collapses below 1")
    # kernel stretched by 1/scale when downscaling (antialiasing), as in
    # the usual "bicubic downsampling" of the SR literature
    kscale = min(scale, 1.0)
    support = 2.0 / kscale
    centers = (np.arange(out_n, dtype=np.float64) + 0.5) / scale - 0.5
    ntaps = int(np.floor(2.0 * support)) + 2
    left = np.ceil(centers - support).astype(np.intp)
    taps = left[:, None] + np.arange(ntaps)
    wts = _cubic_weight((taps - centers[:, None]) * kscale)
    wts = wts / wts.sum(axis=1, keepdims=True)
    idx = np.clip(taps, 0, n - 1)
    moved = np.moveaxis(arr, axis, 0)
    sampled = moved[idx]  # (out_n, ntaps, ...)
    shaped = wts.reshape(wts.shape + (1,) * (sampled.ndim - 2))
    out = (sampled * shaped).sum(axis=1)
    return np.moveaxis(out, 0, axis)


def bicubic_resize(x: FrameTensor, scale: float) -> FrameTensor:
    """Separable Catmull-Rom resize with border replication."""
    if scale <= 0:
        raise SizeError("resize scale must be positive")
    out = _resize_axis(x.data, 0, scale)
    out = _resize_axis(out, 1, scale)
    return FrameTensor(np.ascontiguousarray(out))
