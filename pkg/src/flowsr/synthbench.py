"""Synthetic sequences with closed-form motion and ground-truth flows.

Frames are rendered by sampling a continuous pattern at analytically
displaced coordinates, so a frame at any real time is available without
resampling error, and the true flow between any two times is known in
closed form.  Patterns are band-limited (gradients, gaussian blobs) so
bilinear warping error stays far below test tolerances; the checker
pattern is for visual output only.
"""

from dataclasses import dataclass, replace

import numpy as np

from flowsr.errors import ConfigurationError, SizeError
from flowsr.flow import FlowField
from flowsr.tensor import FrameMotion, FrameTensor, bicubic_resize

PATTERNS = ("gradient", "blobs", "checker")
KINDS = ("static", "translate", "accelerate", "rotate", "piecewise")


@dataclass(frozen=True)
class MotionSpec:
    kind: str = "static"
    velocity: tuple = (0.0, 0.0)  # translate: px/frame
    accel: tuple = (0.0, 0.0)  # accelerate: px/frame^2, displacement a*t^2
    omega: float = 0.0  # rotate: radians/frame
    center: tuple | None = None  # rotate pivot, defaults to frame center
    box: tuple = (0.0, 0.0, 0.0, 0.0)  # piecewise fg box at t=0: x, y, w, h
    fg_velocity: tuple = (0.0, 0.0)
    bg_velocity: tuple = (0.0, 0.0)
    duration: int = 5
    pattern: str = "gradient"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown motion kind {self.kind!r}")
        if self.pattern not in PATTERNS:
            raise ConfigurationError(f"unknown pattern {self.pattern!r}")
        if self.duration < 1:
            raise ConfigurationError("duration must be >= 1")


class MotionModel:
    """Maps scene points through time; subclasses are exact kinematics."""

    def source_points(self, xs, ys, tau):
        """Scene coordinates (at time 0) shown at pixel (xs, ys) at time tau."""
        raise NotImplementedError

    def flow_vectors(self, xs, ys, t_from, t_to):
        """Displacement from (xs, ys) at t_from to the same content at t_to."""
        raise NotImplementedError

    def scaled(self, s):
        """The same motion observed on a grid shrunk by factor s."""
        raise NotImplementedError

    def flow_field(self, t_from, t_to, h, w) -> np.ndarray:
        xs, ys = _pixel_grid(h, w)
        u, v = self.flow_vectors(xs, ys, t_from, t_to)
        return np.ascontiguousarray(np.stack([u, v], axis=-1))


def _pixel_grid(h, w):
    return np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))


class _Polynomial(MotionModel):
    """Uniform displacement v*t + a*t^2 (static/translate/accelerate)."""

    def __init__(self, v=(0.0, 0.0), a=(0.0, 0.0)):
        self.v = (float(v[0]), float(v[1]))
        self.a = (float(a[0]), float(a[1]))

    def _disp(self, tau):
        return (
            self.v[0] * tau + self.a[0] * tau * tau,
            self.v[1] * tau + self.a[1] * tau * tau,
        )

    def source_points(self, xs, ys, tau):
        dx, dy = self._disp(tau)
        return xs - dx, ys - dy

    def flow_vectors(self, xs, ys, t_from, t_to):
        d0 = self._disp(t_from)
        d1 = self._disp(t_to)
        u = np.full_like(xs, d1[0] - d0[0])
        v = np.full_like(ys, d1[1] - d0[1])
        return u, v

    def scaled(self, s):
        return _Polynomial(
            (self.v[0] * s, self.v[1] * s), (self.a[0] * s, self.a[1] * s)
        )


class _Rotation(MotionModel):
    def __init__(self, omega, center):
        self.omega = float(omega)
        self.center = (float(center[0]), float(center[1]))

    def _rotate(self, xs, ys, angle):
        cx, cy = self.center
        ca, sa = np.cos(angle), np.sin(angle)
        rx = ca * (xs - cx) - sa * (ys - cy) + cx
        ry = sa * (xs - cx) + ca * (ys - cy) + cy
        return rx, ry

    def source_points(self, xs, ys, tau):
        return self._rotate(xs, ys, -self.omega * tau)

    def flow_vectors(self, xs, ys, t_from, t_to):
        rx, ry = self._rotate(xs, ys, self.omega * (t_to - t_from))
        return rx - xs, ry - ys

    def scaled(self, s):
        cx = (self.center[0] + 0.5) * s - 0.5
        cy = (self.center[1] + 0.5) * s - 0.5
        return _Rotation(self.omega, (cx, cy))


class _Piecewise(MotionModel):
    """Foreground box translating over a translating background."""

    def __init__(self, box, fg_v, bg_v):
        self.box = tuple(float(b) for b in box)
        self.fg_v = (float(fg_v[0]), float(fg_v[1]))
        self.bg_v = (float(bg_v[0]), float(bg_v[1]))

    def _fg_mask(self, xs, ys, tau):
        x0 = self.box[0] + self.fg_v[0] * tau
        y0 = self.box[1] + self.fg_v[1] * tau
        return (
            (xs >= x0)
            & (xs < x0 + self.box[2])
            & (ys >= y0)
            & (ys < y0 + self.box[3])
        )

    def source_points(self, xs, ys, tau):
        fg = self._fg_mask(xs, ys, tau)
        sx = np.where(fg, xs - self.fg_v[0] * tau, xs - self.bg_v[0] * tau)
        sy = np.where(fg, ys - self.fg_v[1] * tau, ys - self.bg_v[1] * tau)
        return sx, sy, fg

    def flow_vectors(self, xs, ys, t_from, t_to):
        # occlusion at box edges is ignored; the field is exact elsewhere
        fg = self._fg_mask(xs, ys, t_from)
        dt = t_to - t_from
        u = np.where(fg, self.fg_v[0] * dt, self.bg_v[0] * dt)
        v = np.where(fg, self.fg_v[1] * dt, self.bg_v[1] * dt)
        return u, v

    def scaled(self, s):
        return _Piecewise(
            tuple(b * s for b in self.box),
            (self.fg_v[0] * s, self.fg_v[1] * s),
            (self.bg_v[0] * s, self.bg_v[1] * s),
        )


def _gradient_pattern(_h, _w, _seed):
    def render(xs, ys):
        out = np.empty(xs.shape + (3,))
        out[..., 0] = 0.5 + 0.45 * np.sin(0.13 * xs + 0.07 * ys)
        out[..., 1] = 0.5 + 0.45 * np.sin(0.09 * xs - 0.11 * ys + 1.0)
        out[..., 2] = 0.5 + 0.45 * np.sin(0.05 * xs + 0.15 * ys + 2.0)
        return out

    return render


def _blobs_pattern(h, w, seed):
    rng = np.random.default_rng(seed)
    k = 5
    cx = rng.uniform(0, w, k)
    cy = rng.uniform(0, h, k)
    sigma = rng.uniform(max(3.0, h / 12.0), max(4.0, h / 6.0), k)
    amp = rng.uniform(0.04, 0.12, (k, 3))

    def render(xs, ys):
        out = np.full(xs.shape + (3,), 0.35)
        for i in range(k):
            g = np.exp(-((xs - cx[i]) ** 2 + (ys - cy[i]) ** 2) / (2 * sigma[i] ** 2))
            out += g[..., None] * amp[i]
        return out

    return render


def _checker_pattern(_h, _w, _seed):
    def render(xs, ys):
        cell = (np.floor(xs / 8.0) + np.floor(ys / 8.0)) % 2
        return np.repeat(cell[..., None], 3, axis=-1)

    return render


_PATTERN_FACTORY = {
    "gradient": _gradient_pattern,
    "blobs": _blobs_pattern,
    "checker": _checker_pattern,
}


def _build_model(spec: MotionSpec, h, w) -> MotionModel:
    if spec.kind == "static":
        return _Polynomial()
    if spec.kind == "translate":
        return _Polynomial(v=spec.velocity)
    if spec.kind == "accelerate":
        return _Polynomial(a=spec.accel)
    if spec.kind == "rotate":
        center = spec.center if spec.center is not None else ((w - 1) / 2.0, (h - 1) / 2.0)
        return _Rotation(spec.omega, center)
    if spec.kind == "piecewise":
        if spec.box[2] <= 0 or spec.box[3] <= 0:
            raise ConfigurationError("piecewise motion needs a box with positive size")
        return _Piecewise(spec.box, spec.fg_velocity, spec.bg_velocity)
    raise ConfigurationError(f"unknown motion kind {spec.kind!r}")


class SceneSequence:
    """Rendered frames plus exact flows for arbitrary time pairs."""

    def __init__(self, spec: MotionSpec, h, w):
        if h < 16 or w < 16:
            raise SizeError("synthetic scenes need H, W >= 16")
        self.spec = spec
        self.h = h
        self.w = w
        self.model = _build_model(spec, h, w)
        self._render = _PATTERN_FACTORY[spec.pattern](h, w, spec.seed)

    def frame_at(self, tau: float) -> FrameTensor:
        xs, ys = _pixel_grid(self.h, self.w)
        src = self.model.source_points(xs, ys, float(tau))
        if len(src) == 3:  # piecewise: foreground content is inverted
            sx, sy, fg = src
            img = self._render(sx, sy)
            img = np.where(fg[..., None], 1.0 - img, img)
        else:
            img = self._render(*src)
        return FrameTensor(img, FrameMotion(self.model, float(tau)))

    @property
    def frames(self):
        return [self.frame_at(i) for i in range(self.spec.duration)]

    @property
    def mid_frames(self):
        return [self.frame_at(i + 0.5) for i in range(self.spec.duration - 1)]

    def true_flow(self, t_from: float, t_to: float) -> FlowField:
        uv = self.model.flow_field(float(t_from), float(t_to), self.h, self.w)
        return FlowField(uv, (float(t_from), float(t_to)))


def gen_sequence(spec: MotionSpec, h: int, w: int) -> SceneSequence:
    return SceneSequence(spec, h, w)


def degrade(hr_frames, scale: float = 0.25):
    """Bicubic-downsample every frame and pick the odd-indexed inputs.

    "Odd-indexed" counts frames 1-based: frames 1,3,5,... survive, i.e.
    indices 0,2,4,...  Motion metadata is rescaled so oracle estimation
    works at LR resolution.
    """
    if not hr_frames:
        raise SizeError("degrade: empty frame list")
    factor = 1.0 / scale
    scaled_models = {}
    lr_all = []
    for f in hr_frames:
        if f.height % round(factor) or f.width % round(factor):
            raise SizeError(
                f"degrade: dims {f.height}x{f.width} not divisible by {round(factor)}"
            )
        lr = bicubic_resize(f, scale)
        if f.motion is not None:
            model = f.motion.model
            key = id(model)
            if key not in scaled_models:
                scaled_models[key] = model.scaled(scale)
            lr = lr.with_motion(FrameMotion(scaled_models[key], f.motion.time))
        lr_all.append(lr)
    lr_odd = lr_all[0::2]
    return lr_all, lr_odd
