"""Optical-flow algebra: scale, recombine, re-base and apply flow fields.

Direction convention, fixed package-wide: a flow tagged (a -> b) stores,
at pixel p of frame a, the relative offset at which that pixel's content
is found in frame b.  This is the backward-warping convention: warping
frame b by the (a -> b) flow reconstructs frame a.
"""

from dataclasses import dataclass

import numpy as np

from flowsr.backend import kernels
from flowsr.errors import FormatError, ParameterError, SequenceError, ShapeError
from flowsr.tensor import FrameTensor, grid_coords

FLOW_MAGIC = b"OFRB"


@dataclass(frozen=True)
class FlowField:
    """(H, W, 2) displacements in pixels; uv[...,0] = x, uv[...,1] = y."""

    uv: np.ndarray
    tag: tuple  # (source time, target time), distinct

    def __post_init__(self):
        arr = np.ascontiguousarray(self.uv, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ShapeError(f"flow field must be HxWx2, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("flow field values must be finite")
        if self.tag[0] == self.tag[1]:
            raise ParameterError("flow tag times must be distinct")
        arr.setflags(write=False)
        object.__setattr__(self, "uv", arr)
        object.__setattr__(self, "tag", (float(self.tag[0]), float(self.tag[1])))

    @property
    def height(self):
        return self.uv.shape[0]

    @property
    def width(self):
        return self.uv.shape[1]


def constant_flow(h, w, vec, tag) -> FlowField:
    uv = np.empty((h, w, 2))
    uv[..., 0] = vec[0]
    uv[..., 1] = vec[1]
    return FlowField(uv, tag)


@dataclass(frozen=True)
class FlowBundle:
    """The four flows relating one input pair and its midpoint at time t."""

    f_t0: FlowField
    f_t1: FlowField
    f01: FlowField
    f10: FlowField
    t: float

    def __post_init__(self):
        dims = {(f.height, f.width) for f in (self.f_t0, self.f_t1, self.f01, self.f10)}
        if len(dims) != 1:
            raise ShapeError("bundle flows must share dimensions")
        if not 0.0 < self.t < 1.0:
            raise ParameterError("bundle t must lie in (0, 1)")


def _check_t(t):
    if not 0.0 < t < 1.0:
        raise ParameterError(f"t must lie in (0, 1), got {t}")


def _check_dims(a, b, what):
    if a.uv.shape != b.uv.shape:
        raise ShapeError(f"{what}: flow dims differ, {a.uv.shape} vs {b.uv.shape}")


def naive_intermediate(f01: FlowField, f10: FlowField, t: float):
    """Midpoint flows by plain magnitude scaling of the pairwise flows."""
    _check_t(t)
    _check_dims(f01, f10, "naive_intermediate")
    a, b = f01.tag
    mid = a + t * (b - a)
    f_t0 = FlowField(t * f10.uv, (mid, a))
    f_t1 = FlowField((1.0 - t) * f01.uv, (mid, b))
    return f_t0, f_t1


def parallelogram_recombine(f_t0: FlowField, f_t1: FlowField) -> FlowField:
    """-f_t0 + f_t1: the pair flow by the parallelogram law, still t-based."""
    _check_dims(f_t0, f_t1, "parallelogram_recombine")
    return FlowField(f_t1.uv - f_t0.uv, (f_t0.tag[1], f_t1.tag[1]))


def complementary_flow(f_t1: FlowField, t: float) -> FlowField:
    """(t/(1-t)) * f_t1, the small flow that re-bases a t-based field to time 0."""
    _check_t(t)
    return FlowField((t / (1.0 - t)) * f_t1.uv, (f_t1.tag[1] - 1.0, f_t1.tag[0]))


def warp(field, flow: FlowField):
    """Backward-warp: out(p) = field sampled at p + flow(p).

    Accepts FrameTensor or FlowField; a flow field is warped as two
    scalar planes (base positions move, vectors are not re-based).
    """
    if isinstance(field, FlowField):
        data = field.uv
    else:
        data = field.data
    if data.shape[:2] != flow.uv.shape[:2]:
        raise ShapeError(
            f"warp: field {data.shape[:2]} vs flow {flow.uv.shape[:2]}"
        )
    coords = grid_coords(*data.shape[:2]) + flow.uv
    out = kernels.bilinear_gather(data, coords)
    if isinstance(field, FlowField):
        return FlowField(out, field.tag)
    return FrameTensor(out)


def _reuse_one_direction(f_ta, f_tb, ratio, tag):
    hat = FlowField(f_tb.uv - f_ta.uv, tag)
    com = FlowField(ratio * f_tb.uv, (tag[0], f_tb.tag[0]))
    return warp(hat, com)


def reuse_flows(f_t0: FlowField, f_t1: FlowField, t: float):
    """Reconstruct both pairwise flows from the midpoint flows.

    f01 = warp(-f_t0 + f_t1, (t/(1-t)) * f_t1); the 1->0 direction is the
    mirrored construction with roles and the scaling ratio swapped.  For
    flows of a uniform translation the result is exact: warping a
    constant field leaves it unchanged.
    """
    _check_t(t)
    _check_dims(f_t0, f_t1, "reuse_flows")
    t0, t1 = f_t0.tag[1], f_t1.tag[1]
    f01 = _reuse_one_direction(f_t0, f_t1, t / (1.0 - t), (t0, t1))
    f10 = _reuse_one_direction(f_t1, f_t0, (1.0 - t) / t, (t1, t0))
    return f01, f10


def sequence_flows(frames, estimator, t: float):
    """Estimate midpoint flows for each adjacent pair and reuse them.

    Returns n-1 FlowBundles for n input frames, tagged with absolute
    input indices (pair l spans times l and l+1).
    """
    if len(frames) < 2:
        raise SequenceError(f"need at least 2 frames, got {len(frames)}")
    dims = {(f.height, f.width) for f in frames}
    if len(dims) != 1:
        raise ShapeError(f"frames have nonuniform dims: {sorted(dims)}")
    _check_t(t)
    bundles = []
    for l in range(len(frames) - 1):
        f_t0, f_t1 = estimator.estimate(frames[l], frames[l + 1], t)
        f_t0 = FlowField(f_t0.uv, (l + t, float(l)))
        f_t1 = FlowField(f_t1.uv, (l + t, float(l + 1)))
        f01, f10 = reuse_flows(f_t0, f_t1, t)
        bundles.append(FlowBundle(f_t0, f_t1, f01, f10, t))
    return bundles


def write_flow(path, field: FlowField):
    """Binary flow file: magic OFRB, u32 LE width/height, f32 LE (u,v) pairs."""
    h, w = field.height, field.width
    with open(path, "wb") as fh:
        fh.write(FLOW_MAGIC)
        fh.write(np.array([w, h], dtype="<u4").tobytes())
        fh.write(field.uv.astype("<f4").tobytes())


def read_flow(path, tag=(0.0, 1.0)) -> FlowField:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != FLOW_MAGIC:
        raise FormatError(f"{path}: expected magic {FLOW_MAGIC!r}")
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated flow header")
    w, h = np.frombuffer(raw[4:12], dtype="<u4")
    need = 12 + int(w) * int(h) * 2 * 4
    if len(raw) != need:
        raise FormatError(f"{path}: expected {need} bytes, found {len(raw)}")
    uv = np.frombuffer(raw[12:], dtype="<f4").astype(np.float64).reshape(int(h), int(w), 2)
    return FlowField(uv, tag)
