"""Midpoint-flow estimators: the analytic oracle and a classical fallback.

Both produce (f_t0, f_t1), the flows from the (nonexistent) frame at
relative time t in (0,1) toward the two input frames, tagged (t, 0) and
(t, 1) in pair-local time.  `pairwise` returns the plain frame-to-frame
flows used by the naive-scaling adapter.
"""

import numpy as np

from flowsr import flow as fl
from flowsr.backend import kernels
from flowsr.errors import ConfigurationError, OracleUnavailableError
from flowsr.flow import FlowField
from flowsr.tensor import FrameTensor, grid_coords

GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])  # BT.601


def to_gray(frame: FrameTensor) -> np.ndarray:
    """(H, W, 1) luma plane."""
    if frame.channels == 1:
        return frame.data.copy()
    if frame.channels == 3:
        return np.ascontiguousarray(frame.data @ GRAY_WEIGHTS)[..., None]
    raise ConfigurationError(f"cannot grayscale a {frame.channels}-channel frame")


class OracleEstimator:
    """Exact flows read off the analytic motion attached to synthetic frames."""

    def _motion(self, frame):
        if frame.motion is None:
            raise OracleUnavailableError("frame carries no analytic motion metadata")
        return frame.motion

    def estimate(self, i0: FrameTensor, i1: FrameTensor, t: float):
        m0, m1 = self._motion(i0), self._motion(i1)
        if m0.model is not m1.model:
            raise OracleUnavailableError("frames come from different synthetic scenes")
        mid = m0.time + t * (m1.time - m0.time)
        h, w = i0.height, i0.width
        f_t0 = FlowField(m0.model.flow_field(mid, m0.time, h, w), (t, 0.0))
        f_t1 = FlowField(m0.model.flow_field(mid, m1.time, h, w), (t, 1.0))
        return f_t0, f_t1

    def pairwise(self, i0: FrameTensor, i1: FrameTensor):
        m0, m1 = self._motion(i0), self._motion(i1)
        if m0.model is not m1.model:
            raise OracleUnavailableError("frames come from different synthetic scenes")
        h, w = i0.height, i0.width
        f01 = FlowField(m0.model.flow_field(m0.time, m1.time, h, w), (0.0, 1.0))
        f10 = FlowField(m0.model.flow_field(m1.time, m0.time, h, w), (1.0, 0.0))
        return f01, f10


def _avg_pool2(g):
    h, w = g.shape[:2]
    if h % 2:
        g = np.concatenate([g, g[-1:]], axis=0)
        h += 1
    if w % 2:
        g = np.concatenate([g, g[:, -1:]], axis=1)
        w += 1
    return 0.25 * (g[0::2, 0::2] + g[1::2, 0::2] + g[0::2, 1::2] + g[1::2, 1::2])


def _tile_ranges(n, block):
    starts = list(range(0, n, block))
    return [(s, min(s + block, n)) for s in starts]


def _upsample_flow(uv, shape):
    ys = np.minimum(np.arange(shape[0]) // 2, uv.shape[0] - 1)
    xs = np.minimum(np.arange(shape[1]) // 2, uv.shape[1] - 1)
    return uv[np.ix_(ys, xs)]


class BlockMatchEstimator:
    """Coarse-to-fine SAD block matching plus a t-based refinement pass.

    Pairwise flows are found by exhaustive integer search per tile at each
    pyramid level (cost = mean absolute difference over the in-bounds
    overlap, ties broken toward the smaller displacement).  The midpoint
    flows start as the naively scaled pairwise flows and are then
    re-matched around the interpolated position so the output is t-based.
    Displacements beyond the total search range are clipped by
    construction, not reported as errors.
    """

    def __init__(self, block: int = 8, search: int = 4, levels: int = 3,
                 refine_search: int = 2):
        if block < 2 or search < 1 or levels < 1:
            raise ConfigurationError("block >= 2, search >= 1, levels >= 1 required")
        self.block = block
        self.search = search
        self.levels = levels
        self.refine_search = refine_search

    def estimate(self, i0: FrameTensor, i1: FrameTensor, t: float):
        f01, f10 = self.pairwise(i0, i1)
        f_t0, f_t1 = fl.naive_intermediate(f01, f10, t)
        g0, g1 = to_gray(i0), to_gray(i1)
        mid = 0.5 * (
            kernels.bilinear_gather(g0, grid_coords(*g0.shape[:2]) + f_t0.uv)
            + kernels.bilinear_gather(g1, grid_coords(*g1.shape[:2]) + f_t1.uv)
        )
        base_valid = self._inbounds(f_t0.uv, *g0.shape[:2]) & self._inbounds(
            f_t1.uv, *g0.shape[:2]
        )
        uv_t0 = self._rematch(mid, g0, f_t0.uv, base_valid)
        uv_t1 = self._rematch(mid, g1, f_t1.uv, base_valid)
        return FlowField(uv_t0, (t, 0.0)), FlowField(uv_t1, (t, 1.0))

    def pairwise(self, i0: FrameTensor, i1: FrameTensor):
        g0, g1 = to_gray(i0), to_gray(i1)
        if min(g0.shape[:2]) < self.block:
            raise ConfigurationError(
                f"frame {g0.shape[:2]} smaller than block size {self.block}"
            )
        uv01 = self._coarse_to_fine(g0, g1)
        uv10 = self._coarse_to_fine(g1, g0)
        return FlowField(uv01, (0.0, 1.0)), FlowField(uv10, (1.0, 0.0))

    def _coarse_to_fine(self, g0, g1):
        pyr0, pyr1 = [g0], [g1]
        while (
            len(pyr0) < self.levels
            and min(pyr0[-1].shape[0], pyr0[-1].shape[1]) >= 2 * self.block
        ):
            pyr0.append(_avg_pool2(pyr0[-1]))
            pyr1.append(_avg_pool2(pyr1[-1]))
        uv = None
        for a, b in zip(reversed(pyr0), reversed(pyr1)):
            if uv is None:
                uv = np.zeros(a.shape[:2] + (2,))
            else:
                uv = 2.0 * _upsample_flow(uv, a.shape[:2])
            uv = self._match_level(a, b, uv)
        return uv

    def _match_level(self, g0, g1, init_uv):
        h, w = g0.shape[:2]
        out = np.empty_like(init_uv)
        s = self.search
        for y0, y1 in _tile_ranges(h, self.block):
            for x0, x1 in _tile_ranges(w, self.block):
                cy, cx = (y0 + y1 - 1) // 2, (x0 + x1 - 1) // 2
                idx = int(round(init_uv[cy, cx, 0])), int(round(init_uv[cy, cx, 1]))
                best = self._search_tile(g0, g1, (y0, y1, x0, x1), idx, s)
                out[y0:y1, x0:x1, 0] = best[0]
                out[y0:y1, x0:x1, 1] = best[1]
        return out

    @staticmethod
    def _search_tile(g0, g1, tile, init, s):
        y0, y1, x0, x1 = tile
        h, w = g0.shape[:2]
        best = (np.inf, 0, init[0], init[1])
        for dy in range(init[1] - s, init[1] + s + 1):
            ty0, ty1 = max(y0 + dy, 0), min(y1 + dy, h)
            if ty0 >= ty1:
                continue
            for dx in range(init[0] - s, init[0] + s + 1):
                tx0, tx1 = max(x0 + dx, 0), min(x1 + dx, w)
                if tx0 >= tx1:
                    continue
                ref = g0[ty0 - dy : ty1 - dy, tx0 - dx : tx1 - dx]
                cost = float(np.mean(np.abs(ref - g1[ty0:ty1, tx0:tx1])))
                # ties broken toward the initial guess, then lexicographically
                dd = (dx - init[0]) ** 2 + (dy - init[1]) ** 2
                key = (cost, dd, dx, dy)
                if key < best:
                    best = key
        return best[2], best[3]

    @staticmethod
    def _inbounds(uv, h, w):
        coords = grid_coords(h, w) + uv
        return (
            (coords[..., 0] >= 0.0)
            & (coords[..., 0] <= w - 1.0)
            & (coords[..., 1] >= 0.0)
            & (coords[..., 1] <= h - 1.0)
        )[..., None]

    def _rematch(self, mid, g, init_uv, base_valid):
        """One integer delta search per tile around the fractional init."""
        h, w = g.shape[:2]
        r = self.refine_search
        base = grid_coords(h, w) + init_uv
        deltas = [(dx, dy) for dy in range(-r, r + 1) for dx in range(-r, r + 1)]
        diffs, valids = [], []
        for dx, dy in deltas:
            coords = base + np.array([dx, dy], dtype=np.float64)
            sampled = kernels.bilinear_gather(g, coords)
            ok = base_valid & (
                (coords[..., 0] >= 0.0)
                & (coords[..., 0] <= w - 1.0)
                & (coords[..., 1] >= 0.0)
                & (coords[..., 1] <= h - 1.0)
            )[..., None]
            diffs.append(np.abs(mid - sampled))
            valids.append(ok)
        out = init_uv.copy()
        for y0, y1 in _tile_ranges(h, self.block):
            for x0, x1 in _tile_ranges(w, self.block):
                best = (np.inf, 0, 0, 0)
                for (dx, dy), d, v in zip(deltas, diffs, valids):
                    vv = v[y0:y1, x0:x1]
                    n = int(vv.sum())
                    if n == 0:
                        continue
                    cost = float(d[y0:y1, x0:x1][vv].sum() / n)
                    key = (cost, dx * dx + dy * dy, dx, dy)
                    if key < best:
                        best = key
                if np.isfinite(best[0]):
                    out[y0:y1, x0:x1, 0] += best[2]
                    out[y0:y1, x0:x1, 1] += best[3]
        return out


class NaiveEstimatorAdapter:
    """Midpoint flows by scaling a pairwise estimator's output (no re-basing)."""

    def __init__(self, inner):
        self.inner = inner

    def estimate(self, i0: FrameTensor, i1: FrameTensor, t: float):
        f01, f10 = self.inner.pairwise(i0, i1)
        return fl.naive_intermediate(f01, f10, t)

    def pairwise(self, i0, i1):
        return self.inner.pairwise(i0, i1)


def make_estimator(name: str, block: int = 8, search: int = 4, levels: int = 3):
    if name == "oracle":
        return OracleEstimator()
    if name == "block_match":
        return BlockMatchEstimator(block=block, search=search, levels=levels)
    raise ConfigurationError(f"unknown estimator {name!r} (oracle | block_match)")
