"""Differentiable array operations with a recorded backward pass.

Every function here takes NumPy arrays or Var nodes.  With plain arrays
it computes and returns a plain array (the inference path, no recording
overhead).  As soon as an input is a Var, the output is a Var whose
backward closure holds the hand-derived gradient of that operation; the
whole pipeline is written against these functions, so the toy trainer
gets gradients for free by passing Var-wrapped parameters.

Gradients deliberately do not flow into warp coordinates: flow fields
are treated as constants of the graph (the estimators are not learned).
"""

import numpy as np

from flowsr.backend import kernels
from flowsr.errors import ShapeError
from flowsr.tensor import grid_coords


class Var:
    """A value in the recorded graph; leaves accumulate into .grad."""

    __slots__ = ("data", "grad", "_parents", "_bwd")

    def __init__(self, data, parents=(), bwd=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self._parents = parents
        self._bwd = bwd

    @property
    def shape(self):
        return self.data.shape


def value(x):
    return x.data if isinstance(x, Var) else x


def _record(y, pairs):
    """Build a Var from (arg, grad_fn) pairs, keeping only Var parents."""
    parents = tuple(a for a, _ in pairs if isinstance(a, Var))
    if not parents:
        return y
    fns = tuple(f for a, f in pairs if isinstance(a, Var))

    def bwd(gy):
        return tuple(f(gy) for f in fns)

    return Var(y, parents, bwd)


def backward(root: Var, seed=None):
    """Reverse-mode sweep from a recorded root (usually a scalar loss)."""
    topo = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    root.grad = np.ones_like(root.data) if seed is None else np.asarray(seed, float)
    for node in reversed(topo):
        if node._bwd is None or node.grad is None:
            continue
        for parent, g in zip(node._parents, node._bwd(node.grad)):
            if g is None:
                continue
            parent.grad = g if parent.grad is None else parent.grad + g


# ---------------------------------------------------------------- primitives


def conv2d(x, w, b, pad=0):
    xd, wd, bd = value(x), value(w), value(b)
    y = kernels.conv2d_forward(xd, wd, bd, 1, pad)
    kh, kw = wd.shape[:2]
    h, width = xd.shape[:2]
    return _record(
        y,
        [
            (x, lambda gy: kernels.conv2d_grad_input(gy, wd, pad, h, width)),
            (w, lambda gy: kernels.conv2d_grad_weights(xd, gy, kh, kw, pad)[0]),
            (b, lambda gy: gy.sum(axis=(0, 1))),
        ],
    )


def leaky_relu(x, slope=0.1):
    xd = value(x)
    factor = np.where(xd >= 0, 1.0, slope)
    return _record(xd * factor, [(x, lambda gy: gy * factor)])


def sigmoid(x):
    s = 1.0 / (1.0 + np.exp(-value(x)))
    return _record(s, [(x, lambda gy: gy * s * (1.0 - s))])


def exp(x):
    e = np.exp(value(x))
    return _record(e, [(x, lambda gy: gy * e)])


def _shuffle(a, r):
    h, w, c = a.shape
    co = c // (r * r)
    return np.ascontiguousarray(
        a.reshape(h, w, co, r, r).transpose(0, 3, 1, 4, 2).reshape(h * r, w * r, co)
    )


def _unshuffle(a, r):
    h, w, c = a.shape
    return np.ascontiguousarray(
        a.reshape(h // r, r, w // r, r, c).transpose(0, 2, 4, 1, 3).reshape(h // r, w // r, c * r * r)
    )


def pixel_shuffle(x, r):
    y = _shuffle(value(x), r)
    return _record(y, [(x, lambda gy: _unshuffle(gy, r))])


def warp(field, uv):
    """Backward-warp by a constant flow; differentiates w.r.t. the field only."""
    fd = value(field)
    uv = np.asarray(uv, dtype=np.float64)
    if fd.shape[:2] != uv.shape[:2]:
        raise ShapeError(f"warp: field {fd.shape[:2]} vs flow {uv.shape[:2]}")
    coords = grid_coords(*fd.shape[:2]) + uv
    h, w = fd.shape[:2]
    y = kernels.bilinear_gather(fd, coords)
    return _record(y, [(field, lambda gy: kernels.bilinear_gather_grad(coords, gy, h, w))])


def local_corr(a, b, k):
    """Per-channel patch correlation: boxsum of the elementwise product."""
    ad, bd = value(a), value(b)
    if ad.shape != bd.shape:
        raise ShapeError(f"local_corr: {ad.shape} vs {bd.shape}")
    y = kernels.boxsum(np.ascontiguousarray(ad * bd), int(k))
    return _record(
        y,
        [
            (a, lambda gy: bd * kernels.boxsum(np.ascontiguousarray(gy), int(k))),
            (b, lambda gy: ad * kernels.boxsum(np.ascontiguousarray(gy), int(k))),
        ],
    )


def add(a, b):
    return _record(value(a) + value(b), [(a, lambda gy: gy), (b, lambda gy: gy)])


def sub(a, b):
    return _record(value(a) - value(b), [(a, lambda gy: gy), (b, lambda gy: -gy)])


def mul(a, b):
    """Elementwise product; b may be (H, W, 1) against a (H, W, C)."""
    ad, bd = value(a), value(b)

    def ga(gy):
        return gy * bd

    def gb(gy):
        g = gy * ad
        if bd.shape != g.shape:  # channel-broadcast side
            g = g.sum(axis=-1, keepdims=True)
        return g

    return _record(ad * bd, [(a, ga), (b, gb)])


def scale(x, s):
    s = float(s)
    return _record(value(x) * s, [(x, lambda gy: gy * s)])


def add_const(x, c):
    return _record(value(x) + float(c), [(x, lambda gy: gy)])


def concat(parts):
    datas = [value(p) for p in parts]
    y = np.concatenate(datas, axis=-1)
    sizes = [d.shape[-1] for d in datas]
    offsets = np.cumsum([0] + sizes)

    pairs = []
    for i, p in enumerate(parts):
        lo, hi = offsets[i], offsets[i + 1]
        pairs.append((p, lambda gy, lo=lo, hi=hi: np.ascontiguousarray(gy[..., lo:hi])))
    return _record(y, pairs)


def clamp01(x):
    """Clamp to [0,1]; subgradient passes only strictly inside the range."""
    xd = value(x)
    y = np.clip(xd, 0.0, 1.0)
    inside = ((xd > 0.0) & (xd < 1.0)).astype(np.float64)
    return _record(y, [(x, lambda gy: gy * inside)])


def sumsq_channels(x):
    """Per-pixel squared norm over channels, kept as (H, W, 1)."""
    xd = value(x)
    y = (xd * xd).sum(axis=-1, keepdims=True)
    return _record(y, [(x, lambda gy: 2.0 * xd * gy)])


def charbonnier(pred, gt, eps=1e-3):
    """Mean of sqrt((pred-gt)^2 + eps^2); returns a scalar."""
    pd = value(pred)
    gt = value(gt)
    if pd.shape != gt.shape:
        raise ShapeError(f"charbonnier: {pd.shape} vs {gt.shape}")
    d = pd - gt
    r = np.sqrt(d * d + eps * eps)
    y = np.mean(r)
    n = d.size
    return _record(y, [(pred, lambda gy: gy * d / (r * n))])


def vsum(scalars):
    """Sum a list of scalar values/Vars."""
    total = scalars[0]
    for s in scalars[1:]:
        total = add(total, s)
    return total
