"""Pure-NumPy implementations of the hot kernels.

This is the fallback backend; flowsr._kernelsc provides the same six
functions as a compiled extension.  Both operate on float64 arrays with
channel-last layout and must agree to tight tolerances (the bilinear
kernel additionally matches the compiled one exactly on constant fields,
which the flow-reuse identities rely on).
"""

import numpy as np

NAME = "python"


def conv2d_forward(x, w, b, stride=1, pad=0):
    """Cross-correlate x (H,W,Cin) with w (Kh,Kw,Cin,Cout), zero padding."""
    kh, kw, cin, cout = w.shape
    h, wd = x.shape[:2]
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (wd + 2 * pad - kw) // stride + 1
    xp = np.pad(x, ((pad, pad), (pad, pad), (0, 0))) if pad else np.ascontiguousarray(x)
    s0, s1, s2 = xp.strides
    win = np.lib.stride_tricks.as_strided(
        xp, (oh, ow, kh, kw, cin), (s0 * stride, s1 * stride, s0, s1, s2)
    )
    y = win.reshape(oh * ow, kh * kw * cin) @ w.reshape(kh * kw * cin, cout)
    y = y + b
    return np.ascontiguousarray(y.reshape(oh, ow, cout))


def conv2d_grad_input(gy, w, pad, in_h, in_w):
    """Gradient of conv2d_forward w.r.t. its input (stride 1 only)."""
    kh, kw, cin, cout = w.shape
    wt = np.ascontiguousarray(w[::-1, ::-1].transpose(0, 1, 3, 2))
    gx = conv2d_forward(gy, wt, np.zeros(cin), stride=1, pad=kh - 1 - pad)
    assert gx.shape[:2] == (in_h, in_w)
    return gx


def conv2d_grad_weights(x, gy, kh, kw, pad):
    """Gradients of conv2d_forward w.r.t. kernel and bias (stride 1 only)."""
    h, wd, cin = x.shape
    oh, ow, cout = gy.shape
    xp = np.pad(x, ((pad, pad), (pad, pad), (0, 0))) if pad else np.ascontiguousarray(x)
    s0, s1, s2 = xp.strides
    win = np.lib.stride_tricks.as_strided(xp, (oh, ow, kh, kw, cin), (s0, s1, s0, s1, s2))
    gw = np.tensordot(win, gy, axes=([0, 1], [0, 1]))
    gb = gy.sum(axis=(0, 1))
    return np.ascontiguousarray(gw), gb


def _corner_indices(coords, in_h, in_w):
    x = np.clip(coords[..., 0], 0.0, float(in_w - 1))
    y = np.clip(coords[..., 1], 0.0, float(in_h - 1))
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, in_w - 1)
    y1 = np.minimum(y0 + 1, in_h - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    return x0, x1, y0, y1, fx, fy


def bilinear_gather(field, coords):
    """Sample field (H,W,C) at absolute positions coords (...,2) = (x,y).

    Coordinates are clamped to the border.  The interpolation is written
    in lerp form, a + f*(b-a), so sampling a constant field returns the
    constant bit-exactly for any coordinates.
    """
    h, w = field.shape[:2]
    x0, x1, y0, y1, fx, fy = _corner_indices(coords, h, w)
    f00 = field[y0, x0]
    f01 = field[y0, x1]
    f10 = field[y1, x0]
    f11 = field[y1, x1]
    top = f00 + fx * (f01 - f00)
    bot = f10 + fx * (f11 - f10)
    return top + fy * (bot - top)


def bilinear_gather_grad(coords, gy, in_h, in_w):
    """Gradient of bilinear_gather w.r.t. the sampled field."""
    x0, x1, y0, y1, fx, fy = _corner_indices(coords, in_h, in_w)
    gf = np.zeros((in_h, in_w, gy.shape[-1]))
    np.add.at(gf, (y0, x0), gy * (1.0 - fx) * (1.0 - fy))
    np.add.at(gf, (y0, x1), gy * fx * (1.0 - fy))
    np.add.at(gf, (y1, x0), gy * (1.0 - fx) * fy)
    np.add.at(gf, (y1, x1), gy * fx * fy)
    return gf


def boxsum(x, k):
    """Sum of x over (2k+1)x(2k+1) windows, zero padded at borders."""
    if k == 0:
        return x.copy()
    h, w = x.shape[:2]
    xp = np.pad(x, ((k, k), (k, k), (0, 0)))
    out = np.zeros_like(x)
    for dy in range(2 * k + 1):
        for dx in range(2 * k + 1):
            out += xp[dy : dy + h, dx : dx + w]
    return out
