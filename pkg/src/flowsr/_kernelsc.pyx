# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot kernels (see _kernels_np for the contract).

The bilinear kernel mirrors the NumPy lerp formulation operation-for-
operation so both backends return bit-identical samples; the convolution
kernels may differ from BLAS results in the last ulps (different
summation order), which all cross-backend tests tolerate.
"""

import numpy as np

from libc.math cimport floor

NAME = "compiled"


def conv2d_forward(double[:, :, ::1] x, double[:, :, :, ::1] w, double[::1] b,
                   int stride=1, int pad=0):
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], cin = w.shape[2], cout = w.shape[3]
    cdef Py_ssize_t h = x.shape[0], wd = x.shape[1]
    cdef Py_ssize_t oh = (h + 2 * pad - kh) // stride + 1
    cdef Py_ssize_t ow = (wd + 2 * pad - kw) // stride + 1
    out_np = np.empty((oh, ow, cout))
    cdef double[:, :, ::1] y = out_np
    cdef Py_ssize_t i, j, d, ki, kj, c, yy, xx
    cdef double acc, v
    for i in range(oh):
        for j in range(ow):
            for d in range(cout):
                acc = b[d]
                for ki in range(kh):
                    yy = i * stride + ki - pad
                    if yy < 0 or yy >= h:
                        continue
                    for kj in range(kw):
                        xx = j * stride + kj - pad
                        if xx < 0 or xx >= wd:
                            continue
                        for c in range(cin):
                            acc += x[yy, xx, c] * w[ki, kj, c, d]
                y[i, j, d] = acc
    return out_np


def conv2d_grad_input(double[:, :, ::1] gy, double[:, :, :, ::1] w,
                      int pad, int in_h, int in_w):
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], cin = w.shape[2], cout = w.shape[3]
    cdef Py_ssize_t oh = gy.shape[0], ow = gy.shape[1]
    out_np = np.zeros((in_h, in_w, cin))
    cdef double[:, :, ::1] gx = out_np
    cdef Py_ssize_t i, j, ki, kj, c, d, yy, xx
    cdef double g
    for i in range(oh):
        for j in range(ow):
            for ki in range(kh):
                yy = i + ki - pad
                if yy < 0 or yy >= in_h:
                    continue
                for kj in range(kw):
                    xx = j + kj - pad
                    if xx < 0 or xx >= in_w:
                        continue
                    for c in range(cin):
                        g = 0.0
                        for d in range(cout):
                            g += gy[i, j, d] * w[ki, kj, c, d]
                        gx[yy, xx, c] += g
    return out_np


def conv2d_grad_weights(double[:, :, ::1] x, double[:, :, ::1] gy,
                        int kh, int kw, int pad):
    cdef Py_ssize_t h = x.shape[0], wd = x.shape[1], cin = x.shape[2]
    cdef Py_ssize_t oh = gy.shape[0], ow = gy.shape[1], cout = gy.shape[2]
    gw_np = np.zeros((kh, kw, cin, cout))
    gb_np = np.zeros(cout)
    cdef double[:, :, :, ::1] gw = gw_np
    cdef double[::1] gb = gb_np
    cdef Py_ssize_t i, j, ki, kj, c, d, yy, xx
    cdef double g, v
    for i in range(oh):
        for j in range(ow):
            for d in range(cout):
                gb[d] += gy[i, j, d]
            for ki in range(kh):
                yy = i + ki - pad
                if yy < 0 or yy >= h:
                    continue
                for kj in range(kw):
                    xx = j + kj - pad
                    if xx < 0 or xx >= wd:
                        continue
                    for c in range(cin):
                        v = x[yy, xx, c]
                        for d in range(cout):
                            gw[ki, kj, c, d] += v * gy[i, j, d]
    return gw_np, gb_np


def bilinear_gather(double[:, :, ::1] field, double[:, :, ::1] coords):
    cdef Py_ssize_t h = field.shape[0], w = field.shape[1], ch = field.shape[2]
    cdef Py_ssize_t oh = coords.shape[0], ow = coords.shape[1]
    out_np = np.empty((oh, ow, ch))
    cdef double[:, :, ::1] out = out_np
    cdef Py_ssize_t i, j, c, x0, y0, x1, y1
    cdef double cx, cy, fx, fy, f00, f01, f10, f11, top, bot
    for i in range(oh):
        for j in range(ow):
            cx = coords[i, j, 0]
            cy = coords[i, j, 1]
            if cx < 0.0:
                cx = 0.0
            elif cx > w - 1.0:
                cx = w - 1.0
            if cy < 0.0:
                cy = 0.0
            elif cy > h - 1.0:
                cy = h - 1.0
            x0 = <Py_ssize_t>floor(cx)
            y0 = <Py_ssize_t>floor(cy)
            x1 = x0 + 1
            if x1 > w - 1:
                x1 = w - 1
            y1 = y0 + 1
            if y1 > h - 1:
                y1 = h - 1
            fx = cx - x0
            fy = cy - y0
            for c in range(ch):
                f00 = field[y0, x0, c]
                f01 = field[y0, x1, c]
                f10 = field[y1, x0, c]
                f11 = field[y1, x1, c]
                top = f00 + fx * (f01 - f00)
                bot = f10 + fx * (f11 - f10)
                out[i, j, c] = top + fy * (bot - top)
    return out_np


def bilinear_gather_grad(double[:, :, ::1] coords, double[:, :, ::1] gy,
                         int in_h, int in_w):
    cdef Py_ssize_t oh = coords.shape[0], ow = coords.shape[1], ch = gy.shape[2]
    out_np = np.zeros((in_h, in_w, ch))
    cdef double[:, :, ::1] gf = out_np
    cdef Py_ssize_t i, j, c, x0, y0, x1, y1
    cdef double cx, cy, fx, fy, g
    for i in range(oh):
        for j in range(ow):
            cx = coords[i, j, 0]
            cy = coords[i, j, 1]
            if cx < 0.0:
                cx = 0.0
            elif cx > in_w - 1.0:
                cx = in_w - 1.0
            if cy < 0.0:
                cy = 0.0
            elif cy > in_h - 1.0:
                cy = in_h - 1.0
            x0 = <Py_ssize_t>floor(cx)
            y0 = <Py_ssize_t>floor(cy)
            x1 = x0 + 1
            if x1 > in_w - 1:
                x1 = in_w - 1
            y1 = y0 + 1
            if y1 > in_h - 1:
                y1 = in_h - 1
            fx = cx - x0
            fy = cy - y0
            for c in range(ch):
                g = gy[i, j, c]
                gf[y0, x0, c] += g * (1.0 - fx) * (1.0 - fy)
                gf[y0, x1, c] += g * fx * (1.0 - fy)
                gf[y1, x0, c] += g * (1.0 - fx) * fy
                gf[y1, x1, c] += g * fx * fy
    return out_np


def boxsum(double[:, :, ::1] x, int k):
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1], ch = x.shape[2]
    out_np = np.zeros((h, w, ch))
    cdef double[:, :, ::1] out = out_np
    cdef Py_ssize_t i, j, c, dy, dx, yy, xx
    cdef double acc
    for i in range(h):
        for j in range(w):
            for c in range(ch):
                acc = 0.0
                for dy in range(-k, k + 1):
                    yy = i + dy
                    if yy < 0 or yy >= h:
                        continue
                    for dx in range(-k, k + 1):
                        xx = j + dx
                        if xx < 0 or xx >= w:
                            continue
                        acc += x[yy, xx, c]
                out[i, j, c] = acc
    return out_np
