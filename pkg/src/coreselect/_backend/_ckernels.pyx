# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the NumPy training kernels.

Same contract as pykernels: in-place parameter updates, momentum-SGD on
loss_scale * summed per-example loss, (final_loss, epochs_run) returned.
Gradient accumulation order differs from BLAS, so results agree with the
NumPy backend to rounding, not bit for bit.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

ctypedef cnp.int64_t i64


cdef inline double _row_max(double[::1] z, Py_ssize_t C) nogil:
    cdef double zmax = z[0]
    cdef Py_ssize_t j
    for j in range(1, C):
        if z[j] > zmax:
            zmax = z[j]
    return zmax


def train_logistic(double[:, ::1] X, i64[::1] y, double[:, ::1] W, double[::1] b,
                   double lr, double momentum, int epochs, double loss_scale,
                   Py_ssize_t batch, perms, double plateau_tol, int patience):
    cdef Py_ssize_t m = X.shape[0], d = X.shape[1], C = W.shape[1]
    cdef double[:, ::1] vW = np.zeros((d, C))
    cdef double[::1] vb = np.zeros(C)
    cdef double[:, ::1] gW = np.empty((d, C))
    cdef double[::1] gb = np.empty(C)
    cdef double[::1] z = np.empty(C)
    cdef double[::1] p = np.empty(C)
    cdef i64[:, ::1] pview = None
    cdef bint minibatch = 0 < batch < m
    if minibatch:
        pview = perms
    cdef double prev = np.inf, loss = np.inf
    cdef double zmax, esum, xa, factor, acc
    cdef Py_ssize_t epoch, bstart, bend, bsize, i, ii, j, k
    cdef int streak = 0, epochs_run = 0

    for epoch in range(epochs):
        bstart = 0
        while bstart < m:
            bend = min(bstart + batch, m) if minibatch else m
            bsize = bend - bstart
            for k in range(d):
                for j in range(C):
                    gW[k, j] = 0.0
            for j in range(C):
                gb[j] = 0.0
            for ii in range(bstart, bend):
                i = pview[epoch, ii] if minibatch else ii
                for j in range(C):
                    z[j] = b[j]
                for k in range(d):
                    xa = X[i, k]
                    for j in range(C):
                        z[j] += xa * W[k, j]
                zmax = _row_max(z, C)
                esum = 0.0
                for j in range(C):
                    p[j] = exp(z[j] - zmax)
                    esum += p[j]
                for j in range(C):
                    p[j] /= esum
                p[y[i]] -= 1.0
                for k in range(d):
                    xa = X[i, k]
                    for j in range(C):
                        gW[k, j] += xa * p[j]
                for j in range(C):
                    gb[j] += p[j]
            factor = loss_scale * m / bsize
            for k in range(d):
                for j in range(C):
                    vW[k, j] = momentum * vW[k, j] + factor * gW[k, j]
                    W[k, j] -= lr * vW[k, j]
            for j in range(C):
                vb[j] = momentum * vb[j] + factor * gb[j]
                b[j] -= lr * vb[j]
            bstart = bend

        acc = 0.0
        for i in range(m):
            for j in range(C):
                z[j] = b[j]
            for k in range(d):
                xa = X[i, k]
                for j in range(C):
                    z[j] += xa * W[k, j]
            zmax = _row_max(z, C)
            esum = 0.0
            for j in range(C):
                esum += exp(z[j] - zmax)
            acc += log(esum) + zmax - z[y[i]]
        loss = loss_scale * acc
        epochs_run = epoch + 1
        if prev - loss < plateau_tol:
            streak += 1
            if streak >= patience:
                break
        else:
            streak = 0
        prev = loss
    return float(loss), epochs_run


def train_mlp(double[:, ::1] X, i64[::1] y,
              double[:, ::1] W1, double[::1] b1,
              double[:, ::1] W2, double[::1] b2,
              double[:, ::1] W3, double[::1] b3,
              double lr, double momentum, int epochs, double loss_scale,
              Py_ssize_t batch, perms, double plateau_tol, int patience):
    cdef Py_ssize_t m = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t H = W1.shape[1], C = W3.shape[1]
    cdef double[:, ::1] vW1 = np.zeros((d, H)), vW2 = np.zeros((H, H)), vW3 = np.zeros((H, C))
    cdef double[::1] vb1 = np.zeros(H), vb2 = np.zeros(H), vb3 = np.zeros(C)
    cdef double[:, ::1] gW1 = np.empty((d, H)), gW2 = np.empty((H, H)), gW3 = np.empty((H, C))
    cdef double[::1] gb1 = np.empty(H), gb2 = np.empty(H), gb3 = np.empty(C)
    cdef double[::1] h1 = np.empty(H), h2 = np.empty(H)
    cdef double[::1] z = np.empty(C), d3 = np.empty(C)
    cdef double[::1] d1 = np.empty(H), d2 = np.empty(H)
    cdef i64[:, ::1] pview = None
    cdef bint minibatch = 0 < batch < m
    if minibatch:
        pview = perms
    cdef double prev = np.inf, loss = np.inf
    cdef double zmax, esum, xa, factor, acc, t
    cdef Py_ssize_t epoch, bstart, bend, bsize, i, ii, j, k
    cdef int streak = 0, epochs_run = 0

    for epoch in range(epochs):
        bstart = 0
        while bstart < m:
            bend = min(bstart + batch, m) if minibatch else m
            bsize = bend - bstart
            gW1[:, :] = 0.0
            gW2[:, :] = 0.0
            gW3[:, :] = 0.0
            gb1[:] = 0.0
            gb2[:] = 0.0
            gb3[:] = 0.0
            for ii in range(bstart, bend):
                i = pview[epoch, ii] if minibatch else ii
                # forward
                for j in range(H):
                    h1[j] = b1[j]
                for k in range(d):
                    xa = X[i, k]
                    for j in range(H):
                        h1[j] += xa * W1[k, j]
                for j in range(H):
                    if h1[j] < 0.0:
                        h1[j] = 0.0
                for j in range(H):
                    h2[j] = b2[j]
                for k in range(H):
                    xa = h1[k]
                    if xa != 0.0:
                        for j in range(H):
                            h2[j] += xa * W2[k, j]
                for j in range(H):
                    if h2[j] < 0.0:
                        h2[j] = 0.0
                for j in range(C):
                    z[j] = b3[j]
                for k in range(H):
                    xa = h2[k]
                    if xa != 0.0:
                        for j in range(C):
                            z[j] += xa * W3[k, j]
                zmax = _row_max(z, C)
                esum = 0.0
                for j in range(C):
                    d3[j] = exp(z[j] - zmax)
                    esum += d3[j]
                for j in range(C):
                    d3[j] /= esum
                d3[y[i]] -= 1.0
                # backward
                for k in range(H):
                    t = 0.0
                    if h2[k] > 0.0:
                        for j in range(C):
                            t += W3[k, j] * d3[j]
                    d2[k] = t
                for k in range(H):
                    t = 0.0
                    if h1[k] > 0.0:
                        for j in range(H):
                            t += W2[k, j] * d2[j]
                    d1[k] = t
                for k in range(d):
                    xa = X[i, k]
                    if xa != 0.0:
                        for j in range(H):
                            gW1[k, j] += xa * d1[j]
                for j in range(H):
                    gb1[j] += d1[j]
                for k in range(H):
                    xa = h1[k]
                    if xa != 0.0:
                        for j in range(H):
                            gW2[k, j] += xa * d2[j]
                for j in range(H):
                    gb2[j] += d2[j]
                for k in range(H):
                    xa = h2[k]
                    if xa != 0.0:
                        for j in range(C):
                            gW3[k, j] += xa * d3[j]
                for j in range(C):
                    gb3[j] += d3[j]
            factor = loss_scale * m / bsize
            for k in range(d):
                for j in range(H):
                    vW1[k, j] = momentum * vW1[k, j] + factor * gW1[k, j]
                    W1[k, j] -= lr * vW1[k, j]
            for j in range(H):
                vb1[j] = momentum * vb1[j] + factor * gb1[j]
                b1[j] -= lr * vb1[j]
            for k in range(H):
                for j in range(H):
                    vW2[k, j] = momentum * vW2[k, j] + factor * gW2[k, j]
                    W2[k, j] -= lr * vW2[k, j]
            for j in range(H):
                vb2[j] = momentum * vb2[j] + factor * gb2[j]
                b2[j] -= lr * vb2[j]
            for k in range(H):
                for j in range(C):
                    vW3[k, j] = momentum * vW3[k, j] + factor * gW3[k, j]
                    W3[k, j] -= lr * vW3[k, j]
            for j in range(C):
                vb3[j] = momentum * vb3[j] + factor * gb3[j]
                b3[j] -= lr * vb3[j]
            bstart = bend

        acc = 0.0
        for i in range(m):
            for j in range(H):
                h1[j] = b1[j]
            for k in range(d):
                xa = X[i, k]
                for j in range(H):
                    h1[j] += xa * W1[k, j]
            for j in range(H):
                if h1[j] < 0.0:
                    h1[j] = 0.0
            for j in range(H):
                h2[j] = b2[j]
            for k in range(H):
                xa = h1[k]
                if xa != 0.0:
                    for j in range(H):
                        h2[j] += xa * W2[k, j]
            for j in range(H):
                if h2[j] < 0.0:
                    h2[j] = 0.0
            for j in range(C):
                z[j] = b3[j]
            for k in range(H):
                xa = h2[k]
                if xa != 0.0:
                    for j in range(C):
                        z[j] += xa * W3[k, j]
            zmax = _row_max(z, C)
            esum = 0.0
            for j in range(C):
                esum += exp(z[j] - zmax)
            acc += log(esum) + zmax - z[y[i]]
        loss = loss_scale * acc
        epochs_run = epoch + 1
        if prev - loss < plateau_tol:
            streak += 1
            if streak >= patience:
                break
        else:
            streak = 0
        prev = loss
    return float(loss), epochs_run
