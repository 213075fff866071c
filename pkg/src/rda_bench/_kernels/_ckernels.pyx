# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled threshold-scan kernels.

Arithmetic mirrors _pykernels exactly: sequential prefix sums, ascending
cut scan, strict-improvement tie-breaks.
"""

from libc.stdint cimport int64_t

import numpy as np


def stump_scan(double[::1] xs, double[::1] sy, double w_neg, double w_total):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m, best_m = 0
    cdef int best_pol = 1
    cdef double run = 0.0
    cdef double best_err = w_neg
    cdef double err_pos, err_neg

    err_neg = w_total - w_neg
    if err_neg < best_err:
        best_err = err_neg
        best_pol = -1
    for m in range(1, n + 1):
        run += sy[m - 1]
        if m < n and xs[m - 1] == xs[m]:
            continue
        err_pos = w_neg + run
        if err_pos < best_err:
            best_err = err_pos
            best_m = m
            best_pol = 1
        err_neg = w_total - err_pos
        if err_neg < best_err:
            best_err = err_neg
            best_m = m
            best_pol = -1
    return best_err, best_m, best_pol


def gini_scan(double[::1] xs, int64_t[::1] codes, int n_classes):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m, k, best_m = 0
    cdef double best_imp = np.inf
    cdef double sq_left = 0.0
    cdef double sq_right, imp, c, t
    cdef double[::1] left = np.zeros(n_classes)
    cdef double[::1] total = np.zeros(n_classes)

    for m in range(n):
        total[codes[m]] += 1.0
    for m in range(1, n):
        k = codes[m - 1]
        # incremental update of sum of squared counts: (c+1)^2 - c^2
        sq_left += 2.0 * left[k] + 1.0
        left[k] += 1.0
        if xs[m - 1] == xs[m]:
            continue
        sq_right = 0.0
        for k in range(n_classes):
            c = left[k]
            t = total[k] - c
            sq_right += t * t
        imp = (m - sq_left / m + (n - m) - sq_right / (n - m)) / n
        if imp < best_imp:
            best_imp = imp
            best_m = m
    if best_m == 0:
        return np.inf, 0
    return best_imp, best_m


def mse_scan(double[::1] xs, double[::1] r):
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t m, best_m = 0
    cdef double run = 0.0
    cdef double total = 0.0
    cdef double best_gain = -np.inf
    cdef double best_sl = 0.0
    cdef double sl, sr, gain

    for m in range(n):
        total += r[m]
    for m in range(1, n):
        run += r[m - 1]
        if xs[m - 1] == xs[m]:
            continue
        sl = run
        sr = total - sl
        gain = sl * sl / m + sr * sr / (n - m)
        if gain > best_gain:
            best_gain = gain
            best_m = m
            best_sl = sl
    return best_gain, best_m, best_sl, total
