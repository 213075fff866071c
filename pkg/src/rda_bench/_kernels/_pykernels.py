"""Numpy fallback for the threshold-scan kernels.

The compiled backend mirrors these routines loop for loop; prefix sums are
sequential (np.cumsum) so both backends produce bit-identical results.
Cut index m splits a sorted column into [0, m) left and [m, n) right.
"""

import numpy as np


def stump_scan(xs, sy, w_neg, w_total):
    """Best decision-stump cut on one pre-sorted feature column.

    xs: sorted feature values, sy: w_i * y_i in the same order (y = +/-1),
    w_neg: total weight of the -1 class, w_total: total weight.
    Returns (error, cut_index, polarity) with polarity +1 meaning
    "predict +1 strictly right of the cut". Ties resolve to the lowest
    cut index, then polarity +1.
    """
    n = xs.shape[0]
    prefix = np.cumsum(sy)
    best_err = w_neg  # m = 0, polarity +1: everything predicted +1
    best_m = 0
    best_pol = 1
    err0_neg = w_total - w_neg
    if err0_neg < best_err:
        best_err = err0_neg
        best_pol = -1
    for m in range(1, n + 1):
        if m < n and xs[m - 1] == xs[m]:
            continue
        err_pos = w_neg + prefix[m - 1]
        if err_pos < best_err:
            best_err = err_pos
            best_m = m
            best_pol = 1
        err_neg = w_total - err_pos
        if err_neg < best_err:
            best_err = err_neg
            best_m = m
            best_pol = -1
    return float(best_err), int(best_m), int(best_pol)


def gini_scan(xs, codes, n_classes):
    """Best weighted-Gini cut on one pre-sorted column of class codes.

    Returns (impurity, cut_index); cut_index 0 means no valid cut (all
    feature values equal). Class counts are small integers, so the float
    arithmetic is exact and order-independent.
    """
    n = xs.shape[0]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), codes] = 1.0
    left = np.cumsum(onehot, axis=0)
    sq_left = np.sum(left * left, axis=1)
    total = left[-1]
    best_imp = np.inf
    best_m = 0
    for m in range(1, n):
        if xs[m - 1] == xs[m]:
            continue
        right = total - left[m - 1]
        sq_right = float(np.sum(right * right))
        imp = (m - sq_left[m - 1] / m + (n - m) - sq_right / (n - m)) / n
        if imp < best_imp:
            best_imp = imp
            best_m = m
    if best_m == 0:
        return np.inf, 0
    return float(best_imp), int(best_m)


def mse_scan(xs, r):
    """Best squared-error cut for a regression stump on a sorted column.

    Maximizes sum_left^2/n_left + sum_right^2/n_right. Returns
    (gain, cut_index, sum_left, sum_total); cut_index 0 means no valid cut.
    """
    n = xs.shape[0]
    prefix = np.cumsum(r)
    total = prefix[-1]
    best_gain = -np.inf
    best_m = 0
    best_sl = 0.0
    for m in range(1, n):
        if xs[m - 1] == xs[m]:
            continue
        sl = prefix[m - 1]
        sr = total - sl
        gain = sl * sl / m + sr * sr / (n - m)
        if gain > best_gain:
            best_gain = gain
            best_m = m
            best_sl = sl
    return float(best_gain), int(best_m), float(best_sl), float(total)
