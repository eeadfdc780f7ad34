"""Deterministic quadrature on uniform node samples."""

from __future__ import annotations

import numpy as np


def simpson_nodes(y, dx):
    """Composite Simpson integral of samples y on a uniform grid of step dx.

    Even interval counts use the 1/3 rule throughout; odd counts >= 3 finish
    with the 3/8 rule on the last three intervals; a single interval falls
    back to the trapezoid.  Exact for polynomials up to degree 3 (2 for the
    trapezoid case), hence for constants and linear coefficients.
    """
    y = np.asarray(y, dtype=np.float64)
    m = len(y) - 1
    if m < 0:
        raise ValueError("need at least one sample")
    if m == 0:
        return 0.0
    if m == 1:
        return dx * (y[0] + y[1]) / 2.0
    if m % 2 == 0:
        return _simpson_13(y, dx)
    head = _simpson_13(y[: m - 2], dx) if m > 3 else 0.0
    tail = 3.0 * dx / 8.0 * (y[m - 3] + 3.0 * y[m - 2] + 3.0 * y[m - 1] + y[m])
    return head + tail


def _simpson_13(y, dx):
    return dx / 3.0 * (y[0] + y[-1] + 4.0 * float(np.sum(y[1:-1:2])) + 2.0 * float(np.sum(y[2:-1:2])))


def left_rectangle_nodes(y, dx):
    """Left-point rectangle rule on uniform samples (drops the last node)."""
    y = np.asarray(y, dtype=np.float64)
    return dx * float(np.sum(y[:-1]))
