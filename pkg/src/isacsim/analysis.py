"""Slope and diversity-order estimation from simulated curves."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import ModelError

__all__ = ["SlopeFit", "fit_highsnr_slope", "fit_diversity"]


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line fit on a declared abscissa transform."""

    slope: float
    intercept: float
    r_squared: float
    window: tuple


def _least_squares(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), min(r2, 1.0)


def fit_highsnr_slope(snr_db, rate, window_db) -> SlopeFit:
    """Rate growth in bits per doubling of SNR over a dB window.

    Fits rate against log2 of the linear SNR for points with
    window_db[0] <= snr_db <= window_db[1].
    """
    snr_db = np.asarray(snr_db, dtype=float)
    rate = np.asarray(rate, dtype=float)
    lo, hi = window_db
    mask = (snr_db >= lo) & (snr_db <= hi)
    if np.count_nonzero(mask) < 3:
        raise ModelError("need at least 3 points inside the fit window")
    x = snr_db[mask] * (np.log2(10.0) / 10.0)  # log2 of the linear SNR
    slope, intercept, r2 = _least_squares(x, rate[mask])
    return SlopeFit(slope=slope, intercept=intercept, r_squared=r2,
                    window=(float(snr_db[mask].min()), float(snr_db[mask].max())))


def fit_diversity(p_db, op, op_window=(1e-4, 1e-1)) -> SlopeFit:
    """Diversity order from the log-log decay of outage vs SNR.

    Fits log10(op) against log10 of the linear SNR, restricted to points
    with op inside ``op_window``; the diversity estimate is -slope.
    Zero-probability bins (no observed events) are dropped with a warning,
    never imputed.
    """
    p_db = np.asarray(p_db, dtype=float)
    op = np.asarray(op, dtype=float)
    nonzero = op > 0.0
    if np.count_nonzero(~nonzero):
        warnings.warn("dropping outage bins with zero observed events",
                      stacklevel=2)
    lo, hi = op_window
    mask = nonzero & (op >= lo) & (op <= hi)
    if np.count_nonzero(mask) < 3:
        raise ModelError("need at least 3 outage points inside the window")
    x = p_db[mask] / 10.0  # log10 of the linear SNR
    slope, intercept, r2 = _least_squares(x, np.log10(op[mask]))
    return SlopeFit(slope=slope, intercept=intercept, r_squared=r2,
                    window=(float(p_db[mask].min()), float(p_db[mask].max())))
