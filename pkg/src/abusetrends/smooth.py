"""Presentation-layer smoothers: centered rolling means and penalized splines.

The spline smoother is a penalized regression on a uniform cubic B-spline
basis with a second-difference penalty on the coefficients.  Because the
basis knots are equispaced, the penalty's null space is exactly the
linear functions: as the penalty grows the fit approaches the best line,
and data already on a line is reproduced for any penalty.  The default
penalty is chosen by generalized cross-validation.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .splines import BSplineBasis

GCV_GRID = np.logspace(-6.0, 8.0, 57)


@dataclass(frozen=True, eq=False)
class SmoothedSeries:
    """Fitted values plus the smoother settings that produced them."""

    values: np.ndarray
    metadata: dict
    start_date: dt.date | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def dates(self) -> list[dt.date]:
        if self.start_date is None:
            raise ValueError("series has no start date")
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self))]


def rolling_mean(values, window: int = 7, start_date: dt.date | None = None) -> SmoothedSeries:
    """Centered moving average; endpoints average the truncated window.

    ``window`` must be a positive odd integer no longer than the series.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("input series must be one-dimensional")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    if window > len(x):
        raise ValueError(f"window {window} exceeds series length {len(x)}")
    kernel = np.ones(window)
    sums = np.convolve(x, kernel, mode="same")
    counts = np.convolve(np.ones_like(x), kernel, mode="same")
    return SmoothedSeries(
        values=sums / counts,
        metadata={"smoother": "rolling-mean", "window": window},
        start_date=start_date,
    )


def _second_difference(k: int) -> np.ndarray:
    d = np.zeros((k - 2, k))
    for r in range(k - 2):
        d[r, r : r + 3] = (1.0, -2.0, 1.0)
    return d


def _default_segments(n: int) -> int:
    # keep the basis size at or below the data size so penalty 0 stays solvable
    return max(1, min(36, n // 4, n - 3))


def spline_smooth(
    values,
    penalty: float | None = None,
    n_segments: int | None = None,
    start_date: dt.date | None = None,
) -> SmoothedSeries:
    """Penalized least-squares spline fit of a daily series.

    Args:
        values: numeric series, length at least 4, all finite.
        penalty: non-negative smoothing weight on squared second
            differences of the spline coefficients; ``None`` selects it by
            generalized cross-validation over a log-spaced grid.
        n_segments: spline segments on [0, 1]; defaults to a size that
            scales with the series length.

    Returns:
        SmoothedSeries whose metadata records the basis knots, degree, and
        penalty actually used.
    """
    y = np.asarray(values, dtype=np.float64)
    if y.ndim != 1:
        raise ValueError("input series must be one-dimensional")
    if len(y) < 4:
        raise ValueError("series must have at least 4 points")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if penalty is not None and (not np.isfinite(penalty) or penalty < 0):
        raise ValueError("penalty must be a non-negative finite number")

    n = len(y)
    segments = _default_segments(n) if n_segments is None else n_segments
    basis = BSplineBasis.uniform(segments, degree=3)
    u = np.arange(n, dtype=np.float64) / (n - 1)
    design = basis.design_matrix(u)
    diff = _second_difference(basis.n_basis)

    gram = design.T @ design
    pen_mat = diff.T @ diff
    moment = design.T @ y

    chosen = penalty
    if chosen is None:
        best = (np.inf, GCV_GRID[0])
        for lam in GCV_GRID:
            score = _gcv_score(gram, pen_mat, design, moment, y, lam)
            if score < best[0]:
                best = (score, lam)
        chosen = float(best[1])

    coef = _solve_penalized(gram, pen_mat, moment, chosen)
    fitted = design @ coef
    return SmoothedSeries(
        values=fitted,
        metadata={
            "smoother": "penalized-spline",
            "penalty": float(chosen),
            "penalty_source": "gcv" if penalty is None else "given",
            "degree": basis.degree,
            "knots": basis.knots.tolist(),
            "n_basis": basis.n_basis,
        },
        start_date=start_date,
    )


def _solve_penalized(gram, pen_mat, moment, lam: float) -> np.ndarray:
    system = gram + lam * pen_mat
    try:
        return np.linalg.solve(system, moment)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(system, moment, rcond=None)[0]


def _gcv_score(gram, pen_mat, design, moment, y, lam: float) -> float:
    coef = _solve_penalized(gram, pen_mat, moment, lam)
    resid = y - design @ coef
    try:
        trace_h = float(np.trace(np.linalg.solve(gram + lam * pen_mat, gram)))
    except np.linalg.LinAlgError:
        return np.inf
    n = len(y)
    denom = n - trace_h
    if denom <= 1e-8:
        return np.inf
    return n * float(resid @ resid) / denom**2
