"""Probability-threshold filtering and adjusted-count assembly.

A filter written ``x/y`` keeps posts whose offensiveness probability is
strictly greater than x/100 and whose hatefulness probability is strictly
greater than y/100.  Note the strictness: a ``25/0`` filter still drops
posts whose hate score is exactly zero.

Per-day pass proportions applied to the exhaustive daily totals give the
adjusted series, the estimate of the true daily abusive-post counts.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError
from .ingest import CountSeries, DailySample, ScoredTweet

FLAG_OBSERVED = "observed"
FLAG_IMPUTED = "imputed-empty"

EMPTY_POLICIES = ("zero", "neighbor-mean")


@dataclass(frozen=True)
class ThresholdFilter:
    """Pair of strict lower bounds on the two classifier probabilities."""

    x_off: float
    y_hate: float

    def __post_init__(self):
        for name, value in (("x_off", self.x_off), ("y_hate", self.y_hate)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1]")

    @classmethod
    def from_notation(cls, notation: str) -> "ThresholdFilter":
        """Parse the ``x/y`` percent notation, e.g. ``"25/50"`` -> (0.25, 0.50)."""
        parts = notation.strip().split("/")
        if len(parts) != 2:
            raise ValueError(f"filter notation {notation!r} is not of the form x/y")
        try:
            x, y = (float(part) for part in parts)
        except ValueError:
            raise ValueError(f"filter notation {notation!r} has non-numeric parts") from None
        if not (0.0 <= x <= 100.0 and 0.0 <= y <= 100.0):
            raise ValueError(f"filter notation {notation!r} outside 0..100")
        return cls(x_off=x / 100.0, y_hate=y / 100.0)

    def notation(self) -> str:
        return f"{self.x_off * 100:g}/{self.y_hate * 100:g}"


def passes(filt: ThresholdFilter, tweet: ScoredTweet) -> bool:
    """True iff both scores strictly exceed their thresholds."""
    return tweet.p_off > filt.x_off and tweet.p_hate > filt.y_hate


@dataclass(frozen=True, eq=False)
class ProportionSeries:
    """Per-day fraction of sampled posts passing a filter.

    ``imputed_empty`` marks days whose sample was empty, where the value
    comes from the empty-day policy rather than an observation.
    """

    start_date: dt.date
    values: np.ndarray
    imputed_empty: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        imputed = np.asarray(self.imputed_empty, dtype=bool)
        if values.shape != imputed.shape or values.ndim != 1:
            raise ValueError("values and imputed_empty must be 1-d and equal length")
        if np.any((values < 0.0) | (values > 1.0)):
            raise ValueError("proportions must lie in [0, 1]")
        values.setflags(write=False)
        imputed.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "imputed_empty", imputed)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProportionSeries):
            return NotImplemented
        return (
            self.start_date == other.start_date
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.imputed_empty, other.imputed_empty)
        )

    def flags(self) -> list[str]:
        return [FLAG_IMPUTED if i else FLAG_OBSERVED for i in self.imputed_empty]

    def dates(self) -> list[dt.date]:
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self))]


@dataclass(frozen=True, eq=False)
class AdjustedSeries:
    """Integer estimate of true daily abusive counts: proportion times total."""

    start_date: dt.date
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        if values.ndim != 1:
            raise ValueError("adjusted series must be one-dimensional")
        if np.any(values < 0):
            raise ValueError("adjusted series contains negative values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdjustedSeries):
            return NotImplemented
        return self.start_date == other.start_date and np.array_equal(
            self.values, other.values
        )

    def dates(self) -> list[dt.date]:
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self))]


@dataclass(frozen=True, eq=False)
class ScoreHistogram:
    """Equal-width histograms of both classifier scores over [0, 1]."""

    bin_edges: np.ndarray
    off_counts: np.ndarray
    hate_counts: np.ndarray


def daily_proportions(
    samples: list[DailySample],
    filt: ThresholdFilter,
    empty_policy: str = "zero",
) -> ProportionSeries:
    """Compute the per-day fraction of posts passing ``filt``.

    Empty sampled days carry no information; they are filled per
    ``empty_policy`` ("zero" or "neighbor-mean", the mean of the nearest
    non-empty day on each side) and flagged imputed.
    """
    if not samples:
        raise ValueError("samples collection is empty")
    if empty_policy not in EMPTY_POLICIES:
        raise ValueError(f"unknown empty policy {empty_policy!r}")
    for prev, cur in zip(samples, samples[1:]):
        if cur.date != prev.date + dt.timedelta(days=1):
            raise ValueError(
                f"samples are not contiguous: {prev.date} followed by {cur.date}"
            )

    n_days = len(samples)
    values = np.zeros(n_days)
    imputed = np.zeros(n_days, dtype=bool)
    for i, sample in enumerate(samples):
        if len(sample) == 0:
            imputed[i] = True
        else:
            n_pass = sum(1 for tweet in sample.tweets if passes(filt, tweet))
            values[i] = n_pass / len(sample)

    if empty_policy == "neighbor-mean" and imputed.any():
        observed = np.flatnonzero(~imputed)
        if observed.size == 0:
            raise ValueError("neighbor-mean policy needs at least one non-empty day")
        for i in np.flatnonzero(imputed):
            left = observed[observed < i]
            right = observed[observed > i]
            neighbors = []
            if left.size:
                neighbors.append(values[left[-1]])
            if right.size:
                neighbors.append(values[right[0]])
            values[i] = float(np.mean(neighbors))

    return ProportionSeries(
        start_date=samples[0].date, values=values, imputed_empty=imputed
    )


def adjust(props: ProportionSeries, counts: CountSeries) -> AdjustedSeries:
    """Multiply proportions into daily totals, rounding half to even.

    Rounding to an integer is required by the Poisson likelihood downstream;
    half-to-even keeps the rounding unbiased.  The result never exceeds the
    daily total because proportions are at most one.
    """
    if props.start_date != counts.start_date or len(props) != len(counts):
        raise AlignmentError(
            f"proportions ({props.start_date}, n={len(props)}) and counts "
            f"({counts.start_date}, n={len(counts)}) are not aligned"
        )
    adjusted = np.rint(props.values * counts.values).astype(np.int64)
    return AdjustedSeries(start_date=props.start_date, values=adjusted)


def score_histogram(tweets, n_bins: int) -> ScoreHistogram:
    """Histogram both score distributions with ``n_bins`` equal-width bins.

    The final bin includes its right edge, so a score of exactly 1.0 lands
    in the last bin.  An empty input yields all-zero counts.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be at least 1")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    p_off = np.array([t.p_off for t in tweets], dtype=np.float64)
    p_hate = np.array([t.p_hate for t in tweets], dtype=np.float64)
    off_counts, _ = np.histogram(p_off, bins=edges)
    hate_counts, _ = np.histogram(p_hate, bins=edges)
    return ScoreHistogram(bin_edges=edges, off_counts=off_counts, hate_counts=hate_counts)
