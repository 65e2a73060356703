"""Reconstruction and Bayesian modeling of daily abusive-post counts.

The pipeline pairs classifier-scored post samples with exhaustive daily
totals: per-day pass proportions under an x/y probability filter are
multiplied into the totals to form an adjusted count series, which is
then fit with a time-varying autoregressive Poisson model by MCMC.
"""

__version__ = "0.1.0"

from .filters import (
    AdjustedSeries,
    ProportionSeries,
    ScoreHistogram,
    ThresholdFilter,
    adjust,
    daily_proportions,
    passes,
    score_histogram,
)
from .ingest import (
    CountSeries,
    DailySample,
    DateWindow,
    KeywordRanking,
    ScoredTweet,
    load_series,
    parse_counts,
    parse_scored_tweets,
    rank_keywords,
    write_scored_tweets,
    write_series,
)
from .simulate import ParamCurves, constant, piecewise_linear, simulate
from .smooth import SmoothedSeries, rolling_mean, spline_smooth
from .splines import BSplineBasis, basis_eval
from .tvbarc import (
    FitSummary,
    McmcConfig,
    ModelSpec,
    PosteriorDraws,
    TvbarcParams,
    effective_sample_size,
    fit,
    lambda_at,
    log_likelihood,
    log_prior,
    model_bases,
    summarize,
)

__all__ = [
    "AdjustedSeries",
    "BSplineBasis",
    "CountSeries",
    "DailySample",
    "DateWindow",
    "FitSummary",
    "KeywordRanking",
    "McmcConfig",
    "ModelSpec",
    "ParamCurves",
    "PosteriorDraws",
    "ProportionSeries",
    "ScoreHistogram",
    "ScoredTweet",
    "SmoothedSeries",
    "ThresholdFilter",
    "TvbarcParams",
    "adjust",
    "basis_eval",
    "constant",
    "daily_proportions",
    "effective_sample_size",
    "fit",
    "lambda_at",
    "load_series",
    "log_likelihood",
    "log_prior",
    "model_bases",
    "parse_counts",
    "parse_scored_tweets",
    "passes",
    "piecewise_linear",
    "rank_keywords",
    "rolling_mean",
    "score_histogram",
    "simulate",
    "spline_smooth",
    "summarize",
    "write_scored_tweets",
    "write_series",
]
