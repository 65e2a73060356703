"""Command-line front end for the abuse-trend pipeline.

Subcommands: validate, filter, fit, simulate, smooth, report.  Exit
codes: 0 success, 2 config error, 3 ingest error, 4 model error.  The
ABUSETRENDS_OUTDIR environment variable sets the default output
directory.
"""

from __future__ import annotations

import datetime as dt
import functools
import json
from pathlib import Path

import click

from .errors import AbuseTrendsError, ConfigError, IngestError, ModelError
from .filters import ThresholdFilter, adjust, daily_proportions, EMPTY_POLICIES
from .ingest import (
    DateWindow,
    load_series,
    parse_counts,
    parse_scored_tweets,
    write_series,
)
from .pipeline import (
    build_config,
    default_outdir,
    load_config_file,
    run_pipeline,
    write_adjusted_csv,
    write_proportions_csv,
    ADJUSTED_CSV,
    PROPORTIONS_CSV,
    DRAWS_JSON,
    FIT_SUMMARY_CSV,
    FIT_SUMMARY_JSON,
)
from .simulate import ParamCurves, constant, parse_curve_spec, simulate
from .smooth import rolling_mean, spline_smooth
from .tvbarc import McmcConfig, ModelSpec, fit, summarize


def _exit_code(exc: AbuseTrendsError) -> int:
    if isinstance(exc, ConfigError):
        return 2
    if isinstance(exc, IngestError):
        return 3
    if isinstance(exc, ModelError):
        return 4
    return 1


def mapped_errors(func):
    """Translate library exceptions into the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except AbuseTrendsError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(_exit_code(exc))
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(2)

    return wrapper


class IsoDate(click.ParamType):
    name = "date"

    def convert(self, value, param, ctx):
        if isinstance(value, dt.date):
            return value
        try:
            return dt.date.fromisoformat(value)
        except ValueError:
            self.fail(f"{value!r} is not a YYYY-MM-DD date", param, ctx)


ISO_DATE = IsoDate()


@click.group()
@click.version_option()
def main():
    """Reconstruct abusive-post count series and fit trend models."""


@main.command()
@click.option("--scored", required=True, type=click.Path(), help="Scored-post CSV.")
@click.option("--counts", required=True, type=click.Path(), help="Daily-count CSV.")
@click.option("--start", required=True, type=ISO_DATE)
@click.option("--end", required=True, type=ISO_DATE)
@mapped_errors
def validate(scored, counts, start, end):
    """Check that the input files parse cleanly over the window."""
    window = DateWindow(start, end)
    for label, path in (("scored", scored), ("counts", counts)):
        if not Path(path).is_file():
            raise ConfigError(f"{label} file does not exist: {path}")
    samples = parse_scored_tweets(scored, window)
    series = parse_counts(counts, window)
    n_rows = sum(len(s) for s in samples)
    n_empty = sum(1 for s in samples if len(s) == 0)
    click.echo(f"window: {window.start}..{window.end} ({len(window)} days)")
    click.echo(f"scored rows accepted: {n_rows} ({n_empty} empty days)")
    click.echo(f"count total: {int(series.values.sum())}")


@main.command("filter")
@click.option("--scored", required=True, type=click.Path())
@click.option("--counts", required=True, type=click.Path())
@click.option("--start", required=True, type=ISO_DATE)
@click.option("--end", required=True, type=ISO_DATE)
@click.option("--filter", "notation", default="25/0", show_default=True,
              help="Threshold filter in x/y percent notation.")
@click.option("--empty-policy", default="zero", show_default=True,
              type=click.Choice(EMPTY_POLICIES))
@click.option("--outdir", type=click.Path(), default=None,
              help="Output directory (default: $ABUSETRENDS_OUTDIR or '.').")
@mapped_errors
def filter_cmd(scored, counts, start, end, notation, empty_policy, outdir):
    """Compute daily pass proportions and the adjusted count series."""
    window = DateWindow(start, end)
    for label, path in (("scored", scored), ("counts", counts)):
        if not Path(path).is_file():
            raise ConfigError(f"{label} file does not exist: {path}")
    try:
        filt = ThresholdFilter.from_notation(notation)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    samples = parse_scored_tweets(scored, window)
    series = parse_counts(counts, window)
    props = daily_proportions(samples, filt, empty_policy)
    adjusted = adjust(props, series)
    out = Path(outdir) if outdir else default_outdir()
    out.mkdir(parents=True, exist_ok=True)
    write_proportions_csv(props, out / PROPORTIONS_CSV)
    write_adjusted_csv(adjusted, out / ADJUSTED_CSV)
    click.echo(f"wrote {out / PROPORTIONS_CSV} and {out / ADJUSTED_CSV}")


@main.command("fit")
@click.option("--series", "series_path", required=True, type=click.Path(),
              help="Adjusted/count series CSV (date,count).")
@click.option("--lags", default=10, show_default=True, help="Lag order p.")
@click.option("--mu-basis", default=8, show_default=True)
@click.option("--lag-basis", default=5, show_default=True)
@click.option("--degree", default=3, show_default=True)
@click.option("--margin", default=0.01, show_default=True)
@click.option("--iters", default=320000, show_default=True)
@click.option("--burn", default=60000, show_default=True)
@click.option("--thin", default=52, show_default=True)
@click.option("--seed", required=True, type=int)
@click.option("--step-b", default=0.05, show_default=True)
@click.option("--step-c", default=0.25, show_default=True)
@click.option("--target-accept", default=0.3, show_default=True)
@click.option("--outdir", type=click.Path(), default=None)
@mapped_errors
def fit_cmd(series_path, lags, mu_basis, lag_basis, degree, margin, iters,
            burn, thin, seed, step_b, step_c, target_accept, outdir):
    """Fit the autoregressive Poisson model and export posterior summaries."""
    if not Path(series_path).is_file():
        raise ConfigError(f"series file does not exist: {series_path}")
    series = load_series(series_path, value_columns=("count",))
    try:
        spec = ModelSpec(lag_order=lags, n_basis_mu=mu_basis, n_basis_lag=lag_basis,
                         spline_degree=degree, stability_margin=margin)
        mcmc = McmcConfig(n_iter=iters, n_burn=burn, thin=thin, seed=seed,
                          step_b=step_b, step_c=step_c, target_accept=target_accept)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        draws = fit(series, spec, mcmc)
        summary = summarize(draws)
    except ValueError as exc:
        raise ModelError(f"fit stage: {exc}") from exc
    out = Path(outdir) if outdir else default_outdir()
    out.mkdir(parents=True, exist_ok=True)
    draws.save(out / DRAWS_JSON)
    summary.to_csv(out / FIT_SUMMARY_CSV)
    summary.to_json(out / FIT_SUMMARY_JSON)
    rates = ", ".join(f"{k}={v:.2f}" for k, v in draws.accept_rates.items())
    click.echo(f"retained {len(draws)} draws; acceptance: {rates}")
    click.echo(f"wrote {out / FIT_SUMMARY_CSV}, {out / FIT_SUMMARY_JSON}, {out / DRAWS_JSON}")


@main.command("simulate")
@click.option("--mu", "mu_spec", required=True,
              help="Trend curve: a number, const:V, or pwl:u:v,u:v,...")
@click.option("--lag", "lag_specs", multiple=True,
              help="Lag curve as I=SPEC (e.g. 1=const:0.4); repeatable.")
@click.option("--lags", "lag_order", default=None, type=int,
              help="Total lag count; defaults to the largest index given.")
@click.option("-T", "--length", "t_len", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--start-date", default="2019-01-01", show_default=True, type=ISO_DATE)
@click.option("--out", "out_path", required=True, type=click.Path())
@mapped_errors
def simulate_cmd(mu_spec, lag_specs, lag_order, t_len, seed, start_date, out_path):
    """Generate a synthetic series from known trend and lag functions."""
    try:
        mu_fn = parse_curve_spec(mu_spec)
        given: dict[int, object] = {}
        for item in lag_specs:
            index, _, spec_text = item.partition("=")
            i = int(index)
            if i < 1:
                raise ValueError(f"lag index must be >= 1, got {i}")
            if i in given:
                raise ValueError(f"lag {i} specified twice")
            given[i] = parse_curve_spec(spec_text)
        p = lag_order if lag_order is not None else max(given, default=0)
        if p < max(given, default=0):
            raise ValueError("--lags is smaller than the largest lag index given")
        curves = ParamCurves(
            mu_fn=mu_fn,
            lag_fns=tuple(given.get(i, constant(0.0)) for i in range(1, p + 1)),
        )
        series = simulate(curves, t_len=t_len, seed=seed, start_date=start_date)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_series(series, out_path)
    click.echo(f"wrote {out_path} ({t_len} days)")


def _load_float_series(path):
    """Read a daily float series: date plus the first recognized value column.

    Accepts count files, COVID case files, and the pipeline's
    proportions.csv alike.
    """
    import csv as _csv
    import datetime as _dt

    with open(path, newline="", encoding="utf-8") as handle:
        reader = _csv.DictReader(handle)
        header = reader.fieldnames or ()
        column = next(
            (c for c in ("count", "new_cases", "proportion", "value") if c in header),
            None,
        )
        if column is None:
            raise IngestError(
                f"{path}: expected a count, new_cases, proportion, or value column"
            )
        rows = []
        for row in reader:
            try:
                rows.append((_dt.date.fromisoformat(row["date"]),
                             float(row[column])))
            except ValueError as exc:
                raise IngestError(f"{path} line {reader.line_num}: {exc}") from None
    if not rows:
        raise IngestError(f"{path}: no data rows")
    rows.sort()
    start = rows[0][0]
    for offset, (day, _) in enumerate(rows):
        if day != start + dt.timedelta(days=offset):
            raise IngestError(f"{path}: dates are not contiguous at {day}")
    import numpy as _np

    return start, _np.array([v for _, v in rows])


@main.command("smooth")
@click.option("--series", "series_path", required=True, type=click.Path(),
              help="Daily series CSV (date,count / new_cases / proportion).")
@click.option("--method", type=click.Choice(["rolling", "spline"]),
              default="rolling", show_default=True)
@click.option("--window", default=7, show_default=True,
              help="Rolling window (odd).")
@click.option("--penalty", default=None, type=float,
              help="Spline penalty; omit for GCV selection.")
@click.option("--segments", default=None, type=int, help="Spline segments.")
@click.option("--out", "out_path", required=True, type=click.Path())
@mapped_errors
def smooth_cmd(series_path, method, window, penalty, segments, out_path):
    """Smooth a daily series (7-day rolling average or penalized spline)."""
    if not Path(series_path).is_file():
        raise ConfigError(f"series file does not exist: {series_path}")
    start_date, values = _load_float_series(series_path)
    if method == "rolling":
        smoothed = rolling_mean(values, window=window, start_date=start_date)
    else:
        smoothed = spline_smooth(values, penalty=penalty,
                                 n_segments=segments, start_date=start_date)
    with open(out_path, "w", newline="", encoding="utf-8") as handle:
        handle.write("date,value\n")
        for day, value in zip(smoothed.dates(), smoothed.values):
            handle.write(f"{day.isoformat()},{float(value)!r}\n")
    click.echo(f"wrote {out_path} ({smoothed.metadata})")


def _coerce_override(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


@main.command("report")
@click.option("--config", "config_path", default=None, type=click.Path(),
              help="TOML or JSON config file; flags override it.")
@click.option("--scored", type=click.Path(), default=None)
@click.option("--counts", type=click.Path(), default=None)
@click.option("--start", type=ISO_DATE, default=None)
@click.option("--end", type=ISO_DATE, default=None)
@click.option("--filter", "notation", default=None)
@click.option("--empty-policy", default=None, type=click.Choice(EMPTY_POLICIES))
@click.option("--lags", default=None, type=int)
@click.option("--iters", default=None, type=int)
@click.option("--burn", default=None, type=int)
@click.option("--thin", default=None, type=int)
@click.option("--seed", default=None, type=int)
@click.option("--outdir", type=click.Path(), default=None)
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
              help="Override any other config key; repeatable.")
@mapped_errors
def report_cmd(config_path, scored, counts, start, end, notation, empty_policy,
               lags, iters, burn, thin, seed, outdir, overrides):
    """Run the full pipeline and write all plot-ready artifacts."""
    mapping = load_config_file(config_path) if config_path else {}
    flag_values = {
        "scored": scored, "counts": counts, "start": start, "end": end,
        "filter": notation, "empty_policy": empty_policy, "lag_order": lags,
        "n_iter": iters, "n_burn": burn, "thin": thin, "seed": seed,
        "outdir": outdir,
    }
    for key, value in flag_values.items():
        if value is not None:
            mapping[key] = value
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        mapping[key] = _coerce_override(raw)
    if "outdir" not in mapping:
        mapping["outdir"] = str(default_outdir())
    config = build_config(mapping)
    result = run_pipeline(config)
    click.echo(f"pipeline complete: {len(result.artifacts)} artifacts in {result.outdir}")


if __name__ == "__main__":
    main()
