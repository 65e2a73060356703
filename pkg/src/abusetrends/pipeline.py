"""End-to-end run orchestration: validate, filter, adjust, fit, export.

Each run writes its artifacts under one output directory together with a
manifest (config echo, seed, content hashes of the inputs) that suffices
to reproduce the run.  Artifacts are written with a ``.partial`` suffix
and renamed only when the whole run succeeds, so a failed run leaves
clearly-marked partial outputs and no fake final ones.
"""

from __future__ import annotations

import csv
import dataclasses
import datetime as dt
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import AbuseTrendsError, ConfigError, IngestError, ModelError
from .filters import ThresholdFilter, adjust, daily_proportions, EMPTY_POLICIES
from .ingest import DateWindow, parse_counts, parse_iso_date, parse_scored_tweets
from .tvbarc import McmcConfig, ModelSpec, fit, summarize

logger = logging.getLogger(__name__)

OUTDIR_ENV = "ABUSETRENDS_OUTDIR"

PROPORTIONS_CSV = "proportions.csv"
ADJUSTED_CSV = "adjusted.csv"
FIT_SUMMARY_CSV = "fit_summary.csv"
FIT_SUMMARY_JSON = "fit_summary.json"
DRAWS_JSON = "draws.json"
MANIFEST_JSON = "run_manifest.json"

_CONFIG_KEYS = {
    "scored", "counts", "start", "end", "filter", "empty_policy",
    "lag_order", "n_basis_mu", "n_basis_lag", "spline_degree",
    "stability_margin", "lag_prior_scale", "n_iter", "n_burn", "thin", "seed",
    "step_b", "step_c", "target_accept", "outdir",
}


@dataclass
class PipelineConfig:
    """Everything one run needs; mirrored verbatim into the manifest."""

    scored: Path
    counts: Path
    start: dt.date
    end: dt.date
    seed: int
    outdir: Path
    filter: str = "25/0"
    empty_policy: str = "zero"
    lag_order: int = 10
    n_basis_mu: int = 8
    n_basis_lag: int = 5
    spline_degree: int = 3
    stability_margin: float = 0.01
    lag_prior_scale: float = 0.1
    n_iter: int = 320000
    n_burn: int = 60000
    thin: int = 52
    step_b: float = 0.05
    step_c: float = 0.02
    target_accept: float = 0.3

    def window(self) -> DateWindow:
        return DateWindow(self.start, self.end)

    def threshold_filter(self) -> ThresholdFilter:
        return ThresholdFilter.from_notation(self.filter)

    def model_spec(self) -> ModelSpec:
        return ModelSpec(
            lag_order=self.lag_order,
            n_basis_mu=self.n_basis_mu,
            n_basis_lag=self.n_basis_lag,
            spline_degree=self.spline_degree,
            stability_margin=self.stability_margin,
            lag_prior_scale=self.lag_prior_scale,
        )

    def mcmc_config(self) -> McmcConfig:
        return McmcConfig(
            n_iter=self.n_iter,
            n_burn=self.n_burn,
            thin=self.thin,
            seed=self.seed,
            step_b=self.step_b,
            step_c=self.step_c,
            target_accept=self.target_accept,
        )

    def validate(self) -> None:
        for label, path in (("scored", self.scored), ("counts", self.counts)):
            if not Path(path).is_file():
                raise ConfigError(f"{label} file does not exist: {path}")
        try:
            self.window()
            self.threshold_filter()
            self.model_spec()
            self.mcmc_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.empty_policy not in EMPTY_POLICIES:
            raise ConfigError(f"unknown empty policy {self.empty_policy!r}")

    def echo(self) -> dict:
        raw = dataclasses.asdict(self)
        return {
            key: str(value) if isinstance(value, (Path, dt.date)) else value
            for key, value in raw.items()
        }


def load_config_file(path) -> dict:
    """Read a TOML or JSON config mapping; unknown keys are rejected."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file does not exist: {path}")
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    elif path.suffix == ".toml":
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    else:
        raise ConfigError(f"config file must be .toml or .json, got {path.suffix!r}")
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a table/object at top level")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def build_config(mapping: dict) -> PipelineConfig:
    """Construct and validate a PipelineConfig from a plain mapping."""
    required = {"scored", "counts", "start", "end", "seed", "outdir"}
    missing = required - set(mapping)
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(sorted(missing))}")
    unknown = set(mapping) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    values = dict(mapping)
    try:
        values["start"] = parse_iso_date(str(values["start"]))
        values["end"] = parse_iso_date(str(values["end"]))
    except ValueError as exc:
        raise ConfigError(f"bad date in config: {exc}") from exc
    values["scored"] = Path(values["scored"])
    values["counts"] = Path(values["counts"])
    values["outdir"] = Path(values["outdir"])
    try:
        config = PipelineConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "."))


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_proportions_csv(props, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "proportion", "flag"])
        for day, value, flag in zip(props.dates(), props.values, props.flags()):
            writer.writerow([day.isoformat(), repr(float(value)), flag])


def write_adjusted_csv(series, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "count"])
        for day, value in zip(series.dates(), series.values):
            writer.writerow([day.isoformat(), int(value)])


class _ArtifactDir:
    """Writes artifacts as .partial files, finalized all-or-nothing."""

    def __init__(self, outdir: Path):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.pending: list[tuple[Path, Path]] = []

    def partial_path(self, name: str) -> Path:
        partial = self.outdir / f"{name}.partial"
        self.pending.append((partial, self.outdir / name))
        return partial

    def finalize(self) -> list[Path]:
        final_paths = []
        for partial, final in self.pending:
            os.replace(partial, final)
            final_paths.append(final)
        self.pending.clear()
        return final_paths


@dataclass
class PipelineResult:
    outdir: Path
    artifacts: list[Path]
    manifest: dict


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Run validate -> filter -> adjust -> fit -> summarize -> export.

    Raises ConfigError, IngestError, or ModelError with the failing stage
    named; on failure any artifacts already produced keep their
    ``.partial`` suffix.
    """
    config.validate()
    window = config.window()
    artifacts = _ArtifactDir(Path(config.outdir))

    try:
        samples = parse_scored_tweets(config.scored, window)
        counts = parse_counts(config.counts, window)
    except IngestError as exc:
        raise type(exc)(f"ingest stage: {exc}") from exc

    try:
        props = daily_proportions(samples, config.threshold_filter(), config.empty_policy)
        adjusted = adjust(props, counts)
    except (ValueError, IngestError) as exc:
        raise IngestError(f"filter stage: {exc}") from exc
    write_proportions_csv(props, artifacts.partial_path(PROPORTIONS_CSV))
    write_adjusted_csv(adjusted, artifacts.partial_path(ADJUSTED_CSV))

    try:
        draws = fit(adjusted, config.model_spec(), config.mcmc_config())
        summary = summarize(draws)
    except ValueError as exc:
        raise ModelError(f"fit stage: {exc}") from exc
    draws.save(artifacts.partial_path(DRAWS_JSON))
    summary.to_csv(artifacts.partial_path(FIT_SUMMARY_CSV))
    summary.to_json(artifacts.partial_path(FIT_SUMMARY_JSON))

    final = artifacts.finalize()
    manifest = {
        "tool": {"name": "abusetrends", "version": __version__},
        "config": config.echo(),
        "seed": config.seed,
        "inputs": {
            "scored": {"path": str(config.scored), "sha256": sha256_file(config.scored)},
            "counts": {"path": str(config.counts), "sha256": sha256_file(config.counts)},
        },
        "artifacts": sorted(p.name for p in final),
        "created_at": dt.datetime.now(dt.timezone.utc).isoformat(),
    }
    manifest_path = Path(config.outdir) / MANIFEST_JSON
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, sort_keys=True, indent=1)
        handle.write("\n")
    return PipelineResult(
        outdir=Path(config.outdir), artifacts=final + [manifest_path], manifest=manifest
    )
