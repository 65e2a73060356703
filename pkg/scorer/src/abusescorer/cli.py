"""Command line for batch tweet scoring.

Exit codes: 0 success, 2 bad arguments, 3 input parse error, 4 backend
startup failure.
"""

from __future__ import annotations

from pathlib import Path

import click

from .backends import BackendUnavailable, make_backend
from .scoring import ParseError, read_raw_tweets, score_batch, write_scored_csv


@click.group()
@click.version_option()
def main():
    """Score raw tweet text into the scored-tweet CSV schema."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(),
              help="Raw tweet CSV (id,date,text).")
@click.option("--output", "output_path", required=True, type=click.Path(),
              help="Scored CSV to write (id,date,p_off,p_hate,text).")
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Optional JSON scoring report.")
@click.option("--backend", "backend_name", default="transformers",
              show_default=True, type=click.Choice(["transformers", "lexicon"]))
@click.option("--offensive-model", default=None,
              help="Override the offensiveness checkpoint id.")
@click.option("--hate-model", default=None,
              help="Override the hatefulness checkpoint id.")
@click.option("--batch-size", default=32, show_default=True)
def score(input_path, output_path, report_path, backend_name,
          offensive_model, hate_model, batch_size):
    """Score every tweet in the input file."""
    if not Path(input_path).is_file():
        click.echo(f"error: input file does not exist: {input_path}", err=True)
        raise SystemExit(2)
    kwargs = {}
    if backend_name == "transformers":
        if offensive_model:
            kwargs["offensive_model"] = offensive_model
        if hate_model:
            kwargs["hate_model"] = hate_model
    elif offensive_model or hate_model:
        click.echo("error: model overrides apply to the transformers backend", err=True)
        raise SystemExit(2)
    try:
        backend = make_backend(backend_name, **kwargs)
    except BackendUnavailable as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(4)
    try:
        tweets = read_raw_tweets(input_path)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(3)
    try:
        rows, report = score_batch(tweets, backend, batch_size=batch_size)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(2)
    write_scored_csv(rows, output_path)
    if report_path:
        report.to_json(report_path)
    click.echo(
        f"scored {report.n_scored} tweets, skipped {report.n_failed}"
        + (f" (ids: {', '.join(report.failed_ids)})" if report.failed_ids else "")
    )


if __name__ == "__main__":
    main()
