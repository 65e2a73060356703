"""Loading and validation of scored-post samples and daily count series.

All inputs are UTF-8 CSV files with ISO-8601 (YYYY-MM-DD) dates, one row
per post or per day.  Dates are treated as UTC calendar days throughout.
Parsed collections are immutable and safe to share across threads.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    GapError,
    ParseError,
    SchemaError,
    SeriesValidationError,
)

logger = logging.getLogger(__name__)

SCORED_COLUMNS = ("id", "date", "p_off", "p_hate")
_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def parse_iso_date(raw: str) -> dt.date:
    return dt.date.fromisoformat(raw.strip())


@dataclass(frozen=True)
class DateWindow:
    """Inclusive range of calendar days."""

    start: dt.date
    end: dt.date

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"window start {self.start} is after end {self.end}")

    def __len__(self) -> int:
        return (self.end - self.start).days + 1

    def __contains__(self, day: dt.date) -> bool:
        return self.start <= day <= self.end

    def days(self) -> list[dt.date]:
        return [self.start + dt.timedelta(days=i) for i in range(len(self))]


@dataclass(frozen=True)
class ScoredTweet:
    """One sampled post with its two classifier probabilities."""

    id: str
    date: dt.date
    p_off: float
    p_hate: float
    text: str | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_off <= 1.0:
            raise ValueError(f"p_off {self.p_off} outside [0, 1]")
        if not 0.0 <= self.p_hate <= 1.0:
            raise ValueError(f"p_hate {self.p_hate} outside [0, 1]")


@dataclass(frozen=True)
class DailySample:
    """All sampled posts for one calendar day.  May be empty."""

    date: dt.date
    tweets: tuple[ScoredTweet, ...]

    def __post_init__(self):
        for tweet in self.tweets:
            if tweet.date != self.date:
                raise ValueError(
                    f"tweet {tweet.id} dated {tweet.date} in sample for {self.date}"
                )

    def __len__(self) -> int:
        return len(self.tweets)


@dataclass(frozen=True, eq=False)
class CountSeries:
    """Daily totals from an exhaustive counter, one value per consecutive day."""

    start_date: dt.date
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        if values.ndim != 1:
            raise ValueError("count series must be one-dimensional")
        if np.any(values < 0):
            raise SeriesValidationError("count series contains negative values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountSeries):
            return NotImplemented
        return self.start_date == other.start_date and np.array_equal(
            self.values, other.values
        )

    @property
    def end_date(self) -> dt.date:
        return self.start_date + dt.timedelta(days=len(self) - 1)

    def dates(self) -> list[dt.date]:
        return [self.start_date + dt.timedelta(days=i) for i in range(len(self))]


@dataclass(frozen=True)
class KeywordRanking:
    """Candidate keywords ordered by how many posts contain them."""

    entries: tuple[tuple[str, int], ...]

    def __post_init__(self):
        keys = [(-count, word) for word, count in self.entries]
        if keys != sorted(keys):
            raise ValueError("ranking entries must be sorted by count desc, word asc")


def _require_columns(fieldnames, required, path) -> None:
    missing = [col for col in required if col not in (fieldnames or ())]
    if missing:
        raise SchemaError(f"{path}: missing required column(s) {', '.join(missing)}")


def _parse_probability(raw: str, column: str, line: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"{column} {raw!r} is not a number", line) from None
    if not 0.0 <= value <= 1.0:
        raise ParseError(f"{column} {value} outside [0, 1]", line)
    return value


def parse_scored_tweets(path, window: DateWindow) -> list[DailySample]:
    """Read a scored-post CSV and group rows into one sample per day.

    Every day of ``window`` is materialized, including days with no rows.
    Rows dated outside the window are rejected; their count is logged.

    Args:
        path: CSV with header ``id,date,p_off,p_hate`` and optional ``text``.
        window: study window; samples are produced for exactly these days.

    Raises:
        SchemaError: a required column is absent.
        ParseError: a row has a malformed date or an out-of-range probability.
    """
    by_day: dict[dt.date, list[ScoredTweet]] = {day: [] for day in window.days()}
    n_rejected = 0
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        _require_columns(reader.fieldnames, SCORED_COLUMNS, path)
        has_text = "text" in (reader.fieldnames or ())
        for row in reader:
            line = reader.line_num
            try:
                date = parse_iso_date(row["date"])
            except ValueError:
                raise ParseError(f"bad date {row['date']!r}", line) from None
            p_off = _parse_probability(row["p_off"], "p_off", line)
            p_hate = _parse_probability(row["p_hate"], "p_hate", line)
            if date not in window:
                n_rejected += 1
                continue
            text = row["text"] if has_text and row["text"] else None
            by_day[date].append(
                ScoredTweet(id=row["id"], date=date, p_off=p_off, p_hate=p_hate, text=text)
            )
    if n_rejected:
        logger.warning("rejected %d rows outside window %s..%s",
                       n_rejected, window.start, window.end)
    return [DailySample(date=day, tweets=tuple(by_day[day])) for day in window.days()]


def write_scored_tweets(samples, path) -> None:
    """Write daily samples back to the scored-post CSV schema.

    Round-trips exactly through :func:`parse_scored_tweets`: floats are
    written with ``repr`` and empty text round-trips to ``None``.
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SCORED_COLUMNS + ("text",))
        for sample in samples:
            for t in sample.tweets:
                writer.writerow(
                    [t.id, t.date.isoformat(), repr(t.p_off), repr(t.p_hate), t.text or ""]
                )


def parse_counts(path, window: DateWindow, value_column: str = "count") -> CountSeries:
    """Read a daily-count CSV into a contiguous series covering ``window``.

    Rows outside the window are ignored.  Raises :class:`GapError` naming
    the missing dates if any window day is absent, :class:`ParseError` on
    malformed rows, and :class:`SeriesValidationError` on negative counts.
    """
    seen: dict[dt.date, int] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        _require_columns(reader.fieldnames, ("date", value_column), path)
        for row in reader:
            line = reader.line_num
            try:
                date = parse_iso_date(row["date"])
            except ValueError:
                raise ParseError(f"bad date {row['date']!r}", line) from None
            try:
                count = int(row[value_column])
            except ValueError:
                raise ParseError(
                    f"{value_column} {row[value_column]!r} is not an integer", line
                ) from None
            if count < 0:
                raise SeriesValidationError(
                    f"{path} line {line}: negative count {count} on {date}"
                )
            if date in seen:
                raise ParseError(f"duplicate date {date}", line)
            if date in window:
                seen[date] = count
    missing = [day for day in window.days() if day not in seen]
    if missing:
        shown = ", ".join(day.isoformat() for day in missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise GapError(f"{path}: missing days {shown}{more}", missing)
    values = np.array([seen[day] for day in window.days()], dtype=np.int64)
    return CountSeries(start_date=window.start, values=values)


def load_series(path, value_columns: tuple[str, ...] = ("count", "new_cases")) -> CountSeries:
    """Read a daily series CSV whose window is inferred from the file itself.

    Accepts the first matching value column name, so count-endpoint files
    (``count``) and COVID case files (``new_cases``) load directly.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        header = csv.DictReader(handle).fieldnames or ()
    column = next((c for c in value_columns if c in header), None)
    if column is None:
        raise SchemaError(
            f"{path}: expected one of columns {', '.join(value_columns)}"
        )
    dates = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            try:
                dates.append(parse_iso_date(row["date"]))
            except ValueError:
                raise ParseError(f"bad date {row['date']!r}", reader.line_num) from None
    if not dates:
        raise SeriesValidationError(f"{path}: no data rows")
    window = DateWindow(min(dates), max(dates))
    return parse_counts(path, window, value_column=column)


def write_series(series, path, value_column: str = "count") -> None:
    """Write a dated integer series as ``date,<value_column>`` CSV."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", value_column])
        day = series.start_date
        for value in series.values:
            writer.writerow([day.isoformat(), int(value)])
            day += dt.timedelta(days=1)


def rank_keywords(texts, candidates, k: int) -> KeywordRanking:
    """Rank candidate keywords by the number of texts containing them.

    Matching is case-insensitive whole-token matching after splitting on
    non-alphanumeric characters; a text containing a keyword several times
    counts once.  Ties are broken lexicographically.  Candidates are
    normalized to lowercase single tokens.

    Args:
        texts: iterable of raw post texts.
        candidates: non-empty collection of candidate keywords.
        k: number of top entries to return; may exceed the candidate count.
    """
    normalized = sorted({str(c).lower() for c in candidates})
    if not normalized:
        raise ValueError("candidate keyword list must be non-empty")
    if k < 1:
        raise ValueError("k must be a positive integer")
    counts = dict.fromkeys(normalized, 0)
    wanted = set(normalized)
    for text in texts:
        tokens = set(_TOKEN_SPLIT.split(text.lower()))
        for word in wanted & tokens:
            counts[word] += 1
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return KeywordRanking(entries=tuple(ordered[:k]))
