import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abusetrends import (
    DailySample,
    DateWindow,
    ScoredTweet,
    parse_counts,
    parse_scored_tweets,
    rank_keywords,
    write_scored_tweets,
)
from abusetrends.errors import (
    GapError,
    ParseError,
    SchemaError,
    SeriesValidationError,
)
from tests.conftest import write_csv

D1 = dt.date(2019, 1, 1)


class TestParseScoredTweets:
    def test_single_day_grouping(self, tmp_path):
        path = write_csv(
            tmp_path / "scored.csv",
            ["id", "date", "p_off", "p_hate"],
            [(1, "2019-01-01", 0.5, 0.1),
             (2, "2019-01-01", 0.9, 0.2),
             (3, "2019-01-01", 0.1, 0.0)],
        )
        samples = parse_scored_tweets(path, DateWindow(D1, D1))
        assert len(samples) == 1
        assert len(samples[0]) == 3

    def test_probability_out_of_range_names_line(self, tmp_path):
        path = write_csv(
            tmp_path / "scored.csv",
            ["id", "date", "p_off", "p_hate"],
            [(1, "2019-01-01", 0.5, 0.1),
             (2, "2019-01-01", 1.2, 0.2)],
        )
        with pytest.raises(ParseError, match="line 3"):
            parse_scored_tweets(path, DateWindow(D1, D1))

    def test_empty_days_materialized(self, tmp_path):
        path = write_csv(
            tmp_path / "scored.csv",
            ["id", "date", "p_off", "p_hate"],
            [(1, "2019-01-01", 0.5, 0.1),
             (2, "2019-01-03", 0.6, 0.2),
             (3, "2019-01-03", 0.7, 0.3)],
        )
        samples = parse_scored_tweets(path, DateWindow(D1, dt.date(2019, 1, 3)))
        assert [len(s) for s in samples] == [1, 0, 2]

    def test_missing_column_is_schema_error(self, tmp_path):
        path = write_csv(
            tmp_path / "scored.csv",
            ["id", "date", "p_off"],
            [(1, "2019-01-01", 0.5)],
        )
        with pytest.raises(SchemaError, match="p_hate"):
            parse_scored_tweets(path, DateWindow(D1, D1))

    def test_bad_date_names_line(self, tmp_path):
        path = write_csv(
            tmp_path / "scored.csv",
            ["id", "date", "p_off", "p_hate"],
            [(1, "01/02/2019", 0.5, 0.1)],
        )
        with pytest.raises(ParseError, match="line 2"):
            parse_scored_tweets(path, DateWindow(D1, D1))

    def test_out_of_window_rows_rejected_with_count(self, tmp_path, caplog):
        path = write_csv(
            tmp_path / "scored.csv",
            ["id", "date", "p_off", "p_hate"],
            [(1, "2019-01-01", 0.5, 0.1),
             (2, "2018-12-31", 0.5, 0.1),
             (3, "2019-01-02", 0.5, 0.1)],
        )
        with caplog.at_level("WARNING", logger="abusetrends.ingest"):
            samples = parse_scored_tweets(path, DateWindow(D1, D1))
        assert sum(len(s) for s in samples) == 1
        assert "rejected 2 rows" in caplog.text

    def test_accepted_rows_conservation(self, tmp_path):
        rows = [(i, f"2019-01-{(i % 5) + 1:02d}", 0.5, 0.5) for i in range(40)]
        path = write_csv(tmp_path / "scored.csv", ["id", "date", "p_off", "p_hate"], rows)
        window = DateWindow(D1, dt.date(2019, 1, 5))
        samples = parse_scored_tweets(path, window)
        assert sum(len(s) for s in samples) == 40


class TestRoundTrip:
    @given(
        data=st.lists(
            st.tuples(
                st.integers(0, 4),
                st.floats(0, 1, allow_nan=False),
                st.floats(0, 1, allow_nan=False),
                st.one_of(st.none(), st.text(
                    alphabet=st.characters(blacklist_categories=("Cs", "Cc")),
                    min_size=1, max_size=20)),
            ),
            max_size=30,
        )
    )
    @settings(max_examples=25, deadline=None)
    def test_write_then_parse_is_identity(self, tmp_path_factory, data):
        window = DateWindow(D1, dt.date(2019, 1, 5))
        by_day = {d: [] for d in window.days()}
        for i, (offset, p_off, p_hate, text) in enumerate(data):
            date = D1 + dt.timedelta(days=offset)
            by_day[date].append(ScoredTweet(str(i), date, p_off, p_hate, text))
        samples = [DailySample(d, tuple(by_day[d])) for d in window.days()]
        path = tmp_path_factory.mktemp("roundtrip") / "scored.csv"
        write_scored_tweets(samples, path)
        assert parse_scored_tweets(path, window) == samples


class TestParseCounts:
    def test_full_week(self, tmp_path, week_window):
        rows = [(f"2019-01-0{i}", 100 + i) for i in range(1, 8)]
        path = write_csv(tmp_path / "counts.csv", ["date", "count"], rows)
        series = parse_counts(path, week_window)
        assert len(series) == 7
        assert series.values[0] == 101

    def test_gap_names_missing_date(self, tmp_path, week_window):
        rows = [(f"2019-01-0{i}", 100) for i in (1, 2, 3, 5, 6, 7)]
        path = write_csv(tmp_path / "counts.csv", ["date", "count"], rows)
        with pytest.raises(GapError, match="2019-01-04"):
            parse_counts(path, week_window)

    def test_negative_count_rejected(self, tmp_path):
        path = write_csv(tmp_path / "counts.csv", ["date", "count"],
                         [("2019-01-01", -5)])
        with pytest.raises(SeriesValidationError, match="-5"):
            parse_counts(path, DateWindow(D1, D1))

    def test_duplicate_date_rejected(self, tmp_path):
        path = write_csv(tmp_path / "counts.csv", ["date", "count"],
                         [("2019-01-01", 5), ("2019-01-01", 6)])
        with pytest.raises(ParseError, match="duplicate"):
            parse_counts(path, DateWindow(D1, D1))


class TestRankKeywords:
    def test_counts_and_tie_break(self):
        ranking = rank_keywords(["a b", "b c", "b"], {"a", "b", "c"}, k=2)
        assert ranking.entries == (("b", 3), ("a", 1))

    def test_absent_keyword_reports_zero(self):
        ranking = rank_keywords(["nothing here"], {"z"}, k=1)
        assert ranking.entries == (("z", 0),)

    def test_per_text_dedup_and_case(self):
        ranking = rank_keywords(["B b"], {"b"}, k=1)
        assert ranking.entries == (("b", 1),)

    def test_k_may_exceed_candidates(self):
        ranking = rank_keywords(["a"], {"a", "b"}, k=10)
        assert len(ranking.entries) == 2

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError):
            rank_keywords(["a"], set(), k=1)

    def test_whole_token_matching(self):
        # "ab" must not count as containing "a"
        ranking = rank_keywords(["ab a-b"], {"a"}, k=1)
        assert ranking.entries == (("a", 1),)

    @given(texts=st.lists(st.text(alphabet="ab -", max_size=12), max_size=12))
    @settings(max_examples=50, deadline=None)
    def test_permutation_invariance(self, texts):
        forward = rank_keywords(texts, {"a", "b"}, k=2)
        backward = rank_keywords(list(reversed(texts)), {"a", "b"}, k=2)
        assert forward == backward
