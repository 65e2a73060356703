import datetime as dt

import pytest

from abusetrends import DateWindow, ScoredTweet


@pytest.fixture
def day():
    return dt.date(2019, 1, 1)


@pytest.fixture
def week_window(day):
    return DateWindow(day, day + dt.timedelta(days=6))


def make_tweet(i, date, p_off, p_hate, text=None):
    return ScoredTweet(id=str(i), date=date, p_off=p_off, p_hate=p_hate, text=text)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
