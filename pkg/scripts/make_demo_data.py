#!/usr/bin/env python3
"""Generate the bundled 60-day demo fixture (scored posts + daily counts).

The fixture is committed under tests/data/ so tests and README examples
run offline; rerunning this script reproduces it byte for byte.
"""

import csv
import datetime as dt
from pathlib import Path

import numpy as np

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "data"
START = dt.date(2019, 1, 1)
N_DAYS = 60
SEED = 20190101


def main():
    rng = np.random.default_rng(SEED)
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    scored_path = OUT_DIR / "scored_60d.csv"
    counts_path = OUT_DIR / "counts_60d.csv"

    with open(scored_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "date", "p_off", "p_hate"])
        row_id = 0
        for day in range(N_DAYS):
            date = (START + dt.timedelta(days=day)).isoformat()
            n_tweets = int(rng.integers(40, 120))
            # offensiveness scores are bimodal, hate scores skew low
            component = rng.random(n_tweets) < 0.55
            p_off = np.where(
                component, rng.beta(8, 2, n_tweets), rng.beta(2, 8, n_tweets)
            )
            p_hate = rng.beta(1.2, 6.0, n_tweets)
            for k in range(n_tweets):
                writer.writerow(
                    [row_id, date, repr(round(float(p_off[k]), 6)),
                     repr(round(float(p_hate[k]), 6))]
                )
                row_id += 1

    with open(counts_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "count"])
        level = 900.0
        for day in range(N_DAYS):
            date = (START + dt.timedelta(days=day)).isoformat()
            weekly = 120.0 * np.sin(2 * np.pi * day / 7.0)
            level = 0.95 * level + 0.05 * 900.0 + rng.normal(0, 25.0)
            writer.writerow([date, int(max(level + weekly, 0.0))])

    print(f"wrote {scored_path} and {counts_path}")


if __name__ == "__main__":
    main()
