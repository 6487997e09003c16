"""Writes STL reference decompositions computed with statsmodels (inner loop only)."""
import csv
import pathlib

import numpy as np
from statsmodels.tsa.seasonal import STL

CASES = [(7, 0, 15), (7, 1, 15), (9, 1, 7), (13, 0, 21)]


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "oracles"
    out.mkdir(parents=True, exist_ok=True)
    t = np.arange(40)
    y = np.sin(0.3 * t) + 0.5 * np.cos(np.pi * t / 2) + 0.05 * t + 0.2 * np.sin(2.7 * t * t / 7)
    with open(out / "stl_reference.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["seasonal_window", "seasonal_degree", "trend_window", "index", "y", "seasonal", "trend"])
        for sw, sd, tw in CASES:
            fit = STL(y, period=4, seasonal=sw, trend=tw, low_pass=5, seasonal_deg=sd,
                      trend_deg=1, low_pass_deg=1, robust=False).fit(inner_iter=2, outer_iter=0)
            for i in range(len(y)):
                w.writerow([sw, sd, tw, i, repr(float(y[i])), repr(float(fit.seasonal[i])),
                            repr(float(fit.trend[i]))])


if __name__ == "__main__":
    main()
