"""Generates the bundled 50-station synthetic fixture under tests/fixtures/pipeline.

Writes three monthly CSV files in the canonical layout, a Köppen-Geiger grid
covering the stations, a region config and a pipeline config. Special cases:
a constant station, a record too short for any window, a record whose gap
forces an earlier window, a rejected row and an unclassified station.
"""
import json
import pathlib

import numpy as np

HEADER = "station_id,lat,lon,year," + ",".join(f"m{m:02d}" for m in range(1, 13))
MISSING = "-9999"
RES = 0.5

# (lat band centre, Köppen class)
BANDS = [(8.0, "Aw"), (28.0, "BSh"), (46.0, "Cfb"), (58.0, "Dfc")]


def centre(v: float) -> float:
    return (np.floor(v / RES) + 0.5) * RES


def monthly_record(rng, kind, years, lat):
    n = len(years) * 12
    t = np.arange(n)
    season = np.cos(2 * np.pi * (t % 12) / 12.0)
    ar = np.zeros(n)
    phi = {"temperature": 0.3, "precipitation": 0.1, "river_flow": 0.7}[kind]
    e = rng.normal(size=n)
    for i in range(n):
        ar[i] = (phi * ar[i - 1] if i else 0.0) + e[i]
    trend = rng.uniform(-0.5, 1.5) * t / n
    if kind == "temperature":
        amp = 2.0 + abs(lat) / 5.0
        return 25.0 - abs(lat) / 3.0 - amp * season + trend + 1.2 * ar
    if kind == "precipitation":
        base = rng.uniform(30.0, 120.0)
        return np.maximum(0.0, base * (1.0 + 0.4 * season + 0.3 * ar) + 5 * trend)
    base = rng.uniform(5.0, 80.0)
    return base * np.exp(0.5 * season + 0.25 * ar + 0.1 * trend)


def write_kind(out, rng, kind, count, specials):
    lines = [HEADER]
    stations = []
    for k in range(count):
        sid = f"{kind[0].upper()}{k:03d}"
        band_lat, _ = BANDS[k % len(BANDS)]
        lat = round(band_lat + rng.uniform(-3.0, 3.0), 3)
        lon = round(rng.uniform(-120.0, 120.0), 3)
        first, last = 1950 + int(rng.integers(0, 10)), 2010 + int(rng.integers(0, 6))
        special = specials.get(k)
        if special == "short":
            first, last = 1990, 2012
        if special == "unclassified":
            lat, lon = -70.0, 0.0
        years = list(range(first, last + 1))
        values = monthly_record(rng, kind, years, lat)
        if special == "constant":
            values = np.full_like(values, 12.5)
        mask = np.zeros(values.shape, dtype=bool)
        if special == "gap":
            # One missing month late in the record: the window must end before it.
            mask[(last - first - 3) * 12 + 6] = True
        stations.append((sid, lat, lon))
        for i, y in enumerate(years):
            if special == "gap_year" and y == first + 5:
                continue
            cells = []
            for m in range(12):
                j = i * 12 + m
                cells.append(MISSING if mask[j] else f"{values[j]:.3f}")
            lines.append(f"{sid},{lat},{lon},{y}," + ",".join(cells))
        if special == "rejected_row":
            lines.append(f"{sid},{lat},{lon},{last + 1},1,2,3")
    (out / f"{kind}.csv").write_text("\n".join(lines) + "\n")
    return stations


def main() -> None:
    root = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "pipeline"
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240611)

    stations = []
    stations += write_kind(root, rng, "temperature", 20, {3: "constant", 7: "gap", 11: "unclassified"})
    stations += write_kind(root, rng, "precipitation", 18, {2: "short", 5: "gap_year", 9: "rejected_row"})
    stations += write_kind(root, rng, "river_flow", 12, {4: "gap"})

    cells = {}
    for _, lat, lon in stations:
        if lat < -60:
            continue
        klass = min(BANDS, key=lambda b: abs(b[0] - lat))[1]
        cells[(centre(lat), centre(lon))] = klass
    grid = ["lat,lon,class"] + [f"{la},{lo},{c}" for (la, lo), c in sorted(cells.items())]
    (root / "koppen.csv").write_text("\n".join(grid) + "\n")

    regions = {"approximate": False, "regions": []}
    for kind, prefix in (("temperature", "T"), ("precipitation", "P"), ("river_flow", "R")):
        regions["regions"].append({"id": f"{prefix}1", "variable_kind": kind,
                                   "boxes": [{"south": -60, "north": 90, "west": -180, "east": 0}]})
        regions["regions"].append({"id": f"{prefix}2", "variable_kind": kind,
                                   "boxes": [{"south": -60, "north": 90, "west": 0, "east": 180}]})
    (root / "regions.json").write_text(json.dumps(regions, indent=2) + "\n")

    config = {
        "inputs": {"temperature": "temperature.csv", "precipitation": "precipitation.csv",
                   "river_flow": "river_flow.csv"},
        "climate_grid": "koppen.csv",
        "regions": "regions.json",
        "forest": {"n_trees": 100},
        "summary": {"min_group_size": 4},
        "seed": 12345,
        "output_dir": "out",
    }
    (root / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
