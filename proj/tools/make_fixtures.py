#!/usr/bin/env python3
"""Regenerates the synthetic CSV fixtures under data/fixtures/.

The shape fixtures copy the row and column counts of the seven PROMISE effort
datasets (effort and after-the-event columns included) but carry synthetic
values. Output is deterministic.
"""

import csv
import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "fixtures"

# name: (rows, total columns, categorical columns, has duration column, rows with a missing cell)
SHAPES = {
    "synth-albrecht": (24, 7, ["lang"], False, 0),
    "synth-kemerer": (15, 7, ["lang", "hardware"], False, 0),
    "synth-nasa": (18, 3, [], False, 0),
    "synth-desharnais": (81, 12, ["language"], True, 4),
    "synth-china": (499, 18, [], True, 0),
    "synth-maxwell": (62, 27, ["app", "har"], False, 0),
    "synth-telecom": (18, 3, [], False, 0),
}


def shape_fixture(name, rows, columns, categorical, has_duration, missing, rng):
    n_numeric = columns - 1 - len(categorical) - (1 if has_duration else 0)
    size = rng.lognormal(mean=2.0, sigma=0.8, size=rows)
    numeric = [size] + [rng.uniform(0, 10, rows) + 0.3 * size * rng.uniform(0, 1) for _ in range(n_numeric - 1)]
    cats = [rng.choice(["a", "b", "c"][: 2 + (i % 2)], rows) for i in range(len(categorical))]
    effort = 40.0 * size**1.1 * np.exp(rng.normal(0, 0.35, rows)) + 5.0
    for c in cats:
        effort *= np.where(c == "a", 1.0, 1.3)
    header = [f"x{i + 1}" for i in range(n_numeric)] + list(categorical)
    if has_duration:
        header.append("duration")
    header.append("effort")
    table = []
    for r in range(rows):
        row = [f"{v[r]:.4f}" for v in numeric] + [str(c[r]) for c in cats]
        if has_duration:
            row.append(f"{effort[r] / 60.0 + rng.uniform(1, 3):.2f}")
        row.append(f"{effort[r]:.2f}")
        table.append(row)
    for r in rng.choice(rows, size=missing, replace=False):
        table[r][int(rng.integers(0, n_numeric))] = "?"
    return header, table


def write(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240601)
    datasets = []
    for name, (rows, columns, categorical, has_duration, missing) in SHAPES.items():
        header, table = shape_fixture(name, rows, columns, categorical, has_duration, missing, rng)
        write(OUT / f"{name}.csv", header, table)
        datasets.append(
            {
                "name": name,
                "csv_path": f"{name}.csv",
                "effort_column": "effort",
                "excluded_columns": ["duration"] if has_duration else [],
                "categorical_columns": categorical,
            }
        )
    with open(OUT / "promise_shapes.json", "w") as f:
        json.dump({"datasets": datasets, "seed": 1, "output_dir": "../../out/promise_shapes"}, f, indent=2)
        f.write("\n")

    # Effort exactly linear in two features.
    # 60 rows keep every standard-grid neighborhood larger than the cubic design.
    x = np.round(rng.uniform(0, 10, (60, 2)), 2)
    write(OUT / "linear.csv", ["size", "complexity", "effort"],
          [[f"{a:.2f}", f"{b:.2f}", f"{100 + 50 * a + 20 * b:.2f}"] for a, b in x])

    # Small mixed-type dataset with one categorical column and a missing cell.
    header, table = shape_fixture("tiny", 13, 4, ["lang"], False, 1, rng)
    write(OUT / "tiny.csv", header, table)


if __name__ == "__main__":
    main()
