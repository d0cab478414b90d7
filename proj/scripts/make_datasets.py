#!/usr/bin/env python3
"""Regenerate the CSV files under data/.

iris, wine and breast_cancer are the UCI datasets as shipped with
scikit-learn, written out with sanitized column names and an integer
`label` column.

real_estate_synthetic is a deterministic synthetic regression set with
the same schema as the UCI "Real Estate Valuation" data (414 rows, six
numeric features, house price of unit area as `target`).  The genuine
file is not redistributable from this environment; drop a CSV with the
same header in its place to run the benchmarks on the real data.
"""

import pathlib
import re

import numpy as np
from sklearn import datasets

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def sanitize(name: str) -> str:
    name = name.strip().lower().replace("/", "_")
    name = re.sub(r"[^a-z0-9]+", "_", name)
    return name.strip("_")


def write_csv(path: pathlib.Path, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(row) + "\n")


def fmt(value: float, decimals: int) -> str:
    text = f"{value:.{decimals}f}"
    return text


def dump_classification(loader, name: str, decimals: int) -> None:
    bunch = loader()
    header = [sanitize(c) for c in bunch.feature_names] + ["label"]
    rows = []
    for x, y in zip(bunch.data, bunch.target):
        rows.append([fmt(v, decimals) for v in x] + [str(int(y))])
    write_csv(OUT / f"{name}.csv", header, rows)
    print(f"{name}: {bunch.data.shape[0]} rows, {bunch.data.shape[1]} features, "
          f"{len(set(bunch.target))} classes")


def dump_real_estate_synthetic() -> None:
    rng = np.random.default_rng(20240817)
    n = 414
    date = 2012.667 + rng.integers(0, 12, n) / 12.0
    age = np.round(rng.uniform(0.0, 43.8, n), 1)
    mrt = np.round(np.exp(rng.uniform(np.log(23.0), np.log(6490.0), n)), 5)
    stores = rng.integers(0, 11, n)
    lat = np.round(24.932 + rng.uniform(0.0, 0.082, n), 6)
    lng = np.round(121.473 + rng.uniform(0.0, 0.093, n), 6)
    price = (
        48.0
        - 0.26 * age
        - 5.6 * (np.log(mrt) - np.log(300.0))
        + 0.85 * stores
        + 95.0 * (lat - 24.97)
        + rng.normal(0.0, 5.5, n)
    )
    price = np.round(np.clip(price, 7.6, 117.5), 1)
    header = ["transaction_date", "house_age", "distance_to_mrt",
              "convenience_stores", "latitude", "longitude", "target"]
    rows = []
    for i in range(n):
        rows.append([
            fmt(date[i], 3), fmt(age[i], 1), fmt(mrt[i], 5), str(int(stores[i])),
            fmt(lat[i], 6), fmt(lng[i], 6), fmt(price[i], 1),
        ])
    write_csv(OUT / "real_estate_synthetic.csv", header, rows)
    print(f"real_estate_synthetic: {n} rows, price mean {price.mean():.2f} "
          f"std {price.std():.2f} range [{price.min():.1f}, {price.max():.1f}]")


def main() -> None:
    OUT.mkdir(exist_ok=True)
    dump_classification(datasets.load_iris, "iris", 1)
    dump_classification(datasets.load_wine, "wine", 2)
    dump_classification(datasets.load_breast_cancer, "breast_cancer", 6)
    dump_real_estate_synthetic()


if __name__ == "__main__":
    main()
