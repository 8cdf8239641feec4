"""Regenerate the bundled CSV datasets.

Run from the repository root: python3 data/scripts/make_datasets.py
"""

import csv
import itertools
from pathlib import Path

import numpy as np
from sklearn import datasets

OUT = Path(__file__).resolve().parent.parent


def write(name, header, rows):
    with open(OUT / f"{name}.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def balance_scale():
    rows = []
    for lw, ld, rw, rd in itertools.product(range(1, 6), repeat=4):
        left, right = lw * ld, rw * rd
        cls = "L" if left > right else "R" if right > left else "B"
        rows.append([lw, ld, rw, rd, cls])
    write("balance_scale", ["left_weight", "left_distance", "right_weight", "right_distance", "class"], rows)


def from_sklearn(name, loader):
    bunch = loader()
    header = [f"f{j + 1}" for j in range(bunch.data.shape[1])] + ["class"]
    rows = [[repr(float(x)) for x in row] + [int(y)] for row, y in zip(bunch.data, bunch.target)]
    write(name, header, rows)


def gaussian_blobs(name, counts, features, seed, spread):
    rng = np.random.default_rng(seed)
    rows = []
    for cls, n in enumerate(counts):
        centre = rng.uniform(0.2, 0.8, size=features)
        scale = rng.uniform(0.5, 1.5, size=features) * spread
        pts = rng.normal(centre, scale, size=(n, features))
        rows.extend([[f"{x:.6f}" for x in p] + [cls] for p in pts])
    order = rng.permutation(len(rows))
    header = [f"f{j + 1}" for j in range(features)] + ["class"]
    write(name, header, [rows[i] for i in order])


if __name__ == "__main__":
    balance_scale()
    from_sklearn("iris", datasets.load_iris)
    from_sklearn("wine", datasets.load_wine)
    from_sklearn("breast_cancer", datasets.load_breast_cancer)
    from_sklearn("digits", datasets.load_digits)
    gaussian_blobs("glass_like", [70, 76, 17, 13, 9, 29], 9, seed=214, spread=0.12)
    gaussian_blobs("seeds_like", [70, 70, 70], 7, seed=210, spread=0.12)
