#!/usr/bin/env python3
"""Generate the synthetic benchmark stand-ins committed under data/.

The two tables mirror the shapes of the classic tabular outlier benchmarks
(351 instances x 32 numeric dims with 126 outliers; 198 x 33 with 47).
Inliers sit in one tight Gaussian cluster around the origin; outliers are
placed along random directions at radii drawn from [3, 12], which in high
dimension keeps them far from the cluster and from each other. Output is
deterministic for the fixed seed; rerunning this script must reproduce the
committed files byte for byte.
"""

import random

SEED = 20260818
INLIER_SIGMA = 0.05
RADIUS_LOW, RADIUS_HIGH = 3.0, 12.0
OUTLIER_JITTER = 0.02


def unit_vector(rng, dims):
    v = [rng.gauss(0.0, 1.0) for _ in range(dims)]
    norm = sum(x * x for x in v) ** 0.5
    return [x / norm for x in v]


def make_rows(rng, instances, dims, outliers):
    flags = [True] * outliers + [False] * (instances - outliers)
    rng.shuffle(flags)
    rows = []
    for is_outlier in flags:
        if is_outlier:
            radius = rng.uniform(RADIUS_LOW, RADIUS_HIGH)
            direction = unit_vector(rng, dims)
            row = [radius * x + rng.gauss(0.0, OUTLIER_JITTER) for x in direction]
        else:
            row = [rng.gauss(0.0, INLIER_SIGMA) for _ in range(dims)]
        rows.append((row, is_outlier))
    return rows


def write_arff(path, relation, rows, dims):
    with open(path, "w") as f:
        f.write("% synthetic stand-in generated by tools/synth_data.py\n")
        f.write("% do not edit by hand; rerun the script to regenerate\n")
        f.write(f"@relation {relation}\n\n")
        for i in range(dims):
            f.write(f"@attribute a{i + 1:02d} numeric\n")
        f.write("@attribute outlier {no,yes}\n\n@data\n")
        for row, is_outlier in rows:
            values = ",".join(f"{x:.6f}" for x in row)
            f.write(f"{values},{'yes' if is_outlier else 'no'}\n")


def main():
    rng = random.Random(SEED)
    write_arff(
        "data/ionosphere-synth.arff",
        "ionosphere-synth",
        make_rows(rng, 351, 32, 126),
        32,
    )
    write_arff(
        "data/wpbc-synth.arff",
        "wpbc-synth",
        make_rows(rng, 198, 33, 47),
        33,
    )


if __name__ == "__main__":
    main()
