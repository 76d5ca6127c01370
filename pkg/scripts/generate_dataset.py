#!/usr/bin/env python3
"""Generate a synthetic CSV dataset for the experiment harness.

Regression targets mix a linear signal with a mild interaction term;
classification targets threshold a nonlinear score, which is what makes the
surrogate fits budget-sensitive and the stability sweep interesting.
"""

import argparse

import numpy as np


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", help="CSV path to write")
    parser.add_argument("--rows", type=int, default=400)
    parser.add_argument("--features", type=int, default=13)
    parser.add_argument("--task", choices=["regression", "classification"],
                        default="regression")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    m = args.features
    X = rng.normal(size=(args.rows, m))
    weights = rng.normal(size=m) * np.linspace(0.2, 2.0, m)
    score = X @ weights + 0.5 * np.sin(X[:, 0] * X[:, 1 % m])
    if args.task == "regression":
        y = score + 0.1 * rng.normal(size=args.rows)
        fmt = lambda v: repr(float(v))  # noqa: E731
    else:
        y = (score > np.median(score)).astype(int)
        fmt = str

    with open(args.output, "w") as fh:
        fh.write(",".join([f"f{i}" for i in range(m)] + ["target"]) + "\n")
        for row, t in zip(X, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{fmt(t)}\n")
    print(f"wrote {args.rows} rows x {m} features to {args.output}")


if __name__ == "__main__":
    main()
