#!/usr/bin/env python3
"""Example prediction server for the external-model bridge.

Reads CSV rows from stdin, one masked instance per line; a blank line ends a
batch. Answers with one decimal per input line. Plug it in with:

    stableshap explain --dataset data.csv --target y \
        --model external --model-command "python3 scripts/external_model_demo.py"

Replace the ``predict`` function with calls into any ML stack.
"""

import sys


def predict(values: list[float]) -> float:
    # stand-in model: weighted sum with a soft saturation
    import math
    return math.tanh(sum(w * v for w, v in enumerate(values, start=1)) / 10.0)


def main():
    batch = []
    for line in sys.stdin:
        line = line.strip()
        if line:
            batch.append(line)
            continue
        for row in batch:
            print(predict([float(v) for v in row.split(",")]))
        sys.stdout.flush()
        batch = []


if __name__ == "__main__":
    main()
