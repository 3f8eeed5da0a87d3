#!/usr/bin/env python3
"""Build data/mnist_784.csv (label first, 784 raw pixel columns, no header).

Tries whichever loader is importable and has network access. The acceptance
suite looks for the file at data/mnist_784.csv or $ODLAE_MNIST_CSV.
"""

import csv
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "mnist_784.csv"


def rows_from_keras():
    from keras.datasets import mnist

    (x_train, y_train), (x_test, y_test) = mnist.load_data()
    for x, y in ((x_train, y_train), (x_test, y_test)):
        for img, label in zip(x, y):
            yield int(label), img.reshape(-1)


def rows_from_torchvision(tmp="/tmp/mnist-raw"):
    import numpy as np
    from torchvision.datasets import MNIST

    for train in (True, False):
        ds = MNIST(tmp, train=train, download=True)
        data = ds.data.numpy()
        targets = ds.targets.numpy()
        for img, label in zip(data, targets):
            yield int(label), np.asarray(img).reshape(-1)


def rows_from_openml():
    from sklearn.datasets import fetch_openml

    bunch = fetch_openml("mnist_784", version=1, as_frame=False)
    for features, label in zip(bunch.data, bunch.target):
        yield int(float(label)), features


def main() -> int:
    OUT.parent.mkdir(parents=True, exist_ok=True)
    last_error = None
    for loader in (rows_from_keras, rows_from_torchvision, rows_from_openml):
        try:
            with open(OUT, "w", newline="") as fh:
                writer = csv.writer(fh)
                n = 0
                for label, pixels in loader():
                    writer.writerow([label] + [int(v) for v in pixels])
                    n += 1
            print(f"wrote {n} rows to {OUT} via {loader.__name__}")
            return 0
        except Exception as exc:  # noqa: BLE001 - try the next loader
            last_error = exc
            print(f"{loader.__name__} failed: {exc}", file=sys.stderr)
    print(f"could not fetch mnist anywhere: {last_error}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
