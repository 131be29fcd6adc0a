"""Convert the digits bundled in the npm ``mnist`` package to IDX files.

The package ships 10,000 MNIST digits as JSON arrays of ``byte / 255``
rounded to three decimals, which maps back to the original bytes exactly.

Usage::

    npm pack mnist && tar xzf mnist-*.tgz
    python scripts/mnist_from_npm.py package --out data/mnist
"""

import argparse
import json
from pathlib import Path

import numpy as np

from hcvq.data import write_idx


def load_digits(package_dir):
    images, labels = [], []
    for digit in range(10):
        raw = json.loads((Path(package_dir) / "src" / "digits" / f"{digit}.json").read_text())["data"]
        vals = np.asarray(raw, dtype=np.float64).reshape(-1, 28, 28)
        pix = np.rint(vals * 255.0)
        if not np.allclose(np.round(pix / 255.0, 3), vals, atol=1e-9):
            raise ValueError(f"digit {digit}: values do not round-trip to bytes")
        images.append(pix.astype(np.uint8))
        labels.append(np.full(len(vals), digit, dtype=np.uint8))
    images, labels = np.concatenate(images), np.concatenate(labels)
    # Interleave classes so any prefix subset is balanced.
    rank = np.concatenate([np.arange(c) for c in np.bincount(labels)])
    order = np.lexsort((labels, rank))
    return images[order], labels[order]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("package_dir", help="extracted npm package directory")
    parser.add_argument("--out", default="data/mnist")
    args = parser.parse_args()
    images, labels = load_digits(args.package_dir)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(out / "images-idx3-ubyte.gz", images)
    write_idx(out / "labels-idx1-ubyte.gz", labels)
    print(f"wrote {len(images)} digits to {out}")


if __name__ == "__main__":
    main()
