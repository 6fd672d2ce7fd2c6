"""Convert the 5,000-digit MNIST sample shipped inside the mlxtend wheel to IDX.

    pip download mlxtend --no-deps -d /tmp/mlx
    python scripts/mnist5k_to_idx.py /tmp/mlx/mlxtend-*.whl data/mnist5k

Writes train-/t10k- image and label files with a seeded 10:1 split, the
same names the full MNIST distribution uses.
"""

import argparse
import gzip
import io
import zipfile
from pathlib import Path

import numpy as np

from rejfilter.classification.idx import write_idx

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def load(source: Path):
    if source.suffix == ".whl":
        raw = zipfile.ZipFile(source).read(MEMBER)
    else:
        raw = source.read_bytes()
    table = np.loadtxt(io.StringIO(gzip.decompress(raw).decode()), delimiter=",")
    return table[:, :-1].astype(np.uint8).reshape(-1, 28, 28), table[:, -1].astype(np.uint8)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source", type=Path, help="mlxtend wheel or mnist_5k.csv.gz")
    parser.add_argument("outdir", type=Path)
    parser.add_argument("--test-fraction", type=float, default=1 / 11)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    images, digits = load(args.source)
    order = np.random.default_rng(args.seed).permutation(len(digits))
    n_test = int(round(args.test_fraction * len(digits)))
    test, train = order[:n_test], order[n_test:]
    args.outdir.mkdir(parents=True, exist_ok=True)
    for prefix, rows in (("train", train), ("t10k", test)):
        write_idx(args.outdir / f"{prefix}-images-idx3-ubyte", images[rows])
        write_idx(args.outdir / f"{prefix}-labels-idx1-ubyte", digits[rows])
        print(f"{prefix}: {len(rows)} digits")


if __name__ == "__main__":
    main()
