#!/usr/bin/env python3
"""Build the bundled MNIST subset in IDX format.

Source: mnist_5k.csv.gz shipped inside the mlxtend wheel (5,000 MNIST
training digits, 500 per class, 784 pixel columns then the label).
Draws a class-balanced subset with a fixed seed and writes big-endian IDX
files (0x803 images, 0x801 labels).

    pip download mlxtend==0.24.0 --no-deps -d /tmp
    python3 tools/make_mnist_subset.py /tmp/mlxtend-0.24.0-py3-none-any.whl data/
"""

import argparse
import gzip
import io
import pathlib
import random
import struct
import zipfile


def read_rows(wheel):
    with zipfile.ZipFile(wheel) as z:
        raw = z.read("mlxtend/data/data/mnist_5k.csv.gz")
    rows = []
    for line in io.TextIOWrapper(gzip.GzipFile(fileobj=io.BytesIO(raw)), encoding="ascii"):
        values = [int(float(v)) for v in line.strip().split(",") if v]
        if len(values) != 785:
            continue
        rows.append((values[:784], values[784]))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("out_dir")
    ap.add_argument("--per-class", type=int, default=250)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()

    rows = read_rows(args.wheel)
    by_class = {}
    for pixels, label in rows:
        by_class.setdefault(label, []).append(pixels)
    rnd = random.Random(args.seed)
    picked = []
    for label in sorted(by_class):
        pool = by_class[label]
        for i in sorted(rnd.sample(range(len(pool)), args.per_class)):
            picked.append((pool[i], label))
    rnd.shuffle(picked)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = len(picked)
    with open(out / "mnist-subset-images.idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, 28, 28))
        for pixels, _ in picked:
            f.write(bytes(pixels))
    with open(out / "mnist-subset-labels.idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes(label for _, label in picked))
    print(f"wrote {n} samples to {out}")


if __name__ == "__main__":
    main()
