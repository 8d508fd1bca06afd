#!/usr/bin/env python3
"""Write MNIST IDX files from the 5000-image MNIST subset bundled with mlxtend.

The full MNIST archive is the preferred input for `tilr gen-data`; this script
exists for machines where only a package mirror is reachable:

    pip download mlxtend --no-deps -d /tmp/whl
    python3 scripts/mnist_subset_to_idx.py /tmp/whl/mlxtend-*.whl data/mnist

The subset holds 500 images per digit. The first 400 of each digit go to the
training files, the remaining 100 to the t10k (test) files, so the two pools
are disjoint.
"""
import gzip
import struct
import sys
import zipfile
from pathlib import Path

TRAIN_PER_DIGIT = 400


def write_idx(prefix: Path, rows):
    images = bytearray()
    labels = bytearray()
    for pixels, label in rows:
        images.extend(pixels)
        labels.append(label)
    with open(str(prefix) + "-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        f.write(images)
    with open(str(prefix) + "-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(rows)))
        f.write(labels)


def main():
    if len(sys.argv) != 3:
        sys.exit("usage: mnist_subset_to_idx.py <mlxtend wheel> <out dir>")
    wheel, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    raw = zipfile.ZipFile(wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    seen = [0] * 10
    train, test = [], []
    for line in gzip.decompress(raw).decode().splitlines():
        fields = [int(v) for v in line.split(",")]
        pixels, label = bytes(fields[:784]), fields[784]
        (train if seen[label] < TRAIN_PER_DIGIT else test).append((pixels, label))
        seen[label] += 1
    write_idx(out / "train", train)
    write_idx(out / "t10k", test)
    print(f"wrote {len(train)} train / {len(test)} test images to {out}")


if __name__ == "__main__":
    main()
