#!/usr/bin/env python3
"""Rebuild the gzipped IDX fixtures under tests/data from public redistributions.

MNIST: the 5000-digit subset shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 784 pixels + label per row).
Fashion-MNIST: the per-class JSON files of the `fashion-mnist` npm package
(src/clothes/<label>.json, {"data": [[784 bytes], ...]}); classes are
interleaved round-robin so every prefix is class-balanced.

    pip download --no-deps mlxtend==0.24.0 -d /tmp/dl
    (cd /tmp/dl && npm pack fashion-mnist@1.1.0)
    tools/make_fixtures.py --mlxtend-wheel /tmp/dl/mlxtend-0.24.0-py3-none-any.whl \
        --fashion-tgz /tmp/dl/fashion-mnist-1.1.0.tgz --out tests/data
"""
import argparse
import gzip
import json
import struct
import tarfile
import zipfile
from pathlib import Path


def write_idx_images(path, images, rows=28, cols=28):
    header = struct.pack(">IIII", 2051, len(images), rows, cols)
    payload = b"".join(bytes(img) for img in images)
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header + payload)


def write_idx_labels(path, labels):
    header = struct.pack(">II", 2049, len(labels))
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(header + bytes(labels))


def mnist_from_wheel(wheel):
    raw = zipfile.ZipFile(wheel).read("mlxtend/data/data/mnist_5k.csv.gz")
    images, labels = [], []
    for line in gzip.decompress(raw).decode().splitlines():
        values = [int(float(v)) for v in line.split(",")]
        images.append(values[:784])
        labels.append(values[784])
    return images, labels


def fashion_from_tgz(tgz, per_class):
    per_label = {}
    with tarfile.open(tgz) as tar:
        for label in range(10):
            member = tar.extractfile(f"package/src/clothes/{label}.json")
            per_label[label] = json.load(member)["data"][:per_class]
    images, labels = [], []
    for k in range(per_class):
        for label in range(10):
            images.append(per_label[label][k])
            labels.append(label)
    return images, labels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mlxtend-wheel", required=True)
    ap.add_argument("--fashion-tgz", required=True)
    ap.add_argument("--fashion-per-class", type=int, default=200)
    ap.add_argument("--out", default="tests/data")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    images, labels = mnist_from_wheel(args.mlxtend_wheel)
    write_idx_images(out / "mnist-5k-images-idx3-ubyte.gz", images)
    write_idx_labels(out / "mnist-5k-labels-idx1-ubyte.gz", labels)

    images, labels = fashion_from_tgz(args.fashion_tgz, args.fashion_per_class)
    write_idx_images(out / "fashion-2k-images-idx3-ubyte.gz", images)
    write_idx_labels(out / "fashion-2k-labels-idx1-ubyte.gz", labels)


if __name__ == "__main__":
    main()
