#!/usr/bin/env python3
"""Build tests/data/mnist_subset.tar.gz from the official MNIST IDX files
(the npm package `mnist-data` ships them uncompressed):

    npm pack mnist-data@1.2.6 && tar xzf mnist-data-1.2.6.tgz
    python3 tools/make_mnist_subset.py package/data tests/data/mnist_subset.tar.gz

Keeps the first 10,000 training and first 2,000 test images, unchanged.
"""

import argparse
import io
import struct
import tarfile
from pathlib import Path


def head_images(path, count):
    raw = path.read_bytes()
    magic, n, rows, cols = struct.unpack(">IIII", raw[:16])
    assert magic == 0x803 and n >= count
    return struct.pack(">IIII", magic, count, rows, cols) + raw[16 : 16 + count * rows * cols]


def head_labels(path, count):
    raw = path.read_bytes()
    magic, n = struct.unpack(">II", raw[:8])
    assert magic == 0x801 and n >= count
    return struct.pack(">II", magic, count) + raw[8 : 8 + count]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("idx_dir", type=Path)
    ap.add_argument("out", type=Path)
    ap.add_argument("--train", type=int, default=10000)
    ap.add_argument("--test", type=int, default=2000)
    args = ap.parse_args()

    d = args.idx_dir
    files = {
        "train-images-idx3-ubyte": head_images(d / "train-images-idx3-ubyte", args.train),
        "train-labels-idx1-ubyte": head_labels(d / "train-labels-idx1-ubyte", args.train),
        "test-images-idx3-ubyte": head_images(d / "t10k-images-idx3-ubyte", args.test),
        "test-labels-idx1-ubyte": head_labels(d / "t10k-labels-idx1-ubyte", args.test),
    }
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with tarfile.open(args.out, "w:gz") as tar:
        for name, data in files.items():
            info = tarfile.TarInfo(f"mnist_subset/{name}")
            info.size = len(data)
            info.mtime = 0
            tar.addfile(info, io.BytesIO(data))
    print(f"{args.train} train / {args.test} test images -> {args.out}")


if __name__ == "__main__":
    main()
