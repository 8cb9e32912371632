#!/usr/bin/env python3
"""Assemble a 10,000-image MNIST subset in IDX format from the copy bundled
with the npm ``mnist`` package (1.1.0). Pixels there are stored as
round(v/255, 3), which maps back to the original bytes exactly.

Used for the end-to-end retrieval test when the full MNIST files cannot be
downloaded.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 scripts/build_mnist_subset.py --npm-dir package/src/digits --out tests/data
"""
import argparse
import io
import json
import pathlib
import struct
import tarfile

import numpy as np


def load_npm(digits_dir):
    images, labels = [], []
    for d in range(10):
        data = json.load(open(pathlib.Path(digits_dir) / f"{d}.json"))["data"]
        a = np.asarray(data, dtype=np.float64).reshape(-1, 784)
        images.append(np.rint(a * 255.0).astype(np.uint8))
        labels.append(np.full(len(a), d, dtype=np.uint8))
    return np.concatenate(images), np.concatenate(labels)


def idx_bytes(images, labels):
    img = struct.pack(">IIII", 0x803, len(images), 28, 28) + images.tobytes()
    lab = struct.pack(">II", 0x801, len(labels)) + labels.tobytes()
    return img, lab


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--npm-dir", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    x, y = load_npm(args.npm_dir)
    print("images:", len(x), "per class:", np.bincount(y))

    img, lab = idx_bytes(x, y)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with tarfile.open(out / "mnist_subset.tar.gz", "w:gz") as tar:
        for name, payload in (("subset-images-idx3-ubyte", img),
                              ("subset-labels-idx1-ubyte", lab)):
            info = tarfile.TarInfo(name)
            info.size = len(payload)
            info.mtime = 0
            tar.addfile(info, io.BytesIO(payload))


if __name__ == "__main__":
    main()
