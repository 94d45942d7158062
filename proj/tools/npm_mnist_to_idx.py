#!/usr/bin/env python3
"""Convert the digit JSON files shipped in the npm `mnist` package into IDX files.

The npm package bundles 10000 MNIST digits as normalized floats rounded to three
decimals. Pixels are mapped back to bytes with round(v * 255). Digits are written
round-robin across classes so that any prefix of the file is class balanced.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/npm_mnist_to_idx.py package/src/digits data/
"""
import json
import pathlib
import struct
import sys


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__)
        return 2
    src = pathlib.Path(sys.argv[1])
    dst = pathlib.Path(sys.argv[2])
    dst.mkdir(parents=True, exist_ok=True)

    per_class = []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        if len(flat) % 784:
            raise SystemExit(f"{digit}.json: length {len(flat)} is not a multiple of 784")
        rows = [flat[i:i + 784] for i in range(0, len(flat), 784)]
        per_class.append(rows)

    images = bytearray()
    labels = bytearray()
    longest = max(len(rows) for rows in per_class)
    for k in range(longest):
        for digit, rows in enumerate(per_class):
            if k < len(rows):
                images.extend(min(255, max(0, round(v * 255))) for v in rows[k])
                labels.append(digit)
    count = len(labels)

    (dst / "train-images-idx3-ubyte").write_bytes(struct.pack(">IIII", 2051, count, 28, 28) + bytes(images))
    (dst / "train-labels-idx1-ubyte").write_bytes(struct.pack(">II", 2049, count) + bytes(labels))
    print(f"wrote {count} digits to {dst}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
