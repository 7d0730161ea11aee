#!/usr/bin/env python3
# Copyright 2026 The cfsnn Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert the per-class JSON digit dumps of the npm `mnist` package to IDX.

Each input file <dir>/<c>.json holds {"data": [...]} with 784 floats in [0, 1]
per image. Images are interleaved across classes, shuffled with a fixed seed
and split into train/test IDX pairs.
"""

import argparse
import json
import os
import random
import struct


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("src", help="directory with 0.json .. 9.json")
    ap.add_argument("out", help="output directory")
    ap.add_argument("--train", type=int, default=8000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    samples = []
    for c in range(10):
        with open(os.path.join(args.src, f"{c}.json")) as f:
            flat = json.load(f)["data"]
        if len(flat) % 784:
            raise SystemExit(f"{c}.json: {len(flat)} values is not a multiple of 784")
        for i in range(0, len(flat), 784):
            px = [min(255, max(0, round(v * 255))) for v in flat[i:i + 784]]
            samples.append((px, c))
    random.Random(args.seed).shuffle(samples)
    if args.train >= len(samples):
        raise SystemExit(f"--train {args.train} leaves no test samples")
    os.makedirs(args.out, exist_ok=True)
    tr, te = samples[:args.train], samples[args.train:]
    write_images(os.path.join(args.out, "train-images-idx3-ubyte"), [s[0] for s in tr])
    write_labels(os.path.join(args.out, "train-labels-idx1-ubyte"), [s[1] for s in tr])
    write_images(os.path.join(args.out, "t10k-images-idx3-ubyte"), [s[0] for s in te])
    write_labels(os.path.join(args.out, "t10k-labels-idx1-ubyte"), [s[1] for s in te])
    print(f"wrote {len(tr)} train and {len(te)} test images to {args.out}")


if __name__ == "__main__":
    main()
