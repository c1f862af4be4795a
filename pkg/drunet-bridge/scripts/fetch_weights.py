#!/usr/bin/env python3
"""Download the released pretrained denoiser weights and convert them to the
bridge's manifest + flat-float32 bundle format.

The checkpoints are PyTorch state dicts from the authors' public model zoo.
They are never vendored in this repository. SHA-256 pins live in
weights/CHECKSUMS.txt: on first successful fetch the digest is recorded
there; later fetches verify against it.

Usage: python3 scripts/fetch_weights.py [gray|color] ...
Requires: torch (CPU build is fine), requests.
"""

import hashlib
import json
import os
import sys

RELEASES = {
    "gray": ("https://github.com/cszn/KAIR/releases/download/v1.0/drunet_gray.pth", 1),
    "color": ("https://github.com/cszn/KAIR/releases/download/v1.0/drunet_color.pth", 3),
}

HERE = os.path.dirname(os.path.abspath(__file__))
WEIGHTS_DIR = os.path.join(HERE, "..", "weights")
CHECKSUMS = os.path.join(WEIGHTS_DIR, "CHECKSUMS.txt")

SCALE_WIDTHS = [64, 128, 256, 512]
BLOCKS = 4


def bridge_names():
    """(bridge name, checkpoint key, kind) in manifest order; kind selects the
    axis permutation: conv [O,I,kh,kw] -> [kh,kw,I,O], tconv [I,O,kh,kw] -> [kh,kw,O,I]."""
    names = [("head", "m_head.weight", "conv")]
    for i in (1, 2, 3):
        for b in range(BLOCKS):
            names.append((f"down{i}.block{b}.conv1", f"m_down{i}.{b}.res.0.weight", "conv"))
            names.append((f"down{i}.block{b}.conv2", f"m_down{i}.{b}.res.2.weight", "conv"))
        names.append((f"down{i}.down", f"m_down{i}.{BLOCKS}.weight", "conv"))
    for b in range(BLOCKS):
        names.append((f"body.block{b}.conv1", f"m_body.{b}.res.0.weight", "conv"))
        names.append((f"body.block{b}.conv2", f"m_body.{b}.res.2.weight", "conv"))
    for i in (3, 2, 1):
        names.append((f"up{i}.up", f"m_up{i}.0.weight", "tconv"))
        for b in range(BLOCKS):
            names.append((f"up{i}.block{b}.conv1", f"m_up{i}.{b + 1}.res.0.weight", "conv"))
            names.append((f"up{i}.block{b}.conv2", f"m_up{i}.{b + 1}.res.2.weight", "conv"))
    names.append(("tail", "m_tail.weight", "conv"))
    return names


def load_pins():
    pins = {}
    if os.path.exists(CHECKSUMS):
        for line in open(CHECKSUMS):
            if line.strip():
                digest, name = line.split()
                pins[name] = digest
    return pins


def fetch(mode):
    import requests
    import torch

    url, channels = RELEASES[mode]
    fname = url.rsplit("/", 1)[-1]
    os.makedirs(WEIGHTS_DIR, exist_ok=True)
    local = os.path.join(WEIGHTS_DIR, fname)

    if not os.path.exists(local):
        print(f"downloading {url}")
        resp = requests.get(url, timeout=300)
        resp.raise_for_status()
        with open(local, "wb") as f:
            f.write(resp.content)

    digest = hashlib.sha256(open(local, "rb").read()).hexdigest()
    pins = load_pins()
    if fname in pins:
        if pins[fname] != digest:
            sys.exit(f"checksum mismatch for {fname}: got {digest}, pinned {pins[fname]}")
    else:
        with open(CHECKSUMS, "a") as f:
            f.write(f"{digest}  {fname}\n")
        print(f"pinned sha256 {digest} for {fname}")

    state = torch.load(local, map_location="cpu")
    tensors, blobs, offset = [], [], 0
    for name, key, kind in bridge_names():
        # conv [O,I,kh,kw] -> [kh,kw,I,O]; tconv [I,O,kh,kw] -> [kh,kw,O,I]:
        # the same axis permutation realizes both target layouts
        del kind
        arr = state[key].permute(2, 3, 1, 0).contiguous().numpy().astype("<f4")
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.tobytes())
        offset += arr.size
    leftover = set(state) - {k for _, k, _ in bridge_names()}
    if leftover:
        sys.exit(f"unmapped checkpoint tensors: {sorted(leftover)}")

    stem = os.path.join(WEIGHTS_DIR, f"drunet_{mode}")
    with open(stem + ".bin", "wb") as f:
        for b in blobs:
            f.write(b)
    with open(stem + ".json", "w") as f:
        json.dump({"channels": channels, "tensors": tensors}, f, indent=1)
    print(f"wrote {stem}.json / .bin ({offset * 4 / 1e6:.1f} MB)")


if __name__ == "__main__":
    modes = sys.argv[1:] or ["gray", "color"]
    for mode in modes:
        if mode not in RELEASES:
            sys.exit(f"unknown mode {mode}; choose from {sorted(RELEASES)}")
        fetch(mode)
