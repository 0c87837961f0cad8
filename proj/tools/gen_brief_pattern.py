#!/usr/bin/env python3
"""Regenerates the steered-BRIEF sampling pattern embedded in src/alignment/brief_pattern.inc.

Point pairs are drawn from an isotropic Gaussian (sigma = 31/5) and clamped to
[-13, 13] so that any rotation stays within a 19-pixel border. The seed is
fixed; the emitted table must never change once descriptors are in use.
"""
import random

SEED = 0x5EED
PAIRS = 256
SIGMA = 31.0 / 5.0
LIMIT = 13


def draw(rng):
    v = int(round(rng.gauss(0.0, SIGMA)))
    return max(-LIMIT, min(LIMIT, v))


def main():
    rng = random.Random(SEED)
    rows = []
    while len(rows) < PAIRS:
        x1, y1, x2, y2 = draw(rng), draw(rng), draw(rng), draw(rng)
        if (x1, y1) == (x2, y2):
            continue
        rows.append((x1, y1, x2, y2))
    print("// Generated by tools/gen_brief_pattern.py (seed 0x5EED). Do not edit.")
    for r in rows:
        print("    {%d, %d, %d, %d}," % r)


if __name__ == "__main__":
    main()
