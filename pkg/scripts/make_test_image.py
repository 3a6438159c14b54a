#!/usr/bin/env python3
"""Write the built-in synthetic test card as a plain PGM.

Useful as a starting point for image-demo runs with --image:

    python3 scripts/make_test_image.py card.pgm --size 48
    phasekit image-demo --config configs/image_demo.cfg --image card.pgm
"""

import argparse

from phasekit.experiments import synthetic_image
from phasekit.pgm import write_pgm


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("path", help="output PGM path")
    ap.add_argument("--size", type=int, default=32, help="image side length")
    args = ap.parse_args()
    write_pgm(args.path, synthetic_image(size=args.size))
    print("wrote %s (%dx%d)" % (args.path, args.size, args.size))


if __name__ == "__main__":
    main()
