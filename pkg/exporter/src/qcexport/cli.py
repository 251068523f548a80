"""Exporter command line: preset fixture-generation jobs."""

from __future__ import annotations

import argparse
import sys

from .jobs import run_preset


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qcexport", description="Regenerate integral-bundle fixtures")
    parser.add_argument("preset",
                        choices=["h2-sto6g", "h2-ccpvdz", "h2-augccpvqz",
                                 "nh3-path", "nh3-bundles"])
    parser.add_argument("--out", required=True, help="output root directory")
    parser.add_argument("--relax-basis", default="aug-cc-pvdz")
    parser.add_argument("--bundle-basis", default=None)
    parser.add_argument("--geometries", default=None,
                        help="existing path file (skips re-relaxation)")
    parser.add_argument("--maxiter", type=int, default=120,
                        help="relaxation iterations per geometry")
    args = parser.parse_args(argv)
    run_preset(args.preset, args.out, relax_basis=args.relax_basis,
               bundle_basis=args.bundle_basis, geometries=args.geometries,
               maxiter=args.maxiter)
    return 0


if __name__ == "__main__":
    sys.exit(main())
