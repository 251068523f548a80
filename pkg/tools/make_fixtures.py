#!/usr/bin/env python3
"""Regenerate the committed fixtures end to end.

Chain: the exporter writes integral bundles (and the reconstructed
ammonia reaction path); the main package's command line folds the
ammonia bundles through the IAO -> MP2 natural-orbital -> HONO/LUNO
pipeline into the committed 2-qubit Hamiltonian fixtures.  The primary
test suite runs entirely off the committed outputs of this script.

Usage:
    python tools/make_fixtures.py --work /tmp/fixtures [--skip-nh3-relax]

Runtime: minutes for the H2 grids; the ammonia path relaxation is to
an hour-plus unless --geometries reuses a committed path file.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "src", "iaoq", "fixtures")


def sh(cmd: list[str]) -> None:
    print("+", " ".join(cmd))
    subprocess.run(cmd, check=True)


def copy_grid(src: str, dst: str) -> None:
    if os.path.exists(dst):
        shutil.rmtree(dst)
    shutil.copytree(src, dst)
    print(f"copied {src} -> {dst}")


def fold_nh3(bundle_grid: str, out_dir: str) -> None:
    """Primary-side fold of every ammonia bundle to a 2-qubit fixture."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(bundle_grid, "grid.json")) as fh:
        grid = json.load(fh)
    entries = []
    fcid_entries = []
    for ent in grid["entries"]:
        r = ent["r"]
        tag = ent["path"]
        work = os.path.join(out_dir, f"fold_{tag}")
        sh([sys.executable, "-m", "iaoq.cli", "fold",
            "--bundle", os.path.join(bundle_grid, tag),
            "--orbitals", "iao", "--freeze-core", "1",
            "--active", "hono-luno", "--out", work])
        ham_name = f"r{r:.3f}.txt"
        fcid_name = f"r{r:.3f}.fcidump"
        shutil.copy(os.path.join(work, "hamiltonian_2q.txt"),
                    os.path.join(out_dir, ham_name))
        shutil.copy(os.path.join(work, "folded.fcidump"),
                    os.path.join(out_dir, fcid_name))
        shutil.rmtree(work)
        entries.append({"r": r, "path": ham_name})
        fcid_entries.append({"r": r, "path": fcid_name})
    with open(os.path.join(out_dir, "grid.json"), "w") as fh:
        json.dump({"kind": "pauli", "basis": grid.get("basis", ""),
                   "n_elec": 2, "entries": entries}, fh, indent=1,
                  sort_keys=True)
    with open(os.path.join(out_dir, "grid_fcidump.json"), "w") as fh:
        json.dump({"kind": "fcidump", "basis": grid.get("basis", ""),
                   "n_elec": 2, "entries": fcid_entries}, fh, indent=1,
                  sort_keys=True)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--work", required=True)
    parser.add_argument("--geometries", default=None,
                        help="reuse an existing ammonia path file")
    parser.add_argument("--bundle-basis", default="aug-cc-pvdz")
    parser.add_argument("--skip-h2", action="store_true")
    parser.add_argument("--skip-nh3", action="store_true")
    args = parser.parse_args()
    os.makedirs(args.work, exist_ok=True)

    if not args.skip_h2:
        sh([sys.executable, "-m", "qcexport.cli", "h2-sto6g",
            "--out", args.work])
        sh([sys.executable, "-m", "qcexport.cli", "h2-ccpvdz",
            "--out", args.work])
        copy_grid(os.path.join(args.work, "h2_sto6g"),
                  os.path.join(FIXTURES, "h2_sto6g"))
        copy_grid(os.path.join(args.work, "h2_ccpvdz"),
                  os.path.join(FIXTURES, "h2_ccpvdz"))

    if not args.skip_nh3:
        cmd = [sys.executable, "-m", "qcexport.cli",
               "nh3-bundles" if args.geometries else "nh3-path",
               "--out", args.work, "--bundle-basis", args.bundle_basis]
        if args.geometries:
            cmd += ["--geometries", args.geometries]
        sh(cmd)
        bundle_grid = os.path.join(args.work, f"nh3_{args.bundle_basis}")
        out = os.path.join(FIXTURES, "nh3_hono_luno")
        fold_nh3(bundle_grid, out)
        path_file = args.geometries or os.path.join(args.work, "nh3_path.xyz")
        shutil.copy(path_file, os.path.join(out, "nh3_path.xyz"))
    print("fixtures regenerated")
    return 0


if __name__ == "__main__":
    sys.exit(main())
