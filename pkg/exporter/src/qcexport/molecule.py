"""Molecular geometries, nuclear repulsion, and xyz-format I/O.

Geometry files are plain text: one ``element x y z`` line per atom,
coordinates in Angstrom; a leading comment block of ``#`` lines is
allowed, and multi-geometry files separate entries by blank lines with
an optional ``# r = <value>`` tag per block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import ANGSTROM_TO_BOHR, build_shells
from .scf import NUCLEAR_CHARGE


@dataclass
class Molecule:
    elements: list[str]
    coords: np.ndarray              # Angstrom
    reaction_coordinate: float | None = None

    @property
    def coords_bohr(self) -> np.ndarray:
        return self.coords * ANGSTROM_TO_BOHR

    @property
    def charges(self) -> np.ndarray:
        return np.array([NUCLEAR_CHARGE[e.upper()] for e in self.elements])

    @property
    def n_electrons(self) -> int:
        return int(round(self.charges.sum()))

    def nuclear_repulsion(self) -> float:
        r = self.coords_bohr
        z = self.charges
        e = 0.0
        for i in range(len(z)):
            for j in range(i + 1, len(z)):
                e += z[i] * z[j] / np.linalg.norm(r[i] - r[j])
        return e

    def shells(self, basis: str):
        return build_shells(self.elements, self.coords_bohr, basis)


def write_geometries(path: str, molecules: list[Molecule]) -> None:
    blocks = []
    for mol in molecules:
        lines = []
        if mol.reaction_coordinate is not None:
            lines.append(f"# r = {float(mol.reaction_coordinate)!r}")
        for el, xyz in zip(mol.elements, mol.coords):
            lines.append(f"{el} {float(xyz[0])!r} {float(xyz[1])!r} {float(xyz[2])!r}")
        blocks.append("\n".join(lines))
    with open(path, "w") as fh:
        fh.write("\n\n".join(blocks) + "\n")


def read_geometries(path: str) -> list[Molecule]:
    with open(path) as fh:
        text = fh.read()
    molecules = []
    for block in text.split("\n\n"):
        if not block.strip():
            continue
        elements, coords, r = [], [], None
        for line in block.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "r =" in line or "r=" in line:
                    r = float(line.split("=", 1)[1])
                continue
            parts = line.split()
            elements.append(parts[0])
            coords.append([float(x) for x in parts[1:4]])
        molecules.append(Molecule(elements, np.asarray(coords), r))
    return molecules
