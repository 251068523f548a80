"""Bundle export: integrals, converged orbitals, reference AOs.

Writes the integral-bundle directory format consumed downstream: a JSON
manifest plus little-endian float64 blobs with sha256 checksums.  The
reference set B2 holds, per atom, the core+valence orbitals of a
spherically averaged single-atom Hartree-Fock computed in the same
parent basis, expressed as B1 coefficients.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .basis import build_shells, n_spherical
from .integrals import electron_repulsion, one_electron, overlap_cross
from .molecule import Molecule
from .mp2 import mp2_energy
from .scf import (ATOM_CORE_VALENCE, ATOM_OCCUPATIONS, SCFResult,
                  closed_shell_occupations, rhf)

FORMAT_TAG = "iaoq-bundle-v1"


# ---- packed 8-fold ERI layout (the bundle wire format) -----------------

def _pair_index(i, j):
    return i * (i + 1) // 2 + j


def pack_eri(dense: np.ndarray) -> np.ndarray:
    n = dense.shape[0]
    i_of, j_of = [], []
    for i in range(n):
        for j in range(i + 1):
            i_of.append(i)
            j_of.append(j)
    i_of = np.asarray(i_of)
    j_of = np.asarray(j_of)
    pr, qs = np.tril_indices(n * (n + 1) // 2)
    return np.ascontiguousarray(
        dense[i_of[pr], j_of[pr], i_of[qs], j_of[qs]], dtype=np.float64)


# ---- single-molecule computation ---------------------------------------

@dataclass
class MoleculeSolution:
    mol: Molecule
    basis: str
    s1: np.ndarray
    hcore: np.ndarray
    dipole: np.ndarray
    g: np.ndarray
    scf: SCFResult


def solve_molecule(mol: Molecule, basis: str) -> MoleculeSolution:
    shells = mol.shells(basis)
    s, t, v, dip = one_electron(shells, mol.charges, mol.coords_bohr)
    g = electron_repulsion(shells)
    occ = closed_shell_occupations(mol.n_electrons, n_spherical(shells))
    scf = rhf(s, t + v, g, occ, mol.nuclear_repulsion())
    return MoleculeSolution(mol, basis, s, t + v, dip, g, scf)


def reference_orbital_block(element: str, center_bohr: np.ndarray,
                            basis: str) -> np.ndarray:
    """Core+valence orbitals of the single atom, as basis coefficients."""
    shells = build_shells([element], np.asarray([center_bohr]), basis)
    charges = np.array([float({"H": 1, "N": 7}[element.upper()])])
    centers = np.asarray([center_bohr])
    s, t, v, _ = one_electron(shells, charges, centers)
    occ = np.asarray(ATOM_OCCUPATIONS[element.upper()])
    g = electron_repulsion(shells)
    res = rhf(s, t + v, g, occ, 0.0, tol=1e-9)
    n_keep = ATOM_CORE_VALENCE[element.upper()]
    return res.mo_coeff[:, :n_keep]


def build_b2(mol: Molecule, basis: str) -> np.ndarray:
    """Block-diagonal B1 coefficients of all per-atom reference AOs."""
    shells = mol.shells(basis)
    n1 = n_spherical(shells)
    blocks = []
    offsets = []
    pos = 0
    per_atom = {}
    for idx, el in enumerate(mol.elements):
        start = min(s.sph_offset for s in shells if s.atom_index == idx)
        width = sum(s.n_sph for s in shells if s.atom_index == idx)
        block = per_atom.get(el.upper())
        if block is None:
            block = reference_orbital_block(
                el, mol.coords_bohr[idx], basis)
            per_atom[el.upper()] = block
        blocks.append((start, block))
        offsets.append(pos)
        pos += block.shape[1]
        _ = width
    t = np.zeros((n1, pos))
    for (start, block), off in zip(blocks, offsets):
        t[start:start + block.shape[0], off:off + block.shape[1]] = block
    return t


# ---- bundle writing ------------------------------------------------------

def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_bundle(path: str, sol: MoleculeSolution, b2_coeff: np.ndarray,
                 basis_b2_label: str) -> dict:
    """Write the manifest+blob bundle; returns the manifest dict."""
    os.makedirs(path, exist_ok=True)
    mol = sol.mol
    s12 = sol.s1 @ b2_coeff
    s2 = b2_coeff.T @ sol.s1 @ b2_coeff
    blobs = {
        "s1": sol.s1,
        "s12": s12,
        "s2": s2,
        "hcore": sol.hcore,
        "eri": pack_eri(sol.g),
        "dipole": sol.dipole,
        "mo_coeff": sol.scf.mo_coeff,
    }
    manifest = {
        "format": FORMAT_TAG,
        "n_b1": sol.s1.shape[0],
        "n_b2": b2_coeff.shape[1],
        "n_occ": mol.n_electrons // 2,
        "e_nuc": repr(float(mol.nuclear_repulsion())),
        "meta": {
            "elements": list(mol.elements),
            "coords_angstrom": [list(map(float, xyz)) for xyz in mol.coords],
            "reaction_coordinate": mol.reaction_coordinate,
            "basis_b1": sol.basis,
            "basis_b2": basis_b2_label,
        },
        "blobs": {},
    }
    for name, arr in blobs.items():
        data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        with open(os.path.join(path, f"{name}.bin"), "wb") as fh:
            fh.write(data)
        manifest["blobs"][name] = {
            "file": f"{name}.bin", "shape": list(np.shape(arr)),
            "sha256": _sha256(data),
        }
    with open(os.path.join(path, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return manifest


@dataclass
class ExportJob:
    molecules: list[Molecule]
    basis: str
    out_dir: str
    label: str = "grid"
    failures: list[float] = field(default_factory=list)


def export(job: ExportJob) -> dict:
    """Run every geometry; non-converging ones are flagged, not fatal.

    Produces bundle directories r<value>/ plus grid.json and a checksum
    manifest covering every written blob.
    """
    os.makedirs(job.out_dir, exist_ok=True)
    entries = []
    checksums = {}
    n_elec = None
    for mol in job.molecules:
        r = mol.reaction_coordinate
        tag = f"r{r:.4f}"
        try:
            sol = solve_molecule(mol, job.basis)
        except Exception as exc:   # noqa: BLE001 - flagged per geometry
            job.failures.append(r)
            print(f"[{job.label}] {tag}: SCF failed ({exc}); flagged")
            continue
        b2 = build_b2(mol, job.basis)
        manifest = write_bundle(os.path.join(job.out_dir, tag), sol, b2,
                                f"{job.basis}-atomic-core-valence")
        for name, entry in manifest["blobs"].items():
            checksums[f"{tag}/{entry['file']}"] = entry["sha256"]
        entries.append((r, tag))
        n_elec = mol.n_electrons
        print(f"[{job.label}] {tag}: E_RHF = {sol.scf.energy:.10f} "
              f"({sol.scf.n_iter} iterations)")
    grid = {
        "kind": "bundle", "basis": job.basis, "n_elec": n_elec,
        "entries": [{"r": r, "path": tag} for r, tag in entries],
    }
    with open(os.path.join(job.out_dir, "grid.json"), "w") as fh:
        json.dump(grid, fh, indent=1, sort_keys=True)
    with open(os.path.join(job.out_dir, "checksums.json"), "w") as fh:
        json.dump(checksums, fh, indent=1, sort_keys=True)
    return grid


def mp2_total_energy(mol: Molecule, basis: str,
                     n_frozen: int = 0) -> float:
    sol = solve_molecule(mol, basis)
    n_occ = mol.n_electrons // 2
    corr = mp2_energy(sol.scf.mo_coeff, sol.scf.mo_energy, sol.g,
                      n_occ, n_frozen)
    return sol.scf.energy + corr
