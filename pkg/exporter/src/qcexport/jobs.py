"""Preset export jobs: H2 dissociation grids and the ammonia path.

The NH3 -> NH2 + H path fixes the leaving N-H distance per grid point
and relaxes the remaining internal degrees of freedom (Cs symmetry) on
the frozen-core MP2 surface, reconstructing the constrained-optimization
reaction path consumed by the fixture pipeline.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np
from scipy.optimize import minimize

from .export import ExportJob, export, mp2_total_energy
from .molecule import Molecule, write_geometries

H2_GRID = [0.30, 0.45, 0.55, 0.625, 0.675, 0.70, 0.725, 0.75, 0.80,
           0.90, 1.10, 1.40, 1.80, 2.40, 3.00]

NH3_GRID = [0.70, 0.80, 0.90, 0.95, 1.00, 1.05, 1.10, 1.20, 1.40,
            1.70, 2.00, 2.50, 3.00]

# C3v ammonia start: bond length and H-N-H angle
NH3_BOND = 1.0116
NH3_ANGLE_DEG = 106.7


def h2_molecules(grid=H2_GRID) -> list[Molecule]:
    return [Molecule(["H", "H"],
                     np.array([[0.0, 0.0, 0.0], [0.0, 0.0, r]]), r)
            for r in grid]


def h2_job(basis: str, out_dir: str) -> ExportJob:
    return ExportJob(h2_molecules(), basis, out_dir, label=f"h2-{basis}")


def _nh3_geometry(r1: float, params: np.ndarray) -> Molecule:
    """N at origin; H1 in the xz-plane at distance r1; H2/H3 mirror pair.

    params = (beta, r2, theta, phi): H1 polar angle from +z; spectator
    bond length; spectator polar angle from -z; half the H2-N-H3
    azimuthal opening.
    """
    beta, r2, theta, phi = params
    h1 = r1 * np.array([math.sin(beta), 0.0, math.cos(beta)])
    h2 = r2 * np.array([math.sin(theta) * math.cos(phi),
                        math.sin(theta) * math.sin(phi),
                        math.cos(theta)])
    h3 = h2 * np.array([1.0, -1.0, 1.0])
    coords = np.vstack([np.zeros(3), h1, h2, h3])
    return Molecule(["N", "H", "H", "H"], coords, r1)


def _c3v_params(bond=NH3_BOND, angle_deg=NH3_ANGLE_DEG) -> np.ndarray:
    """Parameters reproducing the C3v equilibrium-like start.

    Bonds at polar angle alpha from the 3-fold axis with 120-degree
    azimuths satisfy cos(HNH) = (3 cos^2 alpha - 1) / 2.
    """
    hnh = math.radians(angle_deg)
    cos_sq = max((2.0 * math.cos(hnh) + 1.0) / 3.0, 0.0)
    alpha = math.acos(math.sqrt(cos_sq))
    return np.array([alpha, bond, alpha, 2.0 * math.pi / 3.0])


def relax_nh3_fragment(r1: float, basis: str, start: np.ndarray,
                       maxiter: int = 120, n_frozen: int = 1
                       ) -> tuple[Molecule, float, np.ndarray]:
    """Constrained relaxation: N-H1 fixed at r1, the rest free (Cs)."""

    def energy_of(params):
        mol = _nh3_geometry(r1, params)
        # guard against collapsing geometries
        d = mol.coords
        for i in range(1, 4):
            for j in range(i + 1, 4):
                if np.linalg.norm(d[i] - d[j]) < 0.55:
                    return 1e3
        try:
            return mp2_total_energy(mol, basis, n_frozen=n_frozen)
        except Exception:       # noqa: BLE001 - penalize non-convergence
            return 1e3

    res = minimize(energy_of, start, method="Nelder-Mead",
                   options={"xatol": 2e-4, "fatol": 2e-6,
                            "maxiter": maxiter, "initial_simplex": None})
    return _nh3_geometry(r1, res.x), float(res.fun), res.x


def nh3_path(basis_relax: str, out_path: str, grid=NH3_GRID,
             maxiter: int = 120) -> list[Molecule]:
    """Relax the path sequentially, warm-starting from the previous R."""
    params = _c3v_params()
    molecules = []
    records = []
    for r1 in grid:
        mol, e_mp2, params = relax_nh3_fragment(r1, basis_relax, params,
                                                maxiter=maxiter)
        molecules.append(mol)
        records.append({"r": r1, "mp2_energy": e_mp2,
                        "params": [float(x) for x in params]})
        print(f"[nh3-path] r = {r1:.3f}: E_MP2 = {e_mp2:.8f}, "
              f"params = {np.round(params, 4).tolist()}")
    write_geometries(out_path, molecules)
    with open(out_path + ".log.json", "w") as fh:
        json.dump(records, fh, indent=1)
    return molecules


def nh3_job(molecules: list[Molecule], basis: str, out_dir: str) -> ExportJob:
    return ExportJob(molecules, basis, out_dir, label=f"nh3-{basis}")


def run_preset(name: str, out_root: str, relax_basis: str = "aug-cc-pvdz",
               bundle_basis: str | None = None,
               geometries: str | None = None,
               maxiter: int = 120) -> None:
    os.makedirs(out_root, exist_ok=True)
    if name == "h2-sto6g":
        export(h2_job("sto-6g", os.path.join(out_root, "h2_sto6g")))
    elif name == "h2-ccpvdz":
        export(h2_job("cc-pvdz", os.path.join(out_root, "h2_ccpvdz")))
    elif name == "h2-augccpvqz":
        export(h2_job("aug-cc-pvqz", os.path.join(out_root, "h2_augccpvqz")))
    elif name == "nh3-path":
        geo_path = geometries or os.path.join(out_root, "nh3_path.xyz")
        molecules = nh3_path(relax_basis, geo_path, maxiter=maxiter)
        basis = bundle_basis or "aug-cc-pvdz"
        export(nh3_job(molecules, basis,
                       os.path.join(out_root, f"nh3_{basis}")))
    elif name == "nh3-bundles":
        from .molecule import read_geometries
        if not geometries:
            raise ValueError("nh3-bundles needs --geometries")
        molecules = read_geometries(geometries)
        basis = bundle_basis or "aug-cc-pvdz"
        export(nh3_job(molecules, basis,
                       os.path.join(out_root, f"nh3_{basis}")))
    else:
        raise ValueError(f"unknown preset {name!r}")
