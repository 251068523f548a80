"""Closed-shell MP2 energies (used by the reaction-path relaxation)."""

from __future__ import annotations

import numpy as np


def mp2_energy(mo_coeff: np.ndarray, mo_energy: np.ndarray,
               g_ao: np.ndarray, n_occ: int, n_frozen: int = 0) -> float:
    """Canonical MP2 correlation energy from AO integrals."""
    c_occ = mo_coeff[:, n_frozen:n_occ]
    c_vir = mo_coeff[:, n_occ:]
    e_occ = mo_energy[n_frozen:n_occ]
    e_vir = mo_energy[n_occ:]
    ovov = np.einsum("pqrs,pi,qa,rj,sb->iajb", g_ao, c_occ, c_vir,
                     c_occ, c_vir, optimize=True)
    denom = (e_occ[:, None, None, None] - e_vir[None, :, None, None]
             + e_occ[None, None, :, None] - e_vir[None, None, None, :])
    t = ovov / denom
    return float(np.einsum("iajb,iajb->", t, 2.0 * ovov, optimize=True)
                 - np.einsum("iajb,ibja->", t, ovov, optimize=True))
