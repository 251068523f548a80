"""Restricted Hartree-Fock with DIIS, plus fractional-occupation atoms.

Closed-shell molecules use integer occupations; single atoms use
spherically averaged fractional occupations over the valence shell
(the reference-orbital construction only needs well-defined core and
valence orbitals, which the averaged field provides cleanly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class SCFError(RuntimeError):
    pass


@dataclass
class SCFResult:
    energy: float
    mo_coeff: np.ndarray
    mo_energy: np.ndarray
    converged: bool
    n_iter: int


def _fock(hcore, g, dm):
    j = np.einsum("pqrs,rs->pq", g, dm, optimize=True)
    k = np.einsum("psrq,rs->pq", g, dm, optimize=True)
    return hcore + j - 0.5 * k


def rhf(s, hcore, g, occupations, e_nuc=0.0, max_iter=200, tol=1e-10,
        diis_depth=8) -> SCFResult:
    """Generalized-eigenvalue RHF; ``occupations`` is the per-orbital
    occupation vector (2.0 entries for closed shells, fractional allowed
    for spherically averaged atoms)."""
    occ = np.asarray(occupations, dtype=float)
    n = s.shape[0]
    _, c = scipy.linalg.eigh(hcore, s)
    dm = (c[:, :occ.size] * occ) @ c[:, :occ.size].T
    s_eigval, s_eigvec = np.linalg.eigh(s)
    x = s_eigvec @ np.diag(s_eigval ** -0.5) @ s_eigvec.T
    errs: list[np.ndarray] = []
    focks: list[np.ndarray] = []
    energy = 0.0
    for it in range(1, max_iter + 1):
        f = _fock(hcore, g, dm)
        energy_new = e_nuc + 0.5 * np.einsum("pq,pq->", dm, hcore + f)
        err = x.T @ (f @ dm @ s - s @ dm @ f) @ x
        errs.append(err)
        focks.append(f)
        if len(errs) > diis_depth:
            errs.pop(0)
            focks.pop(0)
        if np.abs(err).max() < tol and it > 1:
            eps, c = scipy.linalg.eigh(f, s)
            return SCFResult(float(energy_new), c, eps, True, it)
        if len(errs) > 1:
            f = _diis(errs, focks)
        eps, c = scipy.linalg.eigh(f, s)
        dm_new = (c[:, :occ.size] * occ) @ c[:, :occ.size].T
        dm = dm_new
        energy = energy_new
    raise SCFError(f"SCF not converged after {max_iter} iterations "
                   f"(last E = {energy:.10f})")


def _diis(errs, focks):
    m = len(errs)
    b = -np.ones((m + 1, m + 1))
    b[m, m] = 0.0
    for i in range(m):
        for j in range(m):
            b[i, j] = np.einsum("pq,pq->", errs[i], errs[j])
    rhs = np.zeros(m + 1)
    rhs[m] = -1.0
    try:
        coef = np.linalg.solve(b, rhs)[:m]
    except np.linalg.LinAlgError:
        return focks[-1]
    return sum(c * f for c, f in zip(coef, focks))


def closed_shell_occupations(n_elec: int, n_orb: int) -> np.ndarray:
    if n_elec % 2:
        raise SCFError("closed-shell occupations need an even electron count")
    occ = np.zeros(min(n_elec // 2, n_orb))
    occ[:] = 2.0
    return occ


ATOM_OCCUPATIONS = {
    # spherically averaged: (occupations per spatial orbital, aufbau order)
    "H": [1.0],
    "N": [2.0, 2.0, 1.0, 1.0, 1.0],
}

ATOM_CORE_VALENCE = {"H": 1, "N": 5}    # core+valence orbital counts

NUCLEAR_CHARGE = {"H": 1.0, "N": 7.0}
