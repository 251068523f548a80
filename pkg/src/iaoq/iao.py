"""Intrinsic atomic orbitals.

Polarized atomic orbitals that exactly span the occupied mean-field
space: project the occupied MOs onto the reference basis B2 and back
(depolarization), then combine the occupied/virtual projectors of the
original and depolarized sets acting on the B2 functions embedded in
B1.  Orthonormalization is symmetric Lowdin; spatial locality is
sharpened afterwards by Foster-Boys Jacobi sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg


class IAOError(ValueError):
    pass


@dataclass
class IAOBasis:
    coeff: np.ndarray               # (n_b1, n_b2) expansion in B1
    orthonormalized: bool = False
    localized: bool = False
    boys_history: list[float] | None = None

    @property
    def n_iao(self) -> int:
        return self.coeff.shape[1]


def _metric_orthonormalize(c: np.ndarray, s: np.ndarray,
                           what: str) -> np.ndarray:
    """Symmetric (Lowdin) orthonormalization under the metric s."""
    gram = c.T @ s @ c
    vals, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
    if vals.min() < 1e-10:
        raise IAOError(f"{what}: near-linear dependence "
                       f"(Gram eigenvalue {vals.min():.3e})")
    inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T
    return c @ inv_sqrt


def build_iao(bundle) -> IAOBasis:
    """Raw (non-orthonormal) IAO coefficients from an integral bundle.

    With X the B2 functions embedded in B1 and C-tilde the depolarized
    occupied MOs, the IAOs are (P Pt + Q Qt) X, P/Q the occupied and
    complementary projectors of the original and depolarized sets.
    """
    if bundle.n_occ < 1:
        raise IAOError("need at least one occupied orbital")
    s1, s12, s2 = bundle.s1, bundle.s12, bundle.s2
    c_occ = bundle.c_occ
    x = scipy.linalg.solve(s1, s12, assume_a="pos")        # B2 embedded in B1
    depol = x @ scipy.linalg.solve(s2, s12.T @ c_occ, assume_a="pos")
    c_tilde = _metric_orthonormalize(depol, s1, "depolarized occupied MOs")
    p = c_occ @ c_occ.T @ s1
    pt = c_tilde @ c_tilde.T @ s1
    eye = np.eye(bundle.n_b1)
    coeff = (p @ pt + (eye - p) @ (eye - pt)) @ x
    gram = coeff.T @ s1 @ coeff
    rank = int(np.sum(np.linalg.eigvalsh(gram) > 1e-10))
    if rank < bundle.n_b2:
        raise IAOError(f"IAO set rank-deficient: rank {rank} < {bundle.n_b2}")
    return IAOBasis(coeff)


def lowdin_orthonormalize(basis: IAOBasis, s1: np.ndarray) -> IAOBasis:
    coeff = _metric_orthonormalize(basis.coeff, s1, "IAO set")
    return replace(basis, coeff=coeff, orthonormalized=True)


def boys_localize(basis: IAOBasis, dipole: np.ndarray, s1: np.ndarray,
                  max_sweeps: int = 100, tol: float = 1e-8) -> IAOBasis:
    """Jacobi 2x2 sweeps maximizing sum_i |<i|r|i>|^2.

    The functional never decreases; pairs with a vanishing rotation
    signal are skipped; iteration stops when a full sweep gains less
    than ``tol`` or after ``max_sweeps``.
    """
    if not basis.orthonormalized:
        raise IAOError("localization requires an orthonormal basis")
    c = basis.coeff.copy()
    n = c.shape[1]
    history = [_boys_functional(c, dipole)]
    for _ in range(max_sweeps):
        for i in range(n):
            for j in range(i + 1, n):
                a_ij = 0.0
                b_ij = 0.0
                for d in range(3):
                    x = c[:, (i, j)].T @ dipole[d] @ c[:, (i, j)]
                    a_ij += x[0, 1] ** 2 - 0.25 * (x[0, 0] - x[1, 1]) ** 2
                    b_ij += x[0, 1] * (x[0, 0] - x[1, 1])
                norm = np.hypot(a_ij, b_ij)
                if norm < 1e-14 or a_ij + norm < 1e-14:
                    continue          # stationary pair (or a maximum already)
                alpha = 0.25 * np.arctan2(b_ij, -a_ij)
                ci, cj = np.cos(alpha), np.sin(alpha)
                col_i = ci * c[:, i] + cj * c[:, j]
                col_j = -cj * c[:, i] + ci * c[:, j]
                c[:, i], c[:, j] = col_i, col_j
        history.append(_boys_functional(c, dipole))
        if history[-1] < history[-2] - 1e-10:
            raise IAOError("Boys functional decreased during a sweep")
        if history[-1] - history[-2] < tol:
            break
    gram = c.T @ s1 @ c
    if np.abs(gram - np.eye(n)).max() > 1e-10:
        raise IAOError("localization lost orthonormality")
    return replace(basis, coeff=c, localized=True, boys_history=history)


def _boys_functional(c: np.ndarray, dipole: np.ndarray) -> float:
    val = 0.0
    for d in range(3):
        val += float(np.sum(np.einsum("pi,pq,qi->i", c, dipole[d], c) ** 2))
    return val


def span_projector(basis: IAOBasis, s1: np.ndarray) -> np.ndarray:
    """Metric projector onto the IAO span (orthonormalized basis)."""
    if not basis.orthonormalized:
        raise IAOError("projector defined for the orthonormalized basis")
    return basis.coeff @ basis.coeff.T @ s1


def occupied_span_residual(basis: IAOBasis, s1: np.ndarray,
                           c_occ: np.ndarray) -> float:
    """Frobenius norm of (1 - P_IAO) C_occ: the defining IAO property."""
    proj = span_projector(basis, s1)
    return float(np.linalg.norm(c_occ - proj @ c_occ))
