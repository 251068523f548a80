"""Folded Hamiltonians over orthonormal orbital sets and active spaces.

Operations here are pure transformations of ``MOIntegrals``: the ao2mo
fold from an integral bundle, frozen core, single-determinant (RHF)
energies, closed-shell MP2 with its unrelaxed density, natural orbitals,
and active-space carving (full / HONO-LUNO / low-energy-HF window).
Energies are in Hartree throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import eri as eri_mod


class OrbitalError(ValueError):
    pass


@dataclass
class MOIntegrals:
    """E0 + h_pq + (pr|qs) over an orthonormal orbital set.

    ``eri`` is stored packed (8-fold canonical compound index); ``e0``
    carries nuclear repulsion plus any frozen-core contribution.
    """

    e0: float
    h: np.ndarray
    eri: np.ndarray
    n_orb: int
    n_elec: int
    restricted: bool = True
    _dense_cache: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_dense(cls, e0: float, h: np.ndarray, eri_dense: np.ndarray,
                   n_elec: int, tol: float = 0.0) -> "MOIntegrals":
        h = np.asarray(h, dtype=float)
        n = h.shape[0]
        return cls(float(e0), h, eri_mod.pack(eri_dense, tol=tol), n, int(n_elec))

    def validate(self) -> None:
        if self.h.shape != (self.n_orb, self.n_orb):
            raise OrbitalError("h has wrong shape")
        if np.abs(self.h - self.h.T).max() > 1e-12:
            raise OrbitalError("h is not symmetric within 1e-12")
        if self.eri.shape != (eri_mod.packed_size(self.n_orb),):
            raise OrbitalError("packed eri has wrong length")
        if self.restricted and self.n_elec % 2:
            raise OrbitalError("restricted reference needs an even electron count")

    def eri_dense(self) -> np.ndarray:
        if self._dense_cache is None:
            self._dense_cache = eri_mod.unpack(self.eri, self.n_orb)
        return self._dense_cache

    @property
    def n_occ(self) -> int:
        return self.n_elec // 2


@dataclass
class ActiveSpace:
    """Active orbitals as columns in the source orbital basis."""

    coeff: np.ndarray          # (n_source, n_active)
    frozen: list[int]
    label: str

    def validate(self, metric: np.ndarray | None = None, tol: float = 1e-8) -> None:
        g = self.coeff.T @ (self.coeff if metric is None else metric @ self.coeff)
        if np.abs(g - np.eye(self.coeff.shape[1])).max() > tol:
            raise OrbitalError("active-space columns are not orthonormal")


# ----------------------------------------------------------------------
# integral transformations
# ----------------------------------------------------------------------

def rotate_integrals(mo: MOIntegrals, u: np.ndarray) -> MOIntegrals:
    """Orthogonal in-space rotation: columns of u are new orbitals."""
    n_new = u.shape[1]
    h = u.T @ mo.h @ u
    g = mo.eri_dense()
    g = np.einsum("prqs,pi->irqs", g, u, optimize=True)
    g = np.einsum("irqs,rj->ijqs", g, u, optimize=True)
    g = np.einsum("ijqs,qk->ijks", g, u, optimize=True)
    g = np.einsum("ijks,sl->ijkl", g, u, optimize=True)
    out = MOIntegrals.from_dense(mo.e0, h, g, mo.n_elec, tol=1e-10)
    out.restricted = mo.restricted
    assert out.n_orb == n_new
    return out


def ao2mo(bundle, coeffs: np.ndarray, n_elec: int | None = None) -> MOIntegrals:
    """Fold AO integrals to the orbital basis given by ``coeffs``.

    ``coeffs`` (n_b1 x n_orb) must be orthonormal under the bundle's s1
    metric; the two-electron transform runs as four sequential quarter
    transformations on the dense AO tensor.
    """
    c = np.asarray(coeffs, dtype=float)
    g1 = c.T @ bundle.s1 @ c
    dev = np.abs(g1 - np.eye(c.shape[1])).max()
    if dev > 1e-8:
        raise OrbitalError(f"orbitals not orthonormal under s1 (dev {dev:.2e})")
    h = c.T @ bundle.hcore @ c
    g = eri_mod.unpack(bundle.eri, bundle.n_b1)
    g = np.einsum("prqs,pi->irqs", g, c, optimize=True)
    g = np.einsum("irqs,rj->ijqs", g, c, optimize=True)
    g = np.einsum("ijqs,qk->ijks", g, c, optimize=True)
    g = np.einsum("ijks,sl->ijkl", g, c, optimize=True)
    if n_elec is None:
        n_elec = 2 * bundle.n_occ
    return MOIntegrals.from_dense(bundle.e_nuc, h, g, n_elec, tol=1e-10)


def freeze_core(mo: MOIntegrals, core: list[int]) -> MOIntegrals:
    """Fold doubly occupied core orbitals into e0 and an effective h."""
    if not core:
        return replace(mo, _dense_cache=None)
    core = sorted(set(core))
    if core[0] < 0 or core[-1] >= mo.n_orb:
        raise OrbitalError(f"core index out of range: {core}")
    if 2 * len(core) > mo.n_elec:
        raise OrbitalError("more core orbitals than electron pairs")
    g = mo.eri_dense()
    active = [p for p in range(mo.n_orb) if p not in core]
    e0 = mo.e0
    for i in core:
        e0 += 2.0 * mo.h[i, i]
        for j in core:
            e0 += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    # effective one-body: h'_pq = h_pq + sum_i [2 (pq|ii) - (pi|iq)]
    h = mo.h[np.ix_(active, active)].copy()
    for i in core:
        h += 2.0 * g[:, :, i, i][np.ix_(active, active)]
        h -= g[:, i, i, :][np.ix_(active, active)]
    g_act = g[np.ix_(active, active, active, active)]
    out = MOIntegrals.from_dense(e0, h, g_act, mo.n_elec - 2 * len(core))
    out.restricted = mo.restricted
    return out


def rhf_energy(mo: MOIntegrals, n_occ: int | None = None) -> float:
    """Energy of the determinant doubly occupying the first n_occ orbitals."""
    if n_occ is None:
        n_occ = mo.n_occ
    if 2 * n_occ > 2 * mo.n_orb:
        raise OrbitalError("n_occ exceeds orbital count")
    occ = range(n_occ)
    g = mo.eri_dense()
    e = mo.e0 + 2.0 * sum(mo.h[i, i] for i in occ)
    for i in occ:
        for j in occ:
            e += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    return float(e)


def fock_matrix(mo: MOIntegrals, n_occ: int | None = None,
                dm: np.ndarray | None = None) -> np.ndarray:
    """Closed-shell Fock matrix from the given density (default: aufbau)."""
    if dm is None:
        if n_occ is None:
            n_occ = mo.n_occ
        dm = np.zeros((mo.n_orb, mo.n_orb))
        dm[np.diag_indices(n_occ)] = 2.0
    g = mo.eri_dense()
    j = np.einsum("pqrs,rs->pq", g, dm, optimize=True)
    k = np.einsum("psrq,rs->pq", g, dm, optimize=True)
    return mo.h + j - 0.5 * k


def canonicalize(mo: MOIntegrals, c_occ: np.ndarray) -> tuple[MOIntegrals, np.ndarray, np.ndarray]:
    """Rotate to the eigenbasis of the Fock matrix built from ``c_occ``.

    ``c_occ`` holds occupied orbitals as orthonormal columns in the
    current basis.  Returns (rotated integrals, orbital energies,
    rotation).  The occupied span is Fock-invariant for converged
    references, so the first n_occ eigenvectors span ``c_occ``.
    """
    dm = 2.0 * c_occ @ c_occ.T
    f = fock_matrix(mo, dm=dm)
    eps, u = np.linalg.eigh(f)
    # deterministic sign fix
    for k in range(u.shape[1]):
        m = np.argmax(np.abs(u[:, k]))
        if u[m, k] < 0:
            u[:, k] = -u[:, k]
    rotated = rotate_integrals(mo, u)
    n_occ = c_occ.shape[1]
    proj = u[:, :n_occ] @ u[:, :n_occ].T - c_occ @ c_occ.T
    if np.abs(proj).max() > 1e-6:
        raise OrbitalError("Fock eigenbasis does not preserve the occupied span")
    return rotated, eps, u


def mp2(mo: MOIntegrals, n_occ: int | None = None) -> tuple[float, np.ndarray]:
    """Closed-shell MP2 correlation energy and unrelaxed one-body density.

    A single Fock build from the first-n_occ density supplies canonical
    orbitals and energies (no SCF); the returned density is expressed in
    the input orbital basis and traces to n_elec.
    """
    if n_occ is None:
        n_occ = mo.n_occ
    n, no = mo.n_orb, n_occ
    nv = n - no
    if nv == 0 or no == 0:
        rdm1 = np.zeros((n, n))
        rdm1[np.diag_indices(no)] = 2.0
        return 0.0, rdm1
    f = fock_matrix(mo, n_occ=no)
    # semicanonicalize: diagonalize F inside the occupied and virtual
    # blocks separately; identical to canonical MP2 for converged
    # references, well defined (occupied span preserved) otherwise
    w_o, u_o = np.linalg.eigh(f[:no, :no])
    w_v, u_v = np.linalg.eigh(f[no:, no:])
    u = np.zeros((n, n))
    u[:no, :no] = u_o
    u[no:, no:] = u_v
    eps = np.concatenate([w_o, w_v])
    can = rotate_integrals(mo, u)
    g = can.eri_dense()
    e_o, e_v = eps[:no], eps[no:]
    denom = (e_o[:, None, None, None] + e_o[None, :, None, None]
             - e_v[None, None, :, None] - e_v[None, None, None, :])
    if np.abs(denom).min() < 1e-10:
        raise OrbitalError("degenerate occupied/virtual gap in MP2 denominator")
    ovov = g[:no, no:, :no, no:].transpose(0, 2, 1, 3)   # (ia|jb) -> [i,j,a,b]
    t = ovov / denom
    tbar = 2.0 * t - t.transpose(0, 1, 3, 2)
    e2 = float(np.einsum("ijab,ijab->", t, 2.0 * ovov - ovov.transpose(0, 1, 3, 2),
                         optimize=True))
    d_occ = -2.0 * np.einsum("ikab,jkab->ij", t, tbar, optimize=True)
    d_vir = 2.0 * np.einsum("ijac,ijbc->ab", t, tbar, optimize=True)
    rdm1_can = np.zeros((n, n))
    rdm1_can[np.diag_indices(no)] = 2.0
    rdm1_can[:no, :no] += 0.5 * (d_occ + d_occ.T)
    rdm1_can[no:, no:] += 0.5 * (d_vir + d_vir.T)
    rdm1 = u @ rdm1_can @ u.T
    return e2, rdm1


def natural_orbitals(rdm1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a one-body density: occupations descending.

    Degeneracies are broken by orbital index; each eigenvector's
    largest-magnitude component is made positive.
    """
    rdm1 = np.asarray(rdm1, dtype=float)
    if np.abs(rdm1 - rdm1.T).max() > 1e-8:
        raise OrbitalError("density matrix is not symmetric")
    occ, vec = np.linalg.eigh(0.5 * (rdm1 + rdm1.T))
    order = np.argsort(-occ, kind="stable")
    occ, vec = occ[order], vec[:, order]
    for k in range(vec.shape[1]):
        m = np.argmax(np.abs(vec[:, k]))
        if vec[m, k] < 0:
            vec[:, k] = -vec[:, k]
    return occ, vec


def make_active_space(mo: MOIntegrals, selector: str,
                      n_active_elec: int | None = None
                      ) -> tuple[MOIntegrals, ActiveSpace]:
    """Carve an active-space Hamiltonian out of ``mo``.

    Selectors: ``full``; ``hono-luno`` (2 orbitals straddling the Fermi
    level of the MP2 natural-occupation spectrum, 2 electrons);
    ``hf-window(k)`` (k orbitals nearest the Fermi level in the given
    orbital order).  Orbitals below the window are frozen, above are
    discarded.
    """
    n, no = mo.n_orb, mo.n_occ
    if selector == "full":
        out = replace(mo, _dense_cache=None)
        return out, ActiveSpace(np.eye(n), [], "full-IAO")

    if selector == "hono-luno":
        if n_active_elec not in (None, 2):
            raise OrbitalError("hono-luno active space holds 2 electrons")
        if no < 1 or n < 2:
            raise OrbitalError("hono-luno needs at least one occupied and one virtual")
        _, rdm1 = mp2(mo)
        occs, rot = natural_orbitals(rdm1)
        rotated = rotate_integrals(mo, rot)
        frozen = list(range(no - 1))
        active = [no - 1, no]           # HONO, LUNO in descending-occupation order
        frozen_mo = freeze_core(rotated, frozen)
        keep = [p - len(frozen) for p in active]
        sub = _take_orbitals(frozen_mo, keep)
        return sub, ActiveSpace(rot[:, active], frozen, "hono-luno")

    if selector.startswith("hf-window(") and selector.endswith(")"):
        k = int(selector[len("hf-window("):-1])
        if k > n:
            raise OrbitalError(f"window of {k} orbitals exceeds {n}")
        if n_active_elec is None:
            raise OrbitalError("hf-window needs n_active_elec")
        if n_active_elec % 2 or n_active_elec > 2 * no:
            raise OrbitalError("n_active_elec inconsistent with the reference")
        occ_in = n_active_elec // 2
        if occ_in > k or (k - occ_in) > (n - no):
            raise OrbitalError("window inconsistent with electron count")
        frozen = list(range(no - occ_in))
        active = list(range(no - occ_in, no - occ_in + k))
        frozen_mo = freeze_core(mo, frozen)
        keep = [p - len(frozen) for p in active]
        sub = _take_orbitals(frozen_mo, keep)
        coeff = np.zeros((n, k))
        for col, p in enumerate(active):
            coeff[p, col] = 1.0
        return sub, ActiveSpace(coeff, frozen, "hf-lowe")

    raise OrbitalError(f"unknown active-space selector {selector!r}")


def complete_basis(active: np.ndarray, metric: np.ndarray) -> np.ndarray:
    """Extend metric-orthonormal active columns to a full orthonormal set.

    The complement is the metric-orthogonalized residue of the inverse
    square-root basis; the active columns come first in the output.
    """
    n, na = active.shape
    gram = active.T @ metric @ active
    if np.abs(gram - np.eye(na)).max() > 1e-8:
        raise OrbitalError("active columns are not orthonormal in the metric")
    vals, vecs = np.linalg.eigh(metric)
    seed = vecs @ np.diag(vals ** -0.5) @ vecs.T
    proj = active @ active.T @ metric
    resid = seed - proj @ seed
    overlap = resid.T @ metric @ resid
    w, v = np.linalg.eigh(overlap)
    keep = w > 1e-8
    comp = resid @ (v[:, keep] / np.sqrt(w[keep]))
    if comp.shape[1] != n - na:
        raise OrbitalError("complement construction lost rank")
    out = np.hstack([active, comp])
    gram = out.T @ metric @ out
    if np.abs(gram - np.eye(n)).max() > 1e-8:
        raise OrbitalError("completed set is not orthonormal")
    return out


def _take_orbitals(mo: MOIntegrals, keep: list[int]) -> MOIntegrals:
    """Restrict to a subset of orbitals (assumed to hold all electrons)."""
    h = mo.h[np.ix_(keep, keep)]
    g = mo.eri_dense()[np.ix_(keep, keep, keep, keep)]
    out = MOIntegrals.from_dense(mo.e0, h, g, mo.n_elec)
    out.restricted = mo.restricted
    return out
