"""McMurchie-Davidson Gaussian integrals (numba-compiled kernels).

One- and two-electron integrals over contracted spherical-harmonic
shells: overlap, kinetic, nuclear attraction, dipole moments, and the
full (pq|rs) tensor.  Cartesian blocks are produced by Hermite
expansion (E coefficients) and the Boys-function R tensor, then
transformed to the spherical components.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .basis import Shell, cartesian_monomials, harmonic_basis, n_spherical

_SPH_CACHE: dict[int, np.ndarray] = {}


def _sph(l: int) -> np.ndarray:
    if l not in _SPH_CACHE:
        _SPH_CACHE[l] = harmonic_basis(l)
    return _SPH_CACHE[l]


@njit(cache=True)
def _boys(m_max: int, t: float, out: np.ndarray) -> None:
    """F_0..F_mmax by downward recursion from a series/asymptotic seed."""
    if t < 1e-13:
        for m in range(m_max + 1):
            out[m] = 1.0 / (2 * m + 1)
        return
    if t > 35.0:
        # asymptotic seed at m = 0, then upward (stable for large t)
        out[0] = 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))
        et = math.exp(-t)
        for m in range(1, m_max + 1):
            out[m] = ((2 * m - 1) * out[m - 1] - et) / (2.0 * t)
        return
    # series for the highest order, then downward
    acc = 0.0
    term = 1.0 / (2 * m_max + 1)
    k = 0
    while True:
        acc += term
        k += 1
        term *= 2.0 * t / (2 * m_max + 2 * k + 1)
        if term < 1e-17 * acc or k > 300:
            break
    et = math.exp(-t)
    out[m_max] = acc * et
    for m in range(m_max - 1, -1, -1):
        out[m] = (2.0 * t * out[m + 1] + et) / (2 * m + 1)


@njit(cache=True)
def _e_table(l1: int, l2: int, a: float, b: float, ab: float) -> np.ndarray:
    """Hermite expansion coefficients E[i, j, t] for one dimension."""
    p = a + b
    mu = a * b / p
    e = np.zeros((l1 + 1, l2 + 1, l1 + l2 + 1))
    e[0, 0, 0] = math.exp(-mu * ab * ab)
    for i in range(1, l1 + 1):
        for t in range(i + 1):
            val = 0.0
            if t - 1 >= 0:
                val += e[i - 1, 0, t - 1] / (2.0 * p)
            val += -(b / p) * ab * e[i - 1, 0, t]
            if t + 1 <= i - 1:
                val += (t + 1) * e[i - 1, 0, t + 1]
            e[i, 0, t] = val
    for j in range(1, l2 + 1):
        for i in range(l1 + 1):
            for t in range(i + j + 1):
                val = 0.0
                if t - 1 >= 0:
                    val += e[i, j - 1, t - 1] / (2.0 * p)
                val += (a / p) * ab * e[i, j - 1, t]
                if t + 1 <= i + j - 1:
                    val += (t + 1) * e[i, j - 1, t + 1]
                e[i, j, t] = val
    return e


@njit(cache=True)
def _r_table(l_total: int, p: float, pc: np.ndarray) -> np.ndarray:
    """Hermite Coulomb tensor R[t, u, v] up to total order l_total."""
    dim = l_total + 1
    t2 = p * (pc[0] * pc[0] + pc[1] * pc[1] + pc[2] * pc[2])
    f = np.zeros(l_total + 1)
    _boys(l_total, t2, f)
    rn = np.zeros((l_total + 1, dim, dim, dim))
    for n in range(l_total + 1):
        rn[n, 0, 0, 0] = (-2.0 * p) ** n * f[n]
    for total in range(1, l_total + 1):
        for t in range(total + 1):
            for u in range(total - t + 1):
                v = total - t - u
                for n in range(l_total - total + 1):
                    val = 0.0
                    if t > 0:
                        val += (t - 1) * rn[n + 1, t - 2, u, v] if t > 1 else 0.0
                        val += pc[0] * rn[n + 1, t - 1, u, v]
                    elif u > 0:
                        val += (u - 1) * rn[n + 1, t, u - 2, v] if u > 1 else 0.0
                        val += pc[1] * rn[n + 1, t, u - 1, v]
                    elif v > 0:
                        val += (v - 1) * rn[n + 1, t, u, v - 2] if v > 1 else 0.0
                        val += pc[2] * rn[n + 1, t, u, v - 1]
                    rn[n, t, u, v] = val
    return rn[0]


@njit(cache=True)
def _pair_1e(l1, l2, exps1, coefs1, exps2, coefs2, r1, r2, charges, centers,
             want_nuclear: bool):
    """Cartesian overlap, kinetic, nuclear and dipole blocks for a pair."""
    mons1 = _monomials(l1)
    mons2 = _monomials(l2)
    n1, n2 = mons1.shape[0], mons2.shape[0]
    s = np.zeros((n1, n2))
    t_mat = np.zeros((n1, n2))
    v = np.zeros((n1, n2))
    dip = np.zeros((3, n1, n2))
    ab = r1 - r2
    for ip in range(exps1.shape[0]):
        a = exps1[ip]
        ca = coefs1[ip]
        for jp in range(exps2.shape[0]):
            b = exps2[jp]
            cb = coefs2[jp]
            p = a + b
            pref = ca * cb
            px = (a * r1 + b * r2) / p
            # per-dimension E tables up to l+2 for kinetic/dipole closures
            ex = _e_table(l1 + 1, l2 + 2, a, b, ab[0])
            ey = _e_table(l1 + 1, l2 + 2, a, b, ab[1])
            ez = _e_table(l1 + 1, l2 + 2, a, b, ab[2])
            base = (math.pi / p) ** 1.5
            for m1 in range(n1):
                i, k, m = mons1[m1, 0], mons1[m1, 1], mons1[m1, 2]
                for m2 in range(n2):
                    j, l_, n = mons2[m2, 0], mons2[m2, 1], mons2[m2, 2]
                    s0 = ex[i, j, 0] * ey[k, l_, 0] * ez[m, n, 0] * base
                    s[m1, m2] += pref * s0
                    # kinetic via the standard raise/lower relation
                    tx = _kin_1d(ex, i, j, b)
                    ty = _kin_1d(ey, k, l_, b)
                    tz = _kin_1d(ez, m, n, b)
                    t_mat[m1, m2] += pref * base * (
                        tx * ey[k, l_, 0] * ez[m, n, 0]
                        + ex[i, j, 0] * ty * ez[m, n, 0]
                        + ex[i, j, 0] * ey[k, l_, 0] * tz)
                    # dipole about the origin: x = (x - Bx) + Bx
                    dx = (ex[i, j + 1, 0] + r2[0] * ex[i, j, 0]) \
                        * ey[k, l_, 0] * ez[m, n, 0] * base
                    dy = ex[i, j, 0] * (ey[k, l_ + 1, 0] + r2[1] * ey[k, l_, 0]) \
                        * ez[m, n, 0] * base
                    dz = ex[i, j, 0] * ey[k, l_, 0] \
                        * (ez[m, n + 1, 0] + r2[2] * ez[m, n, 0]) * base
                    dip[0, m1, m2] += pref * dx
                    dip[1, m1, m2] += pref * dy
                    dip[2, m1, m2] += pref * dz
            if want_nuclear:
                l_tot = l1 + l2
                for ic in range(charges.shape[0]):
                    pc = px - centers[ic]
                    r = _r_table(l_tot, p, pc)
                    fac = -charges[ic] * 2.0 * math.pi / p
                    for m1 in range(n1):
                        i, k, m = mons1[m1, 0], mons1[m1, 1], mons1[m1, 2]
                        for m2 in range(n2):
                            j, l_, n = mons2[m2, 0], mons2[m2, 1], mons2[m2, 2]
                            acc = 0.0
                            for t in range(i + j + 1):
                                for u in range(k + l_ + 1):
                                    for w in range(m + n + 1):
                                        acc += (ex[i, j, t] * ey[k, l_, u]
                                                * ez[m, n, w] * r[t, u, w])
                            v[m1, m2] += pref * fac * acc
    return s, t_mat, v, dip


@njit(cache=True)
def _kin_1d(e, i, j, b):
    """<g_i| -1/2 d^2/dx^2 |g_j> in one dimension over E coefficients."""
    val = b * (2 * j + 1) * e[i, j, 0] - 2.0 * b * b * e[i, j + 2, 0]
    if j >= 2:
        val -= 0.5 * j * (j - 1) * e[i, j - 2, 0]
    return val


@njit(cache=True)
def _monomials(l: int) -> np.ndarray:
    n = (l + 1) * (l + 2) // 2
    out = np.zeros((n, 3), dtype=np.int64)
    k = 0
    for lx in range(l, -1, -1):
        for ly in range(l - lx, -1, -1):
            out[k, 0] = lx
            out[k, 1] = ly
            out[k, 2] = l - lx - ly
            k += 1
    return out


@njit(cache=True)
def _quartet(l1, l2, l3, l4, e1, c1, e2, c2, e3, c3, e4, c4,
             ra, rb, rc, rd) -> np.ndarray:
    """Cartesian (ab|cd) block by double Hermite expansion."""
    m1 = _monomials(l1)
    m2 = _monomials(l2)
    m3 = _monomials(l3)
    m4 = _monomials(l4)
    n1, n2, n3, n4 = m1.shape[0], m2.shape[0], m3.shape[0], m4.shape[0]
    out = np.zeros((n1, n2, n3, n4))
    ab = ra - rb
    cd = rc - rd
    lab = l1 + l2
    lcd = l3 + l4
    for ip in range(e1.shape[0]):
        a = e1[ip]
        for jp in range(e2.shape[0]):
            b = e2[jp]
            p = a + b
            cp = c1[ip] * c2[jp]
            px = (a * ra + b * rb) / p
            exb = _e_table(l1, l2, a, b, ab[0])
            eyb = _e_table(l1, l2, a, b, ab[1])
            ezb = _e_table(l1, l2, a, b, ab[2])
            for kp in range(e3.shape[0]):
                c = e3[kp]
                for lp in range(e4.shape[0]):
                    d = e4[lp]
                    q = c + d
                    cq = c3[kp] * c4[lp]
                    qx = (c * rc + d * rd) / q
                    exk = _e_table(l3, l4, c, d, cd[0])
                    eyk = _e_table(l3, l4, c, d, cd[1])
                    ezk = _e_table(l3, l4, c, d, cd[2])
                    alpha = p * q / (p + q)
                    fac = (2.0 * math.pi ** 2.5
                           / (p * q * math.sqrt(p + q))) * cp * cq
                    r = _r_table(lab + lcd, alpha, px - qx)
                    for b1 in range(n1):
                        i1, k1, u1 = m1[b1, 0], m1[b1, 1], m1[b1, 2]
                        for b2 in range(n2):
                            i2, k2, u2 = m2[b2, 0], m2[b2, 1], m2[b2, 2]
                            for b3 in range(n3):
                                i3, k3, u3 = m3[b3, 0], m3[b3, 1], m3[b3, 2]
                                for b4 in range(n4):
                                    i4, k4, u4 = (m4[b4, 0], m4[b4, 1],
                                                  m4[b4, 2])
                                    acc = 0.0
                                    for t in range(i1 + i2 + 1):
                                        for u in range(k1 + k2 + 1):
                                            for v in range(u1 + u2 + 1):
                                                etuv = (exb[i1, i2, t]
                                                        * eyb[k1, k2, u]
                                                        * ezb[u1, u2, v])
                                                if etuv == 0.0:
                                                    continue
                                                for tt in range(i3 + i4 + 1):
                                                    for uu in range(k3 + k4 + 1):
                                                        for vv in range(u3 + u4 + 1):
                                                            sign = 1.0 if (tt + uu + vv) % 2 == 0 else -1.0
                                                            acc += (etuv * sign
                                                                    * exk[i3, i4, tt]
                                                                    * eyk[k3, k4, uu]
                                                                    * ezk[u3, u4, vv]
                                                                    * r[t + tt, u + uu, v + vv])
                                    out[b1, b2, b3, b4] += fac * acc
    return out


# ----------------------------------------------------------------------
# assembly over shells
# ----------------------------------------------------------------------

def one_electron(shells: list[Shell], charges: np.ndarray,
                 centers: np.ndarray):
    """Spherical S, T, V and dipole matrices over the whole basis."""
    n = n_spherical(shells)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    v = np.zeros((n, n))
    dip = np.zeros((3, n, n))
    for i, sh1 in enumerate(shells):
        c2s1 = _sph(sh1.l)
        o1 = sh1.sph_offset
        for sh2 in shells[i:]:
            o2 = sh2.sph_offset
            c2s2 = _sph(sh2.l)
            sb, tb, vb, db = _pair_1e(
                sh1.l, sh2.l, sh1.exponents, sh1.coefficients,
                sh2.exponents, sh2.coefficients, sh1.center, sh2.center,
                charges, centers, True)
            for name, block, target in (("s", sb, s), ("t", tb, t),
                                        ("v", vb, v)):
                sph = c2s1 @ block @ c2s2.T
                target[o1:o1 + sh1.n_sph, o2:o2 + sh2.n_sph] = sph
                target[o2:o2 + sh2.n_sph, o1:o1 + sh1.n_sph] = sph.T
                _ = name
            for d in range(3):
                sph = c2s1 @ db[d] @ c2s2.T
                dip[d, o1:o1 + sh1.n_sph, o2:o2 + sh2.n_sph] = sph
                dip[d, o2:o2 + sh2.n_sph, o1:o1 + sh1.n_sph] = sph.T
    return s, t, v, dip


def overlap_cross(shells_a: list[Shell], shells_b: list[Shell]) -> np.ndarray:
    """Overlap between two different shell sets (for B1 x B2 blocks)."""
    na, nb = n_spherical(shells_a), n_spherical(shells_b)
    out = np.zeros((na, nb))
    dummy_q = np.zeros(0)
    dummy_c = np.zeros((0, 3))
    for sh1 in shells_a:
        for sh2 in shells_b:
            sb, _, _, _ = _pair_1e(
                sh1.l, sh2.l, sh1.exponents, sh1.coefficients,
                sh2.exponents, sh2.coefficients, sh1.center, sh2.center,
                dummy_q, dummy_c, False)
            sph = _sph(sh1.l) @ sb @ _sph(sh2.l).T
            out[sh1.sph_offset:sh1.sph_offset + sh1.n_sph,
                sh2.sph_offset:sh2.sph_offset + sh2.n_sph] = sph
    return out


def electron_repulsion(shells: list[Shell]) -> np.ndarray:
    """Dense spherical (pq|rs) tensor. Memory: n^4 doubles."""
    n = n_spherical(shells)
    g = np.zeros((n, n, n, n))
    ns = len(shells)
    for i in range(ns):
        shi = shells[i]
        for j in range(i + 1):
            shj = shells[j]
            for k in range(ns):
                shk = shells[k]
                for l_ in range(k + 1):
                    shl = shells[l_]
                    ij = i * (i + 1) // 2 + j
                    kl = k * (k + 1) // 2 + l_
                    if ij < kl:
                        continue
                    block = _quartet(
                        shi.l, shj.l, shk.l, shl.l,
                        shi.exponents, shi.coefficients,
                        shj.exponents, shj.coefficients,
                        shk.exponents, shk.coefficients,
                        shl.exponents, shl.coefficients,
                        shi.center, shj.center, shk.center, shl.center)
                    sph = np.einsum("ai,bj,ck,dl,ijkl->abcd",
                                    _sph(shi.l), _sph(shj.l), _sph(shk.l),
                                    _sph(shl.l), block, optimize=True)
                    _scatter_eri(g, sph, shi, shj, shk, shl)
    return g


def _scatter_eri(g, sph, shi, shj, shk, shl):
    oi, oj = shi.sph_offset, shj.sph_offset
    ok, ol = shk.sph_offset, shl.sph_offset
    si = slice(oi, oi + shi.n_sph)
    sj = slice(oj, oj + shj.n_sph)
    sk = slice(ok, ok + shk.n_sph)
    sl = slice(ol, ol + shl.n_sph)
    g[si, sj, sk, sl] = sph
    g[sj, si, sk, sl] = sph.transpose(1, 0, 2, 3)
    g[si, sj, sl, sk] = sph.transpose(0, 1, 3, 2)
    g[sj, si, sl, sk] = sph.transpose(1, 0, 3, 2)
    g[sk, sl, si, sj] = sph.transpose(2, 3, 0, 1)
    g[sl, sk, si, sj] = sph.transpose(3, 2, 0, 1)
    g[sk, sl, sj, si] = sph.transpose(2, 3, 1, 0)
    g[sl, sk, sj, si] = sph.transpose(3, 2, 1, 0)
