"""Variational subspace expansion for two-electron references.

The reference lives in an active subset A of a full orthonormal orbital
basis; expansion operators alpha + beta_{Pr} E_Pr + gamma_{TuVw} E_TuVw
excite from A into the full basis.  Because the reference has no weight
outside A and holds exactly two electrons, every bilinear form reduces
to contractions of the zero-padded active one-/two-body density matrices
with the compact two-body tensor T; the contractions are generated by a
small Wick engine (normal ordering against the true vacuum, discarding
three-or-more-body normal cores, which vanish for two electrons) and
evaluated as einsums.

Conventions: active orbitals are the first n_active columns of the full
basis; density matrices are spin blocks rho_up (= rho_down) and
rho_ud[p, r, q, s] = <adag_{p up} adag_{q down} a_{s down} a_{r up}>,
both zero-padded to the full basis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


class VQSEError(ValueError):
    pass


def absorb_one_body(h: np.ndarray, eri: np.ndarray, n_elec: int = 2) -> np.ndarray:
    """Compact two-body tensor T with the one-body part folded in.

    T_{EFGH} = (EF|GH)/2 + [d_GH h_EF + d_EF h_GH] / (2 (n_elec - 1)),
    so that sum T adag adag a a reproduces h + eri/2 on the n_elec sector
    (up to the constant e0, which stays outside).
    """
    if n_elec != 2:
        raise VQSEError("the compact fold is defined for two-electron problems")
    n = h.shape[0]
    t = 0.5 * np.asarray(eri, dtype=float).copy()
    eye = np.eye(n)
    t += np.einsum("gh,ef->efgh", eye, h) / (2.0 * (n_elec - 1))
    t += np.einsum("ef,gh->efgh", eye, h) / (2.0 * (n_elec - 1))
    return t


# ----------------------------------------------------------------------
# Wick engine
# ----------------------------------------------------------------------
#
# Operator strings are tuples of (index_symbol, spin_symbol, dagger).
# Index symbols are small ints; spins are concrete "u"/"d" (all spin sums
# are expanded up front).  Normal ordering proceeds by bubbling
# annihilators right; a contraction of a_i a^dag_j yields a delta that
# merges the two index symbols.  Normal cores with more than two
# annihilators vanish on a two-electron state; the survivors map to the
# singlet density blocks (same-spin two-body cores vanish, spin
# off-diagonal one-body cores vanish).

@dataclass
class _Term:
    coeff: float
    ops: tuple                        # ((idx, spin, dag), ...)
    merges: tuple = ()                # ((i, j), ...) index identifications
    factors: tuple = ()               # (("rho1", (p, q)) | ("rud", (p,r,q,s)))


def _normal_order(term: _Term, out: list) -> None:
    ops = term.ops
    for k in range(len(ops) - 1):
        a, b = ops[k], ops[k + 1]
        if not a[2] and b[2]:         # annihilator immediately left of creator
            swapped = _Term(-term.coeff, ops[:k] + (b, a) + ops[k + 2:],
                            term.merges, term.factors)
            _normal_order(swapped, out)
            if a[1] == b[1]:          # spin delta survives
                contracted = _Term(term.coeff, ops[:k] + ops[k + 2:],
                                   term.merges + ((a[0], b[0]),),
                                   term.factors)
                _normal_order(contracted, out)
            return
    out.append(term)


def _core_to_factors(term: _Term) -> _Term | None:
    """Map a normal-ordered core to density factors (or drop it)."""
    ops = term.ops
    creators = [o for o in ops if o[2]]
    annih = [o for o in ops if not o[2]]
    if len(creators) != len(annih):
        return None                   # cannot survive on a number eigenstate
    if len(annih) > 2:
        return None                   # three-body core on a two-electron state
    if not ops:
        return term
    if len(annih) == 1:
        (p, s1, _), (q, s2, _) = creators[0], annih[0]
        if s1 != s2:
            return None               # Sz-off-diagonal one-body block
        return _Term(term.coeff, (), term.merges,
                     term.factors + (("rho1", (p, q)),))
    # two-body core: adag adag a a with ops = (c1, c2, a1, a2)
    (p, s1, _), (q, s2, _) = creators
    (r, s3, _), (t, s4, _) = annih
    if s1 == s2:
        return None                   # same-spin block vanishes for a singlet
    # match <adag_{p s1} adag_{q s2} a_{s s2} a_{r s1}> = rho^{s1 s2}[p,r,q,s]
    if s1 == s4 and s2 == s3:
        pattern = (p, t, q, r)
        sign = 1.0
    elif s1 == s3 and s2 == s4:
        pattern = (p, r, q, t)
        sign = -1.0
    else:
        return None
    if s1 == "d":                     # express via the up-down block
        pattern = (pattern[2], pattern[3], pattern[0], pattern[1])
    return _Term(sign * term.coeff, (), term.merges,
                 term.factors + (("rud", pattern),))


def _expand_string(ops: tuple) -> list[_Term]:
    raw: list[_Term] = []
    _normal_order(_Term(1.0, ops), raw)
    out = []
    for t in raw:
        mapped = _core_to_factors(t)
        if mapped is not None and mapped.coeff != 0.0:
            out.append(mapped)
    return out


@dataclass
class _BlockPlan:
    """Symbolic contraction plan for one bilinear-form block."""

    free: tuple            # (index symbol, range) pairs defining output axes
    with_t: bool
    terms: list = field(default_factory=list)   # (coeff, t_idx, factors, merges)


def _spin_sums(n_vars: int):
    return itertools.product("ud", repeat=n_vars)


def _plan_block(bra: str, with_h: bool, ket: str) -> _BlockPlan:
    """Build the contraction plan for <bra^dag [H] ket>.

    bra/ket in {"1", "s", "d"}: the identity, E_Pr (single) or E_TuVw
    (double).  Index symbols: bra single (s=0 active, Q=1 full), bra
    double (y=0, X=1, a=2, Z=3 with y,a active), H (E=4, F=5, G=6, H=7),
    ket single (P=8 full, r=9 active), ket double (T=8, u=9, V=10, w=11).
    """
    free: list = []
    n_spins = 0
    bra_template = []
    if bra == "s":
        # E_sQ = (E_Qs)^dag = sum adag_{s} a_{Q}; row label is (Q, s)
        bra_template = [(0, "b0", True), (1, "b0", False)]
        free += [(1, "full"), (0, "active")]
        n_spins += 1
    elif bra == "d":
        # (E_{XyZa})^dag = sum adag_y adag_a a_Z a_X
        bra_template = [(0, "b0", True), (2, "b1", True),
                        (3, "b1", False), (1, "b0", False)]
        free += [(1, "full"), (0, "active"), (3, "full"), (2, "active")]
        n_spins += 2
    h_template = []
    if with_h:
        h_template = [(4, "h0", True), (6, "h1", True),
                      (7, "h1", False), (5, "h0", False)]
        n_spins += 2
    ket_template = []
    if ket == "s":
        ket_template = [(8, "k0", True), (9, "k0", False)]
        free += [(8, "full"), (9, "active")]
        n_spins += 1
    elif ket == "d":
        ket_template = [(8, "k0", True), (10, "k1", True),
                        (11, "k1", False), (9, "k0", False)]
        free += [(8, "full"), (9, "active"), (10, "full"), (11, "active")]
        n_spins += 2

    spin_vars = sorted({s for _, s, _ in bra_template + h_template + ket_template})
    plan = _BlockPlan(tuple(free), with_h)
    for assignment in _spin_sums(len(spin_vars)):
        smap = dict(zip(spin_vars, assignment))
        ops = tuple((idx, smap[s], dag)
                    for idx, s, dag in bra_template + h_template + ket_template)
        for term in _expand_string(ops):
            plan.terms.append((term.coeff, term.factors, term.merges))
    return plan


_PLAN_CACHE: dict[tuple, _BlockPlan] = {}


def _get_plan(bra: str, with_h: bool, ket: str) -> _BlockPlan:
    key = (bra, with_h, ket)
    if key not in _PLAN_CACHE:
        _PLAN_CACHE[key] = _plan_block(bra, with_h, ket)
    return _PLAN_CACHE[key]


class _UnionFind(dict):
    def find(self, x):
        while self.get(x, x) != x:
            x = self[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self[max(ra, rb)] = min(ra, rb)


def _evaluate_plan(plan: _BlockPlan, t: np.ndarray | None, rho1: np.ndarray,
                   rud: np.ndarray, n_active: int) -> np.ndarray:
    """Evaluate a block plan as a sum of einsums.

    Index symbols merged with an active-ranged free index are restricted
    to the active window by slicing the operands (the density tensors
    are zero-padded, so the restriction is exact), which keeps the
    doubles blocks at active-window size instead of the full grid.
    """
    n = rho1.shape[0]
    sizes = {"full": n, "active": n_active}
    active_syms = {s for s, rng in plan.free if rng == "active"}
    out_shape = tuple(sizes[rng] for _, rng in plan.free)
    result = np.zeros(out_shape if out_shape else ())
    letters = "abcdefghijklmnopqrstuvwxyz"
    for coeff, factors, merges in plan.terms:
        uf = _UnionFind()
        for i, j in merges:
            uf.union(i, j)
        roots_active = {uf.find(s) for s in active_syms}
        sym_letter: dict[int, str] = {}
        next_letter = 0

        def letter_of(sym):
            nonlocal next_letter
            root = uf.find(sym)
            if root not in sym_letter:
                sym_letter[root] = letters[next_letter]
                next_letter += 1
            return sym_letter[root]

        def is_active(sym):
            return uf.find(sym) in roots_active

        def add_operand(tensor, syms, scripts, operands):
            scripts.append("".join(letter_of(s) for s in syms))
            slicer = tuple(slice(0, n_active) if is_active(s) else slice(None)
                           for s in syms)
            operands.append(tensor[slicer])

        operands: list = []
        scripts: list = []
        if plan.with_t:
            add_operand(t, (4, 5, 6, 7), scripts, operands)
        for kind, idxs in factors:
            add_operand(rho1 if kind == "rho1" else rud, idxs,
                        scripts, operands)
        out_script = "".join(letter_of(s) for s, _ in plan.free)
        if not operands:              # the bare <1> = 1 normalization entry
            result = result + coeff
            continue
        try:
            block = np.einsum(",".join(scripts) + "->" + out_script,
                              *operands, optimize=True)
        except ValueError:
            # an output letter may repeat (free indices merged by a
            # delta) or be absent from every operand
            block = _einsum_with_deltas(scripts, operands, out_script,
                                        [sizes[rng] if not is_active(s)
                                         else n_active
                                         for s, rng in plan.free])
        result = result + coeff * block
    return result


def _einsum_with_deltas(scripts, operands, out_script, out_sizes):
    """Einsum fallback inserting identities for degenerate output axes."""
    scripts = list(scripts)
    operands = list(operands)
    present = set("".join(scripts))
    for ch, size in zip(out_script, out_sizes):
        if ch not in present:
            scripts.append(ch)
            operands.append(np.ones(size))
            present.add(ch)
    avail = (c for c in "zyxwvutsrqpon" if c not in present)
    seen: dict[str, int] = {}
    new_out = []
    for ch, size in zip(out_script, out_sizes):
        if ch in seen:
            alias = next(avail)
            scripts.append(ch + alias)
            eye = np.eye(max(seen[ch], size))[:seen[ch], :size]
            operands.append(eye)
            new_out.append(alias)
        else:
            seen[ch] = size
            new_out.append(ch)
    return np.einsum(",".join(scripts) + "->" + "".join(new_out),
                     *operands, optimize=True)


# ----------------------------------------------------------------------
# problem container and matrix assembly
# ----------------------------------------------------------------------

@dataclass
class VqseProblem:
    """Two-electron subspace-expansion problem.

    ``t`` is the compact two-body tensor over the full orthonormal basis
    (one-body already absorbed, constant e0 kept separately); the active
    orbitals are the first ``n_active`` basis members; ``rho_up`` and
    ``rho_ud`` are the zero-padded active-space density blocks.
    """

    t: np.ndarray
    e0: float
    n_active: int
    rho_up: np.ndarray
    rho_ud: np.ndarray

    @property
    def n_full(self) -> int:
        return self.t.shape[0]

    def validate(self) -> None:
        n, na = self.n_full, self.n_active
        if not 1 <= na <= n:
            raise VQSEError("active window out of range")
        tr = np.trace(self.rho_up)
        if abs(2.0 * tr - 2.0) > 1e-6:
            raise VQSEError(f"spin-summed density must trace to 2, got {2 * tr}")
        if np.abs(self.rho_up[na:, :]).max() > 1e-10 \
                or np.abs(self.rho_up[:, na:]).max() > 1e-10:
            raise VQSEError("density has weight outside the active window")


@dataclass
class VqseMatrices:
    h_mat: np.ndarray
    s_mat: np.ndarray
    labels: list[str]

    def validate(self, psd_tol: float | None = 1e-9) -> None:
        for name, m in (("H", self.h_mat), ("S", self.s_mat)):
            if np.abs(m - m.T).max() > 1e-9:
                raise VQSEError(f"{name} matrix is not symmetric")
        # shot-sampled density matrices can push S slightly indefinite;
        # the canonical-orthogonalization threshold in solve() absorbs
        # that, so the strict gate applies to the exact path only
        if psd_tol is not None \
                and np.linalg.eigvalsh(self.s_mat).min() < -psd_tol:
            raise VQSEError("overlap matrix is not positive semidefinite")


def _double_index_pairs(n: int, na: int) -> list[tuple[int, int, int, int]]:
    """Unique (T, u, V, w) with the (Tu) >= (Vw) pair order deduplicated."""
    singles = [(p, r) for p in range(n) for r in range(na)]
    out = []
    for k, (p, r) in enumerate(singles):
        for (q, s) in singles[k:]:
            out.append((p, r, q, s))
    return out


def build_forms(problem: VqseProblem,
                psd_tol: float | None = 1e-9) -> VqseMatrices:
    """Assemble the H and S bilinear forms over {1, singles, doubles}."""
    problem.validate()
    n, na = problem.n_full, problem.n_active
    rho1 = problem.rho_up                # per-spin one-body block
    rud = problem.rho_ud
    t = problem.t

    def block(bra, with_h, ket):
        plan = _get_plan(bra, with_h, ket)
        return _evaluate_plan(plan, t if with_h else None, rho1, rud, na)

    singles = [(p, r) for p in range(n) for r in range(na)]
    doubles = _double_index_pairs(n, na)
    labels = (["1"] + [f"s:{r}->{p}" for p, r in singles]
              + [f"d:({r},{s})->({p},{q})" for p, r, q, s in doubles])
    n_s, n_d = len(singles), len(doubles)
    d_idx = [(((p * na + r) * n) + q) * na + s for p, r, q, s in doubles]

    def rows(arr, kind):
        """Flatten leading block axes to the basis enumeration."""
        if kind == "1":
            return np.asarray(arr)[None, ...]
        if kind == "s":
            return arr.reshape((n_s,) + arr.shape[2:])
        return arr.reshape((n * na * n * na,) + arr.shape[4:])[d_idx]

    def assemble(with_h):
        mat = np.zeros((1 + n_s + n_d, 1 + n_s + n_d))
        offs = {"1": (0, 1), "s": (1, n_s), "d": (1 + n_s, n_d)}
        kinds = ("1", "s", "d")
        for bi, bk in enumerate(kinds):
            for ck in kinds[bi:]:
                raw = block(bk, with_h, ck)
                if bk == "1" and ck == "1":
                    b = np.atleast_2d(raw)
                else:
                    b = rows(np.asarray(raw), bk)          # rows of bra kind
                    b = rows(np.moveaxis(
                        b, 0, -1), ck).T if ck != "1" else b[:, None]
                r0, rn = offs[bk]
                c0, cn = offs[ck]
                mat[r0:r0 + rn, c0:c0 + cn] = b
                mat[c0:c0 + cn, r0:r0 + rn] = b.T
        return mat

    s_mat = assemble(False)
    s_mat[0, 0] = 1.0
    h_mat = assemble(True)
    # the e0 shift rides on top of the compact operator through S
    h_mat = h_mat + problem.e0 * s_mat
    out = VqseMatrices(0.5 * (h_mat + h_mat.T), 0.5 * (s_mat + s_mat.T), labels)
    out.validate(psd_tol)
    return out


def solve(vm: VqseMatrices, threshold: float = 1e-8) -> float:
    """Lowest eigenvalue of H v = E S v by canonical orthogonalization."""
    s, u = np.linalg.eigh(vm.s_mat)
    keep = s >= threshold * s.max()
    if not keep.any():
        raise VQSEError("empty retained subspace")
    x = u[:, keep] / np.sqrt(s[keep])
    h_red = x.T @ vm.h_mat @ x
    vals = np.linalg.eigvalsh(0.5 * (h_red + h_red.T))
    return float(vals[0])


def lowest_energy(problem: VqseProblem,
                  psd_tol: float | None = 1e-9) -> float:
    return solve(build_forms(problem, psd_tol))


def problem_from_integrals(mo_full, n_active: int, rdm_up: np.ndarray,
                           rdm_ud: np.ndarray) -> VqseProblem:
    """Assemble the expansion problem from full-basis folded integrals.

    ``mo_full`` must be ordered with the active orbitals first; the
    active-space density blocks (n_active-sized) are zero-padded here.
    """
    n = mo_full.n_orb
    t = absorb_one_body(mo_full.h, mo_full.eri_dense(), mo_full.n_elec)
    up = np.zeros((n, n))
    up[:n_active, :n_active] = rdm_up
    ud = np.zeros((n, n, n, n))
    ud[:n_active, :n_active, :n_active, :n_active] = rdm_ud
    return VqseProblem(t, mo_full.e0, n_active, up, ud)


def sample_statistics(problem_builder, n_repeats: int = 10,
                      shots: int | None = None) -> tuple[float, float]:
    """Mean and standard error of the VQSE energy over re-measured RDMs.

    ``problem_builder(k)`` must return the VqseProblem built from the
    k-th independent density-matrix measurement.  The expansion is
    heavily redundant (exact null directions of S), so shot noise lifts
    spurious directions; when ``shots`` is given the orthogonalization
    cutoff is scaled to the expected noise floor (random-matrix norm of
    the element noise), which keeps the estimator unbiased within its
    standard error.  The error is the sample standard deviation over
    the repeats divided by sqrt(n_repeats).
    """
    if n_repeats < 2:
        raise VQSEError("need at least two repeats for a standard error")
    vals = []
    for k in range(n_repeats):
        problem = problem_builder(k)
        vm = build_forms(problem, psd_tol=None if shots else 1e-9)
        threshold = 1e-8
        if shots:
            smax = float(np.abs(np.linalg.eigvalsh(vm.s_mat)).max())
            noise_norm = 2.0 / np.sqrt(shots) * np.sqrt(vm.s_mat.shape[0])
            threshold = max(1e-8, 2.0 * float(noise_norm) / smax)
        vals.append(solve(vm, threshold=threshold))
    mean = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / np.sqrt(n_repeats))
    return mean, err
