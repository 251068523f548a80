import numpy as np
import pytest

from iaoq.fci import fci_two_electron
from iaoq.orbitals import MOIntegrals
from iaoq.pauli import (PauliSum, jw_annihilation, jw_creation,
                        jw_excitation, map_hamiltonian)
from iaoq.vqse import (VQSEError, VqseMatrices, VqseProblem, absorb_one_body,
                       build_forms, lowest_energy, sample_statistics, solve)

RNG = np.random.default_rng(606)


def random_integrals(n, seed, scale=0.3):
    rng = np.random.default_rng(seed)
    h = np.diag(np.linspace(-1.0, 0.8, n)) + 0.1 * scale * _sym(rng.normal(size=(n, n)))
    g = rng.normal(size=(n, n, n, n)) * scale
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    return h, g / 8.0


def _sym(m):
    return 0.5 * (m + m.T)


def dense_vacuum(n):
    v = np.zeros(1 << (2 * n), dtype=complex)
    v[0] = 1.0
    return v


def singlet_state(n_full, n_active, seed):
    """Random two-electron singlet supported in the active window."""
    rng = np.random.default_rng(seed)
    c = _sym(rng.normal(size=(n_active, n_active)))
    vac = dense_vacuum(n_full)
    psi = np.zeros_like(vac)
    for p in range(n_active):
        up = jw_creation(p, "up", n_full).to_matrix()
        for q in range(n_active):
            dn = jw_creation(q, "down", n_full).to_matrix()
            psi += c[p, q] * (up @ (dn @ vac))
    return psi / np.linalg.norm(psi)


def dense_rdms(psi, n):
    rho_up = np.zeros((n, n))
    for p in range(n):
        for r in range(n):
            m = (jw_creation(p, "up", n) * jw_annihilation(r, "up", n)).to_matrix()
            rho_up[p, r] = (psi.conj() @ m @ psi).real
    rud = np.zeros((n, n, n, n))
    for p in range(n):
        for r in range(n):
            xu = jw_excitation(p, r, "up", n).to_matrix()
            for q in range(n):
                for s in range(n):
                    xd = jw_excitation(q, s, "down", n).to_matrix()
                    rud[p, r, q, s] = (psi.conj() @ xu @ xd @ psi).real
    return rho_up, rud


def spin_summed_single(p, r, n):
    return (jw_excitation(p, r, "up", n) + jw_excitation(p, r, "down", n))


def spin_summed_double(t, u, v, w, n):
    out = PauliSum(2 * n)
    for s1 in ("up", "down"):
        for s2 in ("up", "down"):
            term = (jw_excitation(t, u, s1, n) * jw_excitation(v, w, s2, n))
            if s1 == s2 and v == u:
                term = term - jw_excitation(t, w, s1, n)
            out = out + term
    return out.simplify(1e-14)


class TestAbsorbOneBody:
    def test_one_body_only_expectation(self):
        n = 2
        h = np.zeros((n, n))
        h[0, 0] = -0.8
        t = absorb_one_body(h, np.zeros((n, n, n, n)))
        psi = singlet_state(n, 1, seed=3)      # both electrons in orbital 0
        val = _dense_compact_expectation(t, psi, n)
        assert val == pytest.approx(2 * (-0.8), abs=1e-10)

    def test_matches_direct_hamiltonian(self):
        n = 3
        h, g = random_integrals(n, seed=11)
        t = absorb_one_body(h, g)
        psi = singlet_state(n, n, seed=4)
        mo = MOIntegrals.from_dense(0.0, h, g, 2)
        direct = map_hamiltonian(mo).to_matrix()
        want = (psi.conj() @ direct @ psi).real
        got = _dense_compact_expectation(t, psi, n)
        assert got == pytest.approx(want, abs=1e-10)

    def test_rejects_other_electron_counts(self):
        with pytest.raises(VQSEError):
            absorb_one_body(np.eye(2), np.zeros((2, 2, 2, 2)), n_elec=4)


def _dense_compact_expectation(t, psi, n):
    dim = psi.size
    acc = 0.0
    for e in range(n):
        for f in range(n):
            for g_ in range(n):
                for hh in range(n):
                    if abs(t[e, f, g_, hh]) < 1e-14:
                        continue
                    op = np.zeros((dim, dim), dtype=complex)
                    for s1 in ("up", "down"):
                        for s2 in ("up", "down"):
                            m = (jw_creation(e, s1, n) * jw_creation(g_, s2, n)
                                 * jw_annihilation(hh, s2, n)
                                 * jw_annihilation(f, s1, n))
                            op += m.to_matrix()
                    acc += t[e, f, g_, hh] * (psi.conj() @ op @ psi).real
    return acc


def build_problem(n_full, n_active, seed, e0=0.0):
    h, g = random_integrals(n_full, seed)
    t = absorb_one_body(h, g)
    psi = singlet_state(n_full, n_active, seed + 1000)
    rho_up, rud = dense_rdms(psi, n_full)
    problem = VqseProblem(t, e0, n_active, rho_up, rud)
    return problem, psi, h, g


class TestBruteForceOracle:
    @pytest.mark.parametrize("seed", range(4))
    def test_every_element_matches_dense_sandwich(self, seed):
        n_full, n_active = 3, 2
        problem, psi, h, g = build_problem(n_full, n_active, seed, e0=0.37)
        vm = build_forms(problem)
        mo = MOIntegrals.from_dense(0.37, h, g, 2)
        hdense = map_hamiltonian(mo).to_matrix()
        ops = [PauliSum.identity(2 * n_full)]
        for p in range(n_full):
            for r in range(n_active):
                ops.append(spin_summed_single(p, r, n_full))
        singles = [(p, r) for p in range(n_full) for r in range(n_active)]
        for k, (p, r) in enumerate(singles):
            for (q, s) in singles[k:]:
                ops.append(spin_summed_double(p, r, q, s, n_full))
        assert len(ops) == vm.h_mat.shape[0]
        for mu, a in enumerate(ops):
            adag = a.to_matrix().conj().T
            for nu, b in enumerate(ops):
                bm = b.to_matrix()
                s_bf = (psi.conj() @ adag @ bm @ psi).real
                h_bf = (psi.conj() @ adag @ hdense @ bm @ psi).real
                assert abs(vm.s_mat[mu, nu] - s_bf) < 1e-9, (mu, nu)
                assert abs(vm.h_mat[mu, nu] - h_bf) < 1e-9, (mu, nu)


class TestSolve:
    def test_normalization_entry(self):
        problem, _, _, _ = build_problem(3, 2, seed=1)
        vm = build_forms(problem)
        assert vm.s_mat[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_alpha_only_gives_reference_energy(self):
        problem, psi, h, g = build_problem(3, 2, seed=2, e0=-0.5)
        vm = build_forms(problem)
        sub = VqseMatrices(vm.h_mat[:1, :1], vm.s_mat[:1, :1], vm.labels[:1])
        mo = MOIntegrals.from_dense(-0.5, h, g, 2)
        want = (psi.conj() @ map_hamiltonian(mo).to_matrix() @ psi).real
        assert solve(sub) == pytest.approx(want, abs=1e-10)

    def test_h_equals_s_gives_one(self):
        m = np.array([[2.0, 0.3], [0.3, 1.0]])
        vm = VqseMatrices(m, m, ["1", "x"])
        assert solve(vm) == pytest.approx(1.0, abs=1e-12)

    def test_full_expansion_reaches_full_fci(self):
        n_full, n_active = 4, 2
        problem, psi, h, g = build_problem(n_full, n_active, seed=5, e0=0.1)
        mo_full = MOIntegrals.from_dense(0.1, h, g, 2)
        e_fci = fci_two_electron(mo_full).ground_energy
        e_vqse = lowest_energy(problem)
        assert e_vqse == pytest.approx(e_fci, abs=1e-8)
        assert e_vqse >= e_fci - 1e-9

    def test_active_only_expansion_reaches_active_fci(self):
        n_full, n_active = 4, 2
        problem, psi, h, g = build_problem(n_full, n_active, seed=6)
        vm = build_forms(problem)
        keep = [k for k, lab in enumerate(vm.labels)
                if lab == "1" or _label_inside_active(lab, n_active)]
        sub = VqseMatrices(vm.h_mat[np.ix_(keep, keep)],
                           vm.s_mat[np.ix_(keep, keep)],
                           [vm.labels[k] for k in keep])
        e_active = solve(sub)
        mo_act = MOIntegrals.from_dense(
            0.0, h[:n_active, :n_active],
            g[:n_active, :n_active, :n_active, :n_active], 2)
        e_fci_act = fci_two_electron(mo_act).ground_energy
        assert e_active == pytest.approx(e_fci_act, abs=1e-8)
        # monotone improvement: enlarging the expansion cannot raise E
        assert solve(vm) <= e_active + 1e-9

    def test_sample_statistics_exact_path(self):
        problem, _, _, _ = build_problem(3, 2, seed=7)
        mean, err = sample_statistics(lambda k: problem, n_repeats=5)
        assert err == 0.0
        assert mean == pytest.approx(lowest_energy(problem), abs=1e-12)


def _label_inside_active(label, na):
    import re
    nums = [int(x) for x in re.findall(r"\d+", label)]
    return bool(nums) and all(v < na for v in nums)
