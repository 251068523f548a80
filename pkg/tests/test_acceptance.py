"""Acceptance suite: every primary criterion at its stated tolerance.

Each test prints one PASS/FAIL line; the committed fixtures under
src/iaoq/fixtures are the only inputs.  Hardware-only numbers from the
published tables (mean deviations, purity plateaus) are structural
stand-ins here, as stated per criterion.
"""

import time

import numpy as np
import pytest

from iaoq.analysis import (PESCurve, fit_equilibrium, measure_rdms,
                           mean_deviation, s_squared, energy_from_rdms)
from iaoq.bundle import load_grid
from iaoq.fci import fci, fci_two_electron
from iaoq.fixtures import fixture_path
from iaoq.iao import (boys_localize, build_iao, lowdin_orthonormalize,
                      occupied_span_residual)
from iaoq.orbitals import (MOIntegrals, _take_orbitals, ao2mo, canonicalize,
                           complete_basis, rhf_energy)
from iaoq.pauli import (JWEncoding, PairEncoding, jw_annihilation,
                        jw_creation, map_hamiltonian, number_operator,
                        pair_hamiltonian, sz_operator)
from iaoq.qeom import excitation_energies
from iaoq.qite import QiteConfig, qite_run
from iaoq.simulator import (Circuit, NoiseModel, QuantumState,
                            build_calibration, expectation, purity, run)
from iaoq.vqe import (AnsatzSpec, build_circuit, energy, hf_reference_mask,
                      minimize_exact, parameter_shift_gradient)

RNG = np.random.default_rng(0xACCE97)


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def h2_sto6g():
    return load_grid(fixture_path("h2_sto6g"))


@pytest.fixture(scope="module")
def h2_ccpvdz():
    return load_grid(fixture_path("h2_ccpvdz"))


@pytest.fixture(scope="module")
def nh3_grid():
    return load_grid(fixture_path("nh3_hono_luno"))


@pytest.fixture(scope="module")
def h2_sto6g_fci_curve(h2_sto6g):
    rs, es = [], []
    for r, b in h2_sto6g:
        mo = ao2mo(b, b.mo_coeff)
        es.append(fci(mo, 2, 0.0).ground_energy)
        rs.append(r)
    return PESCurve(rs, es, label="fci")


@pytest.fixture(scope="module")
def nh3_fci(nh3_grid):
    rs, es, grounds, hams = [], [], [], []
    for r, ham in nh3_grid:
        res = fci(ham)
        rs.append(r)
        es.append(res.ground_energy)
        grounds.append(res)
        hams.append(ham)
    return rs, es, grounds, hams


class TestTable1:
    def test_h2_sto6g_fci_row(self, h2_sto6g_fci_curve):
        t0 = time.monotonic()
        fit = fit_equilibrium(h2_sto6g_fci_curve, model="morse")
        elapsed = time.monotonic() - t0
        ok = (abs(fit.binding - 0.2092) <= 0.003
              and abs(fit.r_eq - 0.715) <= 0.015 and elapsed < 5.0)
        report("Table 1 H2/STO-6G FCI",
               ok, f"dE={fit.binding:.5f} (0.2092+-0.003), "
                   f"R_eq={fit.r_eq:.4f} (0.715+-0.015), fit {elapsed:.2f}s")

    def test_h2_sto6g_quccsd_row(self, h2_sto6g, h2_sto6g_fci_curve):
        t0 = time.monotonic()
        rs, es = [], []
        theta = None
        for r, b in h2_sto6g:
            mo = ao2mo(b, b.mo_coeff)
            ham = map_hamiltonian(mo)
            spec = AnsatzSpec("quccsd", 4,
                              reference=hf_reference_mask(2, 1),
                              occupied=(0,), virtual=(1,))
            res = minimize_exact(spec, ham, theta0=theta)
            theta = res.parameters
            rs.append(r)
            es.append(res.energy)
        elapsed = time.monotonic() - t0
        vqe_curve = PESCurve(rs, es, label="quccsd")
        dev = max(abs(a - b) for a, b in
                  zip(es, h2_sto6g_fci_curve.energies))
        fit_v = fit_equilibrium(vqe_curve, model="morse")
        fit_f = fit_equilibrium(h2_sto6g_fci_curve, model="morse")
        ok = (dev < 1e-6 and elapsed < 30.0
              and abs(fit_v.binding - fit_f.binding) < 1e-4
              and abs(fit_v.r_eq - fit_f.r_eq) < 1e-3)
        report("Table 1 H2/STO-6G q-UCCSD", ok,
               f"max|dE| vs FCI {dev:.2e} (<1e-6), scan {elapsed:.1f}s (<30)")


class TestTable2:
    def test_nh3_fci_row(self, nh3_fci):
        t0 = time.monotonic()
        rs, es, _, _ = nh3_fci
        fit = fit_equilibrium(PESCurve(rs, es), model="morse")
        elapsed = time.monotonic() - t0
        ok = (abs(fit.binding - 0.180) <= 0.008
              and abs(fit.r_eq - 0.996) <= 0.015 and elapsed < 5.0)
        report("Table 2 NH3 HONO/LUNO FCI", ok,
               f"dE={fit.binding:.5f} (0.180+-0.008), "
               f"R_eq={fit.r_eq:.4f} (0.996+-0.015), {elapsed:.2f}s")

    def test_vqe_so4_exactness(self, nh3_fci):
        rs, es, _, hams = nh3_fci
        worst = 0.0
        for e_fci, ham in zip(es, hams):
            best = None
            for attempt, scale in enumerate((0.0, 0.1, 0.3)):
                theta0 = scale * np.random.default_rng(attempt).standard_normal(6)
                res = minimize_exact(AnsatzSpec("so4", 2, reference=0),
                                     ham, theta0=theta0)
                if best is None or res.energy < best:
                    best = res.energy
                if best - e_fci < 1e-9:
                    break
            worst = max(worst, best - e_fci)
        ok = worst < 1e-7
        report("VQE SO(4) d=1 exactness (13 geometries)", ok,
               f"worst E-E_FCI = {worst:.2e} (<1e-7)")


class TestQITE:
    def test_noiseless_and_mitigated(self, nh3_fci):
        rs, es, _, hams = nh3_fci
        config = QiteConfig(dtau=0.5, beta_total=7.0)
        worst = 0.0
        wins = 0
        for k, (e_fci, ham) in enumerate(zip(es, hams)):
            hf = QuantumState.from_bits(2, 0)
            res = qite_run(ham, hf, config)
            worst = max(worst, abs(res.final_energy - e_fci))
            noise = NoiseModel(p01=0.02, p10=0.02)
            calib = build_calibration(noise, 2, 200_000, seed=77)
            raw = qite_run(ham, hf, config, shots=8192, seed=100 + k,
                           noise=noise)
            fixed = qite_run(ham, hf, config, shots=8192, seed=100 + k,
                             noise=noise, calibration=calib)
            if abs(fixed.final_energy - e_fci) < abs(raw.final_energy - e_fci):
                wins += 1
        ok = worst < 1e-4 and wins >= 11
        report("QITE dt=0.5 beta=7", ok,
               f"worst noiseless |dE| = {worst:.2e} (<1e-4); "
               f"mitigation wins {wins}/13 (>=11)")


class TestQEOM:
    def test_oracle_equivalence_and_metric_trend(self, nh3_fci):
        rs, es, grounds, hams = nh3_fci
        worst = 0.0
        dets = {}
        for r, res, ham in zip(rs, grounds, hams):
            ground = QuantumState(2, vec=res.statevector(0))
            energies, det_g = excitation_energies(
                ground, ham, 1, 2, PairEncoding())
            gaps = res.energies[1:] - res.energies[0]
            for e in energies:
                worst = max(worst, float(np.min(np.abs(gaps - e))))
            dets[r] = abs(det_g)
        trend = dets[3.0] * 10.0 <= dets[1.0]
        ok = worst < 1e-8 and trend
        report("qEOM oracle equivalence + det(G) trend", ok,
               f"worst gap deviation {worst:.2e} (<1e-8); "
               f"|detG|(3.0)={dets[3.0]:.2e} vs |detG|(1.0)={dets[1.0]:.2e}")


class TestVQSE:
    def test_fixture_scan_equals_full_fci(self, h2_ccpvdz):
        from iaoq.vqse import lowest_energy, problem_from_integrals
        t0 = time.monotonic()
        worst = 0.0
        for r, b in h2_ccpvdz:
            basis = boys_localize(
                lowdin_orthonormalize(build_iao(b), b.s1), b.dipole, b.s1)
            full_c = complete_basis(basis.coeff, b.s1)
            mo_full = ao2mo(b, full_c)
            mo_act = _take_orbitals(mo_full, [0, 1])
            ham2 = PairEncoding().hamiltonian(mo_act)
            w, v = np.linalg.eigh(ham2.to_matrix())
            ground = QuantumState(2, vec=v[:, 0].astype(complex))
            rdms = measure_rdms(ground, 2, PairEncoding())
            prob = problem_from_integrals(mo_full, 2, rdms.rdm1["up"],
                                          rdms.rdm2[("up", "down")])
            e_vqse = lowest_energy(prob)
            e_full = fci_two_electron(mo_full).ground_energy
            worst = max(worst, abs(e_vqse - e_full))
        elapsed = time.monotonic() - t0
        ok = worst < 1e-8 and elapsed < 60.0
        report("VQSE == full-basis FCI on H2/cc-pVDZ", ok,
               f"worst |dE| = {worst:.2e} (<1e-8), {elapsed:.1f}s (<60)")

    def test_brute_force_oracle_25_problems(self):
        import sys
        sys.path.insert(0, fixture_path("..", "..", "..", "tests"))
        from test_vqse import build_problem, spin_summed_double, \
            spin_summed_single
        from iaoq.pauli import PauliSum
        from iaoq.vqse import build_forms
        worst = 0.0
        for seed in range(25):
            n_full, n_active = 3, 2
            problem, psi, h, g = build_problem(n_full, n_active, seed,
                                               e0=0.1 * seed)
            vm = build_forms(problem)
            mo = MOIntegrals.from_dense(0.1 * seed, h, g, 2)
            hdense = map_hamiltonian(mo).to_matrix()
            ops = [PauliSum.identity(2 * n_full)]
            singles = [(p, r) for p in range(n_full) for r in range(n_active)]
            for p, r in singles:
                ops.append(spin_summed_single(p, r, n_full))
            for k, (p, r) in enumerate(singles):
                for (q, s) in singles[k:]:
                    ops.append(spin_summed_double(p, r, q, s, n_full))
            mats = [op.to_matrix() for op in ops]
            for mu, a in enumerate(mats):
                adag = a.conj().T
                for nu, b in enumerate(mats):
                    s_bf = (psi.conj() @ adag @ b @ psi).real
                    h_bf = (psi.conj() @ adag @ hdense @ b @ psi).real
                    worst = max(worst, abs(vm.s_mat[mu, nu] - s_bf),
                                abs(vm.h_mat[mu, nu] - h_bf))
        ok = worst < 1e-9
        report("VQSE Wick forms vs dense oracle (25 problems)", ok,
               f"worst element deviation {worst:.2e} (<1e-9)")


class TestIAO:
    def test_defining_property_all_bundles(self, h2_sto6g, h2_ccpvdz):
        worst = 0.0
        for grid in (h2_sto6g, h2_ccpvdz):
            for r, b in grid:
                basis = lowdin_orthonormalize(build_iao(b), b.s1)
                worst = max(worst,
                            occupied_span_residual(basis, b.s1, b.c_occ))
        ok = worst < 1e-8
        report("IAO occupied-span residual (all committed bundles)", ok,
               f"worst residual {worst:.2e} (<1e-8)")

    def test_iao_energy_sandwich(self, h2_ccpvdz):
        ok = True
        detail = []
        for r, b in h2_ccpvdz:
            basis = boys_localize(
                lowdin_orthonormalize(build_iao(b), b.s1), b.dipole, b.s1)
            mo_iao = ao2mo(b, basis.coeff)
            c_occ = basis.coeff.T @ b.s1 @ b.c_occ
            mo_iao, _, _ = canonicalize(mo_iao, c_occ)
            e_iao = fci(mo_iao, 2, 0.0).ground_energy
            e_rhf = rhf_energy(mo_iao, 1)
            e_full = fci_two_electron(ao2mo(b, b.mo_coeff)).ground_energy
            if not (e_full - 1e-9 <= e_iao <= e_rhf + 1e-9):
                ok = False
                detail.append(f"violated at r={r}")
        report("IAO FCI between active RHF and full-B1 FCI", ok,
               "; ".join(detail) or "ordering holds at all grid points")


class TestGradientSuite:
    def test_fifty_random_vectors_three_ansaetze(self):
        mo = _toy_mo()
        ham_pair = pair_hamiltonian(mo)
        ham_jw = map_hamiltonian(mo)
        specs = {
            "ry": (AnsatzSpec("ry", 2, reference=0, depth=2), ham_pair),
            "so4": (AnsatzSpec("so4", 2, reference=0, depth=1), ham_pair),
            "quccsd": (AnsatzSpec("quccsd", 4,
                                  reference=hf_reference_mask(2, 1),
                                  occupied=(0,), virtual=(1,)), ham_jw),
        }
        worst = 0.0
        for kind, (spec, ham) in specs.items():
            for _ in range(50):
                theta = RNG.uniform(-1.2, 1.2, size=spec.n_parameters())
                g = parameter_shift_gradient(spec, theta, ham)
                eps = 1e-5
                for k in range(theta.size):
                    tp, tm = theta.copy(), theta.copy()
                    tp[k] += eps
                    tm[k] -= eps
                    fd = (energy(spec, tp, ham) - energy(spec, tm, ham)) \
                        / (2 * eps)
                    worst = max(worst, abs(g[k] - fd))
        ok = worst < 1e-6
        report("Gradient suite (50 vectors x 3 ansaetze)", ok,
               f"max |shift - fd| = {worst:.2e} (<1e-6)")


class TestMappingSuite:
    def test_car_hermiticity_symmetries_rdm(self):
        n = 3
        eye = np.eye(2 ** (2 * n))
        worst_car = 0.0
        for p in range(n):
            for q in range(n):
                for s1 in ("up", "down"):
                    for s2 in ("up", "down"):
                        a = jw_annihilation(p, s1, n).to_matrix()
                        cdag = jw_creation(q, s2, n).to_matrix()
                        anti = a @ cdag + cdag @ a
                        want = eye if (p == q and s1 == s2) else 0 * eye
                        worst_car = max(worst_car,
                                        np.abs(anti - want).max())
        mo = _toy_mo()
        ham = map_hamiltonian(mo)
        herm = ham.is_hermitian(1e-12)
        comm_n = ham.commutator(number_operator(2)).simplify(1e-12).norm()
        comm_sz = ham.commutator(sz_operator(2)).simplify(1e-12).norm()
        res = fci(mo, 2, 0.0)
        state = QuantumState.from_statevector(res.statevector(0))
        rdms = measure_rdms(state, 2, JWEncoding(2))
        recon = abs(energy_from_rdms(rdms, mo) - res.ground_energy)
        ok = (worst_car < 1e-12 and herm and comm_n < 1e-9
              and comm_sz < 1e-9 and recon < 1e-9)
        report("Mapping suite (CARs, symmetries, RDM reconstruction)", ok,
               f"CAR dev {worst_car:.1e}, [H,N]={comm_n:.1e}, "
               f"[H,Sz]={comm_sz:.1e}, RDM energy dev {recon:.1e}")


class TestNoiseSuite:
    def test_purity_and_spin_drift(self):
        mo = _toy_mo()
        ham = pair_hamiltonian(mo)
        spec = AnsatzSpec("so4", 2, reference=0)
        res = minimize_exact(spec, ham, theta0=0.1 * RNG.standard_normal(6))
        circ = build_circuit(spec, res.parameters).circuit
        purities, spins = [], []
        for gamma in (0.0, 0.02, 0.05, 0.1):
            state = run(circ, QuantumState.zero(2),
                        NoiseModel(gamma=gamma) if gamma else None)
            purities.append(purity(state.density()))
            spins.append(abs(s_squared(state, PairEncoding())))
        ok = (abs(purities[0] - 1.0) < 1e-10
              and all(a > b for a, b in zip(purities, purities[1:]))
              and spins[0] < 1e-9
              and all(a < b for a, b in zip(spins, spins[1:])))
        report("Noise suite (purity, S^2 drift)", ok,
               f"purities {np.round(purities, 4).tolist()}, "
               f"S^2 {np.round(spins, 5).tolist()}")


def _toy_mo(seed=404):
    rng = np.random.default_rng(seed)
    n = 2
    h = np.diag([-1.2, -0.3])
    g = rng.normal(size=(n, n, n, n)) * 0.25
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    g /= 8.0
    for p in range(n):
        g[p, p, p, p] += 0.5
    return MOIntegrals.from_dense(0.0, h, g, 2)
