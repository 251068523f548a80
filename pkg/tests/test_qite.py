import math

import numpy as np
import pytest
from scipy.linalg import expm

from iaoq.fci import fci
from iaoq.kak import KAKError, kak_compact, zyz_angles
from iaoq.pauli import PauliSum, pair_hamiltonian
from iaoq.qite import QiteConfig, default_basis, qite_run, qite_step
from iaoq.simulator import Circuit, QuantumState, u3_matrix

RNG = np.random.default_rng(2711)


def plus_state():
    v = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
    return QuantumState(1, vec=v)


def toy_pair_hamiltonian(seed=5):
    rng = np.random.default_rng(seed)
    from iaoq.orbitals import MOIntegrals
    n = 2
    h = np.diag([-1.1, -0.2]) + 0.05 * rng.normal() * np.ones((2, 2))
    h = 0.5 * (h + h.T)
    g = rng.normal(size=(n, n, n, n)) * 0.2
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    g /= 8.0
    for p in range(n):
        g[p, p, p, p] += 0.5
    mo = MOIntegrals.from_dense(0.0, h, g, 2)
    return pair_hamiltonian(mo)


class TestStep:
    def test_small_dtau_is_identity_limit(self):
        ham = PauliSum.from_term("Z")
        state = plus_state()
        x, new, _, _ = qite_step(state, ham, 1e-9, default_basis(1))
        assert np.linalg.norm(x) < 1e-7
        assert np.abs(new.vec - state.vec).max() < 1e-8

    def test_ground_state_is_fixed_point(self):
        ham = toy_pair_hamiltonian()
        w, v = np.linalg.eigh(ham.to_matrix())
        ground = QuantumState(2, vec=v[:, 0].astype(complex))
        from iaoq.simulator import expectation
        e0 = expectation(ground, ham)
        _, new, _, _ = qite_step(ground, ham, 0.5, default_basis(2))
        e1 = expectation(new, ham)
        assert abs(e1 - e0) < 1e-9

    def test_one_qubit_matches_exact_imaginary_time(self):
        # H = Z on |+>: exact normalized ITE gives <Z> = -tanh(2 beta)
        ham = PauliSum.from_term("Z")
        state = plus_state()
        dtau = 0.005
        beta = 0.0
        from iaoq.simulator import expectation
        for _ in range(100):
            _, state, _, _ = qite_step(state, ham, dtau, default_basis(1))
            beta += dtau
            want = -math.tanh(2.0 * beta)
            assert abs(expectation(state, ham) - want) < 1e-4


class TestRun:
    def test_beta_zero_row_is_initial_energy(self):
        ham = toy_pair_hamiltonian()
        hf = QuantumState.from_bits(2, 0)
        from iaoq.simulator import expectation
        res = qite_run(ham, hf, QiteConfig(dtau=0.5, beta_total=1.0))
        assert res.betas[0] == 0.0
        assert res.energies[0] == pytest.approx(expectation(hf, ham), abs=1e-12)

    def test_monotone_decrease_and_fci_convergence(self):
        ham = toy_pair_hamiltonian()
        hf = QuantumState.from_bits(2, 0)
        res = qite_run(ham, hf, QiteConfig(dtau=0.5, beta_total=7.0))
        e = res.energies
        assert all(a >= b - 1e-10 for a, b in zip(e, e[1:]))
        e_fci = np.linalg.eigvalsh(ham.to_matrix())[0]
        assert res.final_energy == pytest.approx(e_fci, abs=1e-4)

    def test_trotterized_run_converges_too(self):
        ham = toy_pair_hamiltonian()
        hf = QuantumState.from_bits(2, 0)
        res = qite_run(ham, hf, QiteConfig(dtau=0.1, beta_total=6.0,
                                           trotterize=True))
        e_fci = np.linalg.eigvalsh(ham.to_matrix())[0]
        assert res.final_energy == pytest.approx(e_fci, abs=5e-3)

    def test_csv_roundtrip_shape(self):
        ham = toy_pair_hamiltonian()
        res = qite_run(ham, QuantumState.from_bits(2, 0),
                       QiteConfig(dtau=0.5, beta_total=1.5))
        lines = res.to_csv().strip().splitlines()
        assert lines[0] == "beta,energy,x_norm,residual"
        assert len(lines) == 1 + 4  # header + beta=0 + 3 steps

    def test_sampled_run_tracks_exact(self):
        ham = toy_pair_hamiltonian()
        hf = QuantumState.from_bits(2, 0)
        exact = qite_run(ham, hf, QiteConfig(dtau=0.5, beta_total=3.0))
        sampled = qite_run(ham, hf, QiteConfig(dtau=0.5, beta_total=3.0),
                           shots=60_000, seed=9)
        assert abs(sampled.final_energy - exact.final_energy) < 0.02

    def test_accumulated_unitary_reproduces_state(self):
        ham = toy_pair_hamiltonian()
        hf = QuantumState.from_bits(2, 0)
        res = qite_run(ham, hf, QiteConfig(dtau=0.5, beta_total=7.0))
        direct = res.state.vec
        via_unitary = res.accumulated @ hf.vec
        assert np.abs(direct - via_unitary).max() < 1e-10


class TestKAK:
    def test_u3_is_zyz(self):
        for _ in range(10):
            t, p, l = RNG.uniform(-math.pi, math.pi, 3)
            rz = lambda a: np.array([[np.exp(-0.5j * a), 0],
                                     [0, np.exp(0.5j * a)]])
            ry = lambda a: np.array([[math.cos(a / 2), -math.sin(a / 2)],
                                     [math.sin(a / 2), math.cos(a / 2)]])
            assert np.abs(u3_matrix(t, p, l) - rz(p) @ ry(t) @ rz(l)).max() < 1e-12

    def test_zyz_roundtrip(self):
        for _ in range(20):
            m = _random_su2()
            t, p, l = zyz_angles(m)
            err = 1 - abs(np.trace(m.conj().T @ u3_matrix(t, p, l))) / 2
            assert err < 1e-10

    def test_identity_compacts_exactly(self):
        res = kak_compact(np.eye(4))
        assert res.exact_class and res.cnots == 2
        recon = res.circuit.unitary()
        assert 1 - abs(np.trace(recon)) / 4 < 1e-10

    def test_so4_class_two_cnots(self):
        for _ in range(10):
            u = _random_so4()
            res = kak_compact(u)
            assert res.exact_class
            assert res.circuit.n_cnots() == 2
            err = 1 - abs(np.trace(res.circuit.unitary().conj().T @ u)) / 4
            assert err < 1e-10

    def test_cnot_conjugated_real_rotation(self):
        base = Circuit(2).cnot(0, 1).ry(0, 0.73).cnot(0, 1).unitary()
        res = kak_compact(base)
        assert res.exact_class and res.cnots == 2
        err = 1 - abs(np.trace(res.circuit.unitary().conj().T @ base)) / 4
        assert err < 1e-10

    def test_general_fallback_three_cnots(self):
        for _ in range(6):
            u = _random_su4()
            res = kak_compact(u)
            assert not res.exact_class
            assert res.circuit.n_cnots() == 3
            err = 1 - abs(np.trace(res.circuit.unitary().conj().T @ u)) / 4
            assert err < 1e-9

    def test_qite_unitary_compacts_to_two_cnots(self):
        ham = toy_pair_hamiltonian()
        hf = QuantumState.from_bits(2, 0)
        res = qite_run(ham, hf, QiteConfig(dtau=0.5, beta_total=7.0))
        kak = res.compact_circuit()
        assert kak.exact_class and kak.circuit.n_cnots() == 2
        state = np.asarray(res.state.vec)
        via = res.circuit_state(hf) if hasattr(res, "circuit_state") else None
        recon = kak.circuit.unitary() @ hf.vec
        fid = abs(np.vdot(recon, state)) ** 2
        assert fid > 1 - 1e-9
        _ = via

    def test_cnot_count_constant_in_beta(self):
        # circuit depth must not grow with projection time
        ham = toy_pair_hamiltonian()
        hf = QuantumState.from_bits(2, 0)
        for beta in (1.0, 3.5, 7.0):
            res = qite_run(ham, hf, QiteConfig(dtau=0.5, beta_total=beta))
            kak = res.compact_circuit()
            assert kak.cnots == 2 and kak.exact_class

    def test_rejects_non_unitary(self):
        with pytest.raises(KAKError):
            kak_compact(np.ones((4, 4)))


def _random_su2(rng=RNG):
    a = rng.normal(size=4)
    a /= np.linalg.norm(a)
    return np.array([[a[0] + 1j * a[1], a[2] + 1j * a[3]],
                     [-a[2] + 1j * a[3], a[0] - 1j * a[1]]])


def _random_so4(rng=RNG):
    m = rng.normal(size=(4, 4))
    q, r = np.linalg.qr(m)
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q


def _random_su4(rng=RNG):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, r = np.linalg.qr(m)
    q = q @ np.diag(np.diag(r) / np.abs(np.diag(r)))
    return q / np.linalg.det(q) ** 0.25
