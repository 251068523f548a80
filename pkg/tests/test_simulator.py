import math

import numpy as np
import pytest

from iaoq.pauli import PauliSum
from iaoq.simulator import (CalibrationMatrix, Circuit, CountsHistogram,
                            NoiseModel, QuantumState, build_calibration,
                            expectation, mitigate, purity, qst, run, sample,
                            u3_matrix)

RNG = np.random.default_rng(99)

# magic-basis change used by the SO(4) composite
_E = None


def so4_unitary(params):
    circ = Circuit(2)
    circ.so4(1, 0, params)
    return circ.unitary()


class TestRun:
    def test_empty_circuit_identity(self):
        v = RNG.normal(size=8) + 1j * RNG.normal(size=8)
        v /= np.linalg.norm(v)
        state = QuantumState.from_statevector(v)
        out = run(Circuit(3), state)
        assert np.abs(out.vec - v).max() < 1e-15

    def test_cnot_involution(self):
        v = RNG.normal(size=8) + 1j * RNG.normal(size=8)
        v /= np.linalg.norm(v)
        circ = Circuit(3).cnot(0, 2).cnot(0, 2)
        out = run(circ, QuantumState.from_statevector(v))
        assert np.abs(out.vec - v).max() < 1e-12

    def test_ry_amplitudes(self):
        # R_y(t) = exp(-i t Y / 2) on |0> gives (cos t/2, sin t/2)
        t = 0.7734
        circ = Circuit(1).ry(0, t)
        out = run(circ, QuantumState.zero(1))
        assert abs(out.vec[0] - math.cos(t / 2)) < 1e-12
        assert abs(out.vec[1] - math.sin(t / 2)) < 1e-12

    def test_norm_preserved_on_random_circuit(self):
        circ = Circuit(4)
        for _ in range(30):
            q = int(RNG.integers(4))
            circ.rx(q, RNG.normal())
            circ.ry((q + 1) % 4, RNG.normal())
            circ.cnot(q, (q + 2) % 4)
        out = run(circ, QuantumState.zero(4))
        assert abs(np.linalg.norm(out.vec) - 1.0) < 1e-12

    def test_noisy_path_preserves_trace_and_hermiticity(self):
        circ = Circuit(2).h(0).cnot(0, 1).ry(1, 0.3)
        noise = NoiseModel(gamma=0.05, dephasing=0.03, depol2=0.02)
        out = run(circ, QuantumState.zero(2), noise)
        assert out.rho is not None
        assert abs(np.trace(out.rho).real - 1.0) < 1e-12
        assert np.abs(out.rho - out.rho.conj().T).max() < 1e-12
        assert np.linalg.eigvalsh(out.rho).min() > -1e-10

    def test_noiseless_density_equals_statevector(self):
        circ = Circuit(2).h(0).cnot(0, 1).rz(1, 0.4).ry(0, -0.2)
        sv = run(circ, QuantumState.zero(2))
        dm = run(circ, QuantumState.zero(2).promote())
        assert np.abs(dm.rho - sv.density()).max() < 1e-12


class TestSO4Gate:
    def test_so4_is_real_orthogonal_det_plus_one(self):
        for _ in range(20):
            u = so4_unitary(RNG.uniform(-np.pi, np.pi, size=6))
            assert np.abs(u.imag).max() < 1e-10
            o = u.real
            assert np.abs(o @ o.T - np.eye(4)).max() < 1e-10
            assert abs(np.linalg.det(o) - 1.0) < 1e-10

    def test_so4_parameter_and_cnot_count(self):
        circ = Circuit(2)
        circ.so4(1, 0, np.zeros(6))
        assert circ.n_cnots() == 2
        n_params = sum(len(g.params) for g in circ.gates)
        assert n_params == 6

    def test_u3_is_su2(self):
        for _ in range(10):
            m = u3_matrix(*RNG.uniform(-np.pi, np.pi, size=3))
            assert np.abs(m @ m.conj().T - np.eye(2)).max() < 1e-12
            assert abs(np.linalg.det(m) - 1.0) < 1e-12


class TestExpectation:
    def test_identity_and_z(self):
        state = QuantumState.zero(2)
        assert expectation(state, PauliSum.identity(2)) == pytest.approx(1.0)
        assert expectation(state, PauliSum.from_single(2, 0, "Z")) == pytest.approx(1.0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(Exception):
            expectation(QuantumState.zero(1), PauliSum.from_term("X", 1j))

    def test_density_matches_statevector(self):
        circ = Circuit(3)
        for q in range(3):
            circ.ry(q, RNG.normal())
        circ.cnot(0, 1).cnot(1, 2)
        sv = run(circ, QuantumState.zero(3))
        op = PauliSum(3, {"XIZ": 0.3, "YYI": -0.2, "ZZZ": 1.1, "III": 0.5})
        dm = QuantumState.from_density(sv.density())
        assert expectation(sv, op) == pytest.approx(expectation(dm, op), abs=1e-12)


class TestSampling:
    def test_zero_state_all_zero_counts(self):
        counts = sample(QuantumState.zero(2), None, 500, seed=1)
        assert counts == {"00": 500}

    def test_plus_state_frequencies(self):
        state = run(Circuit(1).h(0), QuantumState.zero(1))
        shots = 100_000
        counts = sample(state, None, shots, seed=2)
        p = counts.get("0", 0) / shots
        sigma = math.sqrt(0.25 / shots)
        assert abs(p - 0.5) < 5 * sigma

    def test_readout_flip_rate(self):
        shots = 100_000
        noise = NoiseModel(p01=0.1, p10=0.0)
        counts = sample(QuantumState.zero(1), None, shots, seed=3, noise=noise)
        p = counts.get("1", 0) / shots
        sigma = math.sqrt(0.1 * 0.9 / shots)
        assert abs(p - 0.1) < 5 * sigma

    def test_deterministic_given_seed(self):
        state = run(Circuit(2).h(0).cnot(0, 1), QuantumState.zero(2))
        a = sample(state, None, 1000, seed=7, noise=NoiseModel(p01=0.05, p10=0.02))
        b = sample(state, None, 1000, seed=7, noise=NoiseModel(p01=0.05, p10=0.02))
        assert a == b

    def test_unbiased_over_seeds(self):
        circ = Circuit(2).ry(0, 0.9).cnot(0, 1)
        state = run(circ, QuantumState.zero(2))
        op = PauliSum.from_term("ZZ")
        exact = expectation(state, op)
        shots, reps = 4000, 40
        vals = []
        for s in range(reps):
            counts = sample(state, None, shots, seed=1000 + s)
            vals.append(counts.z_expectation((0, 1)))
        mean = np.mean(vals)
        sigma = np.std(vals) / math.sqrt(reps)
        assert abs(mean - exact) < 5 * max(sigma, 1e-4)

    def test_counts_json_roundtrip(self):
        counts = CountsHistogram(2, {"01": 3, "10": 5})
        back = CountsHistogram.from_json(counts.to_json())
        assert back == counts and back.n_qubits == 2


class TestCalibrationAndMitigation:
    def test_noiseless_calibration_is_identity(self):
        calib = build_calibration(None, 2, shots=2000, seed=5)
        assert np.abs(calib.matrix - np.eye(4)).max() < 1e-12

    def test_calibration_matches_flip_model(self):
        p = 0.08
        shots = 40_000
        calib = build_calibration(NoiseModel(p01=p, p10=p), 2, shots, seed=6)
        single = np.array([[1 - p, p], [p, 1 - p]])
        want = np.kron(single, single)
        sigma = math.sqrt(0.25 / shots)
        assert np.abs(calib.matrix - want).max() < 5 * sigma * 2
        assert calib.matrix.shape == (4, 4)  # 4 calibration circuits at n=2

    def test_mitigate_identity_noop(self):
        counts = CountsHistogram(1, {"0": 700, "1": 300})
        out = mitigate(counts, CalibrationMatrix(np.eye(2)))
        assert out.vector() == pytest.approx(counts.vector())

    def test_mitigate_recovers_synthetic_truth(self):
        rng = np.random.default_rng(8)
        m = np.eye(4) * 0.9 + 0.1 / 4
        m /= m.sum(axis=0)
        x_true = np.array([500.0, 250.0, 200.0, 50.0])
        c = m @ x_true
        counts = CountsHistogram.from_vector(c, 2)
        out = mitigate(counts, CalibrationMatrix(m))
        assert np.abs(out.vector() - x_true).max() < 1e-6
        _ = rng

    def test_mitigation_restores_z_expectation(self):
        p, shots = 0.06, 200_000
        noise = NoiseModel(p01=p, p10=p)
        counts = sample(QuantumState.zero(1), None, shots, seed=9, noise=noise)
        raw = counts.z_expectation((0,))
        assert raw == pytest.approx(1 - 2 * p, abs=0.01)
        calib = build_calibration(noise, 1, 200_000, seed=10)
        fixed = mitigate(counts, calib).z_expectation((0,))
        assert abs(fixed - 1.0) < abs(raw - 1.0)
        assert fixed > 0.99


class TestTomography:
    def test_exact_reconstruction(self):
        circ = Circuit(2).ry(0, 1.1).cnot(0, 1).rz(1, 0.3)
        state = run(circ, QuantumState.zero(2))
        rho = qst(state, 2)
        assert np.abs(rho - state.density()).max() < 1e-12

    def test_maximally_mixed_single_qubit(self):
        rho_in = QuantumState.from_density(np.eye(2) / 2)
        rho = qst(rho_in, 1)
        assert np.abs(rho - np.eye(2) / 2).max() < 1e-12
        assert purity(rho) == pytest.approx(0.5)

    def test_purity_converges_with_shots(self):
        state = run(Circuit(2).ry(0, 0.8).cnot(0, 1), QuantumState.zero(2))
        gaps = []
        for shots in (200, 2000, 20000, 200000):
            rho = qst(state, 2, shots=shots, seed=11)
            gaps.append(abs(purity(rho) - 1.0))
        assert gaps[-1] < 0.01
        assert gaps[-1] < gaps[0]

    def test_purity_values(self):
        assert purity(np.eye(4) / 4) == pytest.approx(0.25)
        state = run(Circuit(2).ry(1, 0.4), QuantumState.zero(2))
        assert purity(state.density()) == pytest.approx(1.0)

    def test_purity_decreases_with_damping(self):
        circ = Circuit(2).so4(1, 0, [0.3, -0.4, 0.8, 0.1, 0.2, -0.6])
        vals = []
        for gamma in (0.0, 0.02, 0.05, 0.1):
            out = run(circ, QuantumState.zero(2), NoiseModel(gamma=gamma))
            vals.append(purity(out.rho if out.rho is not None else out.density()))
        assert vals[0] == pytest.approx(1.0, abs=1e-10)
        assert all(a > b for a, b in zip(vals, vals[1:]))
