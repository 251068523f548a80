"""Noisy quantum-circuit simulator with exact and shot-sampled readout.

Statevectors carry the noiseless path; any gate noise promotes the state
to a density matrix evolved through Kraus channels applied after each
primitive gate.  Readout error is a separate classical bit-flip model
applied to sampled counts, mitigated through a measured calibration
matrix.  Bitstrings are printed with qubit 0 rightmost.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import kernels
from .pauli import PauliSum
from .rng import make_rng

STATEVECTOR_BUDGET = 14
DENSITY_BUDGET = 6

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_SDG = _S.conj().T


class SimulatorError(ValueError):
    pass


def _bit_parity(values: np.ndarray) -> np.ndarray:
    v = values.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.float64)


def _rx(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """Rz(phi) Rx(-pi/2) Rz(theta) Rx(pi/2) Rz(lam); an SU(2) element."""
    return _rz(phi) @ _rx(-math.pi / 2) @ _rz(theta) @ _rx(math.pi / 2) @ _rz(lam)


_FIXED_1Q = {"h": _H, "s": _S, "sdg": _SDG}
_PARAM_1Q = {"rx": _rx, "ry": _ry, "rz": _rz}


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def matrix(self) -> np.ndarray:
        if self.name in _FIXED_1Q:
            return _FIXED_1Q[self.name]
        if self.name in _PARAM_1Q:
            return _PARAM_1Q[self.name](self.params[0])
        if self.name == "u3":
            return u3_matrix(*self.params)
        raise SimulatorError(f"no dense matrix for gate {self.name!r}")


class Circuit:
    """Ordered gate list over a fixed register.

    The SO(4) entangler is stored as one composite gate and expanded to
    its primitive sequence (2 H, 2 S, 2 Rz(-pi/2), 2 CNOT, 2 u3) at
    execution time, so per-gate noise hits every primitive.
    """

    def __init__(self, n_qubits: int):
        if n_qubits < 1:
            raise SimulatorError("need at least one qubit")
        self.n_qubits = n_qubits
        self.gates: list[Gate] = []

    def _q(self, *qs: int) -> None:
        for q in qs:
            if not 0 <= q < self.n_qubits:
                raise SimulatorError(f"qubit {q} out of range")
        if len(set(qs)) != len(qs):
            raise SimulatorError("duplicate qubit in gate")

    def _angles(self, *ts: float) -> tuple[float, ...]:
        if not all(math.isfinite(t) for t in ts):
            raise SimulatorError("non-finite gate angle")
        return tuple(float(t) for t in ts)

    def add(self, gate: Gate) -> "Circuit":
        self._q(*gate.qubits)
        if gate.params:
            self._angles(*gate.params)
        self.gates.append(gate)
        return self

    def rx(self, q, t): return self.add(Gate("rx", (q,), self._angles(t)))
    def ry(self, q, t): return self.add(Gate("ry", (q,), self._angles(t)))
    def rz(self, q, t): return self.add(Gate("rz", (q,), self._angles(t)))
    def h(self, q): return self.add(Gate("h", (q,)))
    def s(self, q): return self.add(Gate("s", (q,)))
    def u3(self, q, theta, phi, lam):
        return self.add(Gate("u3", (q,), self._angles(theta, phi, lam)))
    def cnot(self, control, target):
        return self.add(Gate("cnot", (control, target)))

    def so4(self, q1, q0, params) -> "Circuit":
        params = self._angles(*params)
        if len(params) != 6:
            raise SimulatorError("SO(4) gate takes 6 angles")
        return self.add(Gate("so4", (q1, q0), params))

    def expand(self) -> list[Gate]:
        out: list[Gate] = []
        for g in self.gates:
            if g.name == "so4":
                out.extend(_so4_primitives(g.qubits, g.params))
            else:
                out.append(g)
        return out

    def n_cnots(self) -> int:
        return sum(1 for g in self.expand() if g.name == "cnot")

    def unitary(self) -> np.ndarray:
        """Dense circuit unitary (small registers only)."""
        if self.n_qubits > 10:
            raise SimulatorError("unitary() capped at 10 qubits")
        dim = 1 << self.n_qubits
        u = np.eye(dim, dtype=complex)
        for k in range(dim):
            u[:, k] = _run_statevector(self, u[:, k].copy())
        return u


def _so4_primitives(qubits: tuple[int, int], params: tuple[float, ...]) -> list[Gate]:
    """Magic-basis conjugation of u3 x u3: a two-qubit SO(4) element.

    M = CNOT(q0->q1) . H(q0) . S(q1) . S(q0) maps the computational basis
    to the magic basis; the composite M^dag (u3 x u3) M is real
    orthogonal with determinant +1.  S^dag is realized as S^3, which is
    exact (phaseless), so the composite reduces to the identity at zero
    angles.
    """
    q1, q0 = qubits
    sdg = lambda q: [Gate("s", (q,)), Gate("s", (q,)), Gate("s", (q,))]
    return [
        Gate("s", (q0,)), Gate("s", (q1,)), Gate("h", (q0,)),
        Gate("cnot", (q0, q1)),
        Gate("u3", (q1,), params[:3]), Gate("u3", (q0,), params[3:]),
        Gate("cnot", (q0, q1)),
        Gate("h", (q0,)), *sdg(q1), *sdg(q0),
    ]


# ----------------------------------------------------------------------
# states
# ----------------------------------------------------------------------

@dataclass
class QuantumState:
    """Statevector or density matrix over n qubits."""

    n_qubits: int
    vec: np.ndarray | None = None
    rho: np.ndarray | None = None

    @classmethod
    def zero(cls, n_qubits: int) -> "QuantumState":
        return cls.from_bits(n_qubits, 0)

    @classmethod
    def from_bits(cls, n_qubits: int, bits: int) -> "QuantumState":
        if n_qubits > STATEVECTOR_BUDGET:
            raise SimulatorError(f"{n_qubits} qubits exceed the statevector budget")
        vec = np.zeros(1 << n_qubits, dtype=complex)
        vec[bits] = 1.0
        return cls(n_qubits, vec=vec)

    @classmethod
    def from_bitstring(cls, bitstring: str) -> "QuantumState":
        """Bit pattern with qubit 0 rightmost."""
        return cls.from_bits(len(bitstring), int(bitstring, 2))

    @classmethod
    def from_statevector(cls, vec: np.ndarray) -> "QuantumState":
        vec = np.asarray(vec, dtype=complex)
        n = int(round(math.log2(vec.size)))
        if 1 << n != vec.size:
            raise SimulatorError("statevector length is not a power of two")
        nrm = np.linalg.norm(vec)
        if abs(nrm - 1.0) > 1e-10:
            raise SimulatorError("statevector is not normalized")
        return cls(n, vec=vec.copy())

    @classmethod
    def from_density(cls, rho: np.ndarray) -> "QuantumState":
        rho = np.asarray(rho, dtype=complex)
        n = int(round(math.log2(rho.shape[0])))
        if rho.shape != (1 << n, 1 << n):
            raise SimulatorError("density matrix has wrong shape")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise SimulatorError("density matrix trace is not 1")
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise SimulatorError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise SimulatorError("density matrix is not positive semidefinite")
        return cls(n, rho=rho.copy())

    def copy(self) -> "QuantumState":
        return QuantumState(self.n_qubits,
                            None if self.vec is None else self.vec.copy(),
                            None if self.rho is None else self.rho.copy())

    def density(self) -> np.ndarray:
        if self.rho is not None:
            return self.rho
        return np.outer(self.vec, self.vec.conj())

    def probabilities(self) -> np.ndarray:
        if self.vec is not None:
            return np.abs(self.vec) ** 2
        return np.real(np.diag(self.rho)).clip(min=0.0)

    def promote(self) -> "QuantumState":
        """Statevector -> density matrix (needed for noisy evolution)."""
        if self.rho is not None:
            return self
        if self.n_qubits > DENSITY_BUDGET:
            raise SimulatorError(
                f"{self.n_qubits} qubits exceed the density-matrix budget")
        return QuantumState(self.n_qubits, rho=self.density())


# ----------------------------------------------------------------------
# noise
# ----------------------------------------------------------------------

@dataclass
class NoiseModel:
    """Per-gate decoherence plus classical readout flips.

    ``p01`` is P(read 1 | true 0), ``p10`` is P(read 0 | true 1); both
    may be scalars or per-qubit arrays.  ``gamma`` (amplitude damping)
    and ``dephasing`` act on every qubit a gate touches; ``depol2`` is a
    two-qubit depolarizing channel after each CNOT.
    """

    p01: float | np.ndarray = 0.0
    p10: float | np.ndarray = 0.0
    gamma: float = 0.0
    dephasing: float = 0.0
    depol2: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "dephasing", "depol2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise SimulatorError(f"{name} must be in [0, 1]")
        for name in ("p01", "p10"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if ((v < 0) | (v > 1)).any():
                raise SimulatorError(f"{name} must be in [0, 1]")

    def readout(self, q: int) -> tuple[float, float]:
        p01 = np.atleast_1d(np.asarray(self.p01, dtype=float))
        p10 = np.atleast_1d(np.asarray(self.p10, dtype=float))
        return (float(p01[q % p01.size]), float(p10[q % p10.size]))

    @property
    def has_gate_noise(self) -> bool:
        return self.gamma > 0 or self.dephasing > 0 or self.depol2 > 0

    @property
    def has_readout_noise(self) -> bool:
        return bool(np.any(np.asarray(self.p01) > 0) or np.any(np.asarray(self.p10) > 0))


def _embed_1q(m: np.ndarray, q: int, n: int) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for k in range(n - 1, -1, -1):
        out = np.kron(out, m if k == q else np.eye(2))
    return out


def _kraus_amplitude_damping(gamma: float) -> list[np.ndarray]:
    return [np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex),
            np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)]


def _kraus_dephasing(lam: float) -> list[np.ndarray]:
    return [math.sqrt(1 - lam) * np.eye(2, dtype=complex),
            math.sqrt(lam) * np.array([[1, 0], [0, -1]], dtype=complex)]


def _apply_kraus_1q(rho: np.ndarray, ks: list[np.ndarray], q: int, n: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for k in ks:
        kb = _embed_1q(k, q, n)
        out += kb @ rho @ kb.conj().T
    return out


def _apply_depol2(rho: np.ndarray, p: float, qa: int, qb: int, n: int) -> np.ndarray:
    """With probability p replace the pair subsystem by I/4."""
    dim = rho.shape[0]
    idx = np.arange(dim)
    pair = ((idx >> qa) & 1) | (((idx >> qb) & 1) << 1)
    rest = idx & ~((1 << qa) | (1 << qb)) & (dim - 1)
    blocks = []
    for b in range(4):
        sel = np.where(pair == b)[0]
        blocks.append(sel[np.argsort(rest[sel])])
    # rho_rest = tr_pair(rho); mixed = (I/4 on the pair) (x) rho_rest
    acc = sum(rho[np.ix_(sel, sel)] for sel in blocks)
    mixed = np.zeros_like(rho)
    for sel in blocks:
        mixed[np.ix_(sel, sel)] = 0.25 * acc
    return (1.0 - p) * rho + p * mixed


# ----------------------------------------------------------------------
# execution
# ----------------------------------------------------------------------

def _run_statevector(circuit: Circuit, vec: np.ndarray) -> np.ndarray:
    n = circuit.n_qubits
    for g in circuit.expand():
        if g.name == "cnot":
            vec = kernels.apply_cnot(vec, g.qubits[0], g.qubits[1], n)
        else:
            vec = kernels.apply_1q(vec, g.matrix(), g.qubits[0], n)
    return vec


def run(circuit: Circuit, initial: QuantumState,
        noise: NoiseModel | None = None) -> QuantumState:
    """Execute a circuit; gate noise promotes to the density-matrix path."""
    if initial.n_qubits != circuit.n_qubits:
        raise SimulatorError("state/circuit qubit-count mismatch")
    gate_noise = noise is not None and noise.has_gate_noise
    if not gate_noise and initial.vec is not None:
        out = _run_statevector(circuit, initial.vec.copy())
        nrm = np.linalg.norm(out)
        assert abs(nrm - 1.0) < 1e-12, "unitary path lost normalization"
        return QuantumState(circuit.n_qubits, vec=out)

    state = initial.promote()
    n, rho = circuit.n_qubits, state.rho.copy()
    for g in circuit.expand():
        if g.name == "cnot":
            u = np.eye(1 << n, dtype=complex)
            for k in range(1 << n):
                col = np.zeros(1 << n, dtype=complex)
                col[k] = 1.0
                u[:, k] = kernels.apply_cnot(col, g.qubits[0], g.qubits[1], n)
        else:
            u = _embed_1q(g.matrix(), g.qubits[0], n)
        rho = u @ rho @ u.conj().T
        if gate_noise:
            for q in g.qubits:
                if noise.gamma > 0:
                    rho = _apply_kraus_1q(rho, _kraus_amplitude_damping(noise.gamma), q, n)
                if noise.dephasing > 0:
                    rho = _apply_kraus_1q(rho, _kraus_dephasing(noise.dephasing), q, n)
            if g.name == "cnot" and noise.depol2 > 0:
                rho = _apply_depol2(rho, noise.depol2, g.qubits[0], g.qubits[1], n)
    tr = np.trace(rho).real
    assert abs(tr - 1.0) < 1e-12, "channel path lost trace"
    rho = 0.5 * (rho + rho.conj().T)
    return QuantumState(n, rho=rho)


def expectation(state: QuantumState, op: PauliSum) -> float:
    """Exact <op>; op must be Hermitian within 1e-10."""
    if not op.is_hermitian(1e-10):
        raise SimulatorError("expectation requires a Hermitian operator")
    if op.n_qubits != state.n_qubits:
        raise SimulatorError("operator/state qubit-count mismatch")
    val = 0.0 + 0.0j
    if state.vec is not None:
        for label, coeff in op.terms.items():
            xm, zm, ny = kernels.pauli_masks(label)
            val += coeff * kernels.pauli_expect(state.vec, xm, zm, ny)
    else:
        dim = state.rho.shape[0]
        idx = np.arange(dim, dtype=np.uint64)
        for label, coeff in op.terms.items():
            xm, zm, ny = kernels.pauli_masks(label)
            # Tr(rho P) = sum_i rho[i, i ^ xm] * phase_i
            signs = 1.0 - 2.0 * _bit_parity(idx & np.uint64(zm))
            phases = (1j ** (ny % 4)) * signs
            cols = np.bitwise_xor(idx, np.uint64(xm)).astype(np.int64)
            val += coeff * np.sum(state.rho[np.arange(dim), cols] * phases)
    assert abs(val.imag) < 1e-10, "expectation of Hermitian operator drifted complex"
    return float(val.real)


# ----------------------------------------------------------------------
# sampling, calibration, mitigation
# ----------------------------------------------------------------------

class CountsHistogram(dict):
    """{bitstring: count} with qubit 0 rightmost."""

    def __init__(self, n_qubits: int, counts: dict[str, int] | None = None):
        super().__init__(counts or {})
        self.n_qubits = n_qubits

    @property
    def shots(self) -> int:
        return sum(self.values())

    def vector(self) -> np.ndarray:
        out = np.zeros(1 << self.n_qubits)
        for bits, c in self.items():
            out[int(bits, 2)] = c
        return out

    @classmethod
    def from_vector(cls, v: np.ndarray, n_qubits: int) -> "CountsHistogram":
        return cls(n_qubits, {format(i, f"0{n_qubits}b"): int(c)
                              for i, c in enumerate(v) if c})

    def frequencies(self) -> np.ndarray:
        return self.vector() / max(self.shots, 1)

    def z_expectation(self, qubits: tuple[int, ...]) -> float:
        """< prod_q Z_q > estimated from the counts."""
        mask = 0
        for q in qubits:
            mask |= 1 << q
        total, acc = 0, 0
        for bits, c in self.items():
            par = bin(int(bits, 2) & mask).count("1") & 1
            acc += -c if par else c
            total += c
        return acc / total

    def to_json(self) -> str:
        return json.dumps({"n_qubits": self.n_qubits, "counts": dict(self)},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CountsHistogram":
        data = json.loads(text)
        return cls(int(data["n_qubits"]), {k: int(v) for k, v in data["counts"].items()})


def sample(state: QuantumState, basis_rotations: Circuit | None,
           shots: int, seed: int, noise: NoiseModel | None = None,
           stream: tuple[int, ...] = ()) -> CountsHistogram:
    """Z-basis counts after an ideal basis rotation, then readout flips."""
    if shots < 1:
        raise SimulatorError("shots must be >= 1")
    if basis_rotations is not None:
        state = run(basis_rotations, state)
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = make_rng(seed, *stream)
    counts = rng.multinomial(shots, probs).astype(np.int64)
    if noise is not None and noise.has_readout_noise:
        n = state.n_qubits
        for q in range(n):
            p01, p10 = noise.readout(q)
            if p01 == 0 and p10 == 0:
                continue
            new = np.zeros_like(counts)
            for i, c in enumerate(counts):
                if c == 0:
                    continue
                p = p10 if (i >> q) & 1 else p01
                flipped = rng.binomial(int(c), p)
                new[i] += c - flipped
                new[i ^ (1 << q)] += flipped
            counts = new
    return CountsHistogram.from_vector(counts, state.n_qubits)


@dataclass
class CalibrationMatrix:
    """Column-stochastic M with M[i, j] = P(measure i | prepared j)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if (m < 0).any():
            raise SimulatorError("calibration entries must be nonnegative")
        if np.abs(m.sum(axis=0) - 1.0).max() > 1e-12:
            raise SimulatorError("calibration columns must sum to 1")
        self.matrix = m

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))


def build_calibration(noise: NoiseModel | None, n_qubits: int,
                      shots: int, seed: int) -> CalibrationMatrix:
    """Estimate M by preparing all 2^N basis states under the readout model."""
    if n_qubits > 4:
        raise SimulatorError("calibration capped at 4 qubits (cost doubles per qubit)")
    dim = 1 << n_qubits
    m = np.zeros((dim, dim))
    for j in range(dim):
        counts = sample(QuantumState.from_bits(n_qubits, j), None, shots,
                        seed, noise, stream=(0x0CA1, j))
        m[:, j] = counts.vector() / shots
    return CalibrationMatrix(m)


def mitigate(counts: CountsHistogram, calib: CalibrationMatrix) -> CountsHistogram:
    """Least-squares inverse of the calibration map, clamped nonnegative."""
    m = calib.matrix
    if m.shape[0] != 1 << counts.n_qubits:
        raise SimulatorError("calibration/counts dimension mismatch")
    if np.linalg.cond(m) > 1e12:
        raise SimulatorError("calibration matrix is singular")
    c = counts.vector()
    x, _ = nnls(m, c)
    total = x.sum()
    if total <= 0:
        raise SimulatorError("mitigation produced an empty distribution")
    x = x * (counts.shots / total)
    return CountsHistogram(counts.n_qubits,
                           {format(i, f"0{counts.n_qubits}b"): float(v)
                            for i, v in enumerate(x) if v > 1e-12})


# ----------------------------------------------------------------------
# tomography
# ----------------------------------------------------------------------

def _basis_rotation_circuit(label: str, n: int) -> Circuit:
    circ = Circuit(n)
    for q, c in enumerate(label):
        if c == "X":
            circ.h(q)
        elif c == "Y":
            circ.rx(q, math.pi / 2)
    return circ


def pauli_from_counts(counts: CountsHistogram, label: str) -> float:
    support = tuple(q for q, c in enumerate(label) if c != "I")
    if not support:
        return 1.0
    return counts.z_expectation(support)


def qst(state, n_qubits: int, shots: int | None = None, seed: int | None = None,
        noise: NoiseModel | None = None) -> np.ndarray:
    """Pauli-basis density-matrix reconstruction.

    ``state`` is a QuantumState or a zero-argument provider re-preparing
    it.  With shots=None the expectations are exact (infinite-shot
    limit).  The output is Hermitian by construction and deliberately
    not projected onto the PSD cone.
    """
    if n_qubits > 3:
        raise SimulatorError("tomography capped at 3 qubits")
    from itertools import product as iproduct

    from .pauli import _MATS
    dim = 1 << n_qubits
    rho = np.zeros((dim, dim), dtype=complex)
    for k, letters in enumerate(iproduct("IXYZ", repeat=n_qubits)):
        label = "".join(letters)
        st = state() if callable(state) else state
        if shots is None:
            ev = expectation(st, PauliSum.from_term(label)) if label.strip("I") \
                else 1.0
        else:
            counts = sample(st, _basis_rotation_circuit(label, n_qubits),
                            shots, seed, noise, stream=(0x4057, k))
            ev = pauli_from_counts(counts, label)
        mat = np.array([[1.0]], dtype=complex)
        for q in range(n_qubits - 1, -1, -1):
            mat = np.kron(mat, _MATS[label[q]])
        rho += (ev / dim) * mat
    return rho


def purity(rho: np.ndarray) -> float:
    """Tr(rho^2)."""
    return float(np.trace(rho @ rho).real)


class PauliEvaluator:
    """Cached single-string expectations over a fixed state.

    Exact when ``shots`` is None; otherwise each measurement setting is
    sampled once (optionally readout-mitigated) and reused for every
    string it covers, which is how hardware runs group Paulis.
    """

    def __init__(self, state: QuantumState, shots: int | None = None,
                 seed: int | None = None, noise: NoiseModel | None = None,
                 calibration: CalibrationMatrix | None = None,
                 stream: tuple[int, ...] = ()):
        if shots is not None and seed is None:
            raise SimulatorError("seed is mandatory when sampling")
        self.state = state
        self.shots = shots
        self.seed = seed
        self.noise = noise
        self.calibration = calibration
        self.stream = stream
        self._values: dict[str, float] = {}
        self._counts: dict[str, CountsHistogram] = {}

    def __call__(self, label: str) -> float:
        if set(label) == {"I"}:
            return 1.0
        if label not in self._values:
            if self.shots is None:
                from .pauli import PauliSum
                self._values[label] = expectation(
                    self.state, PauliSum.from_term(label))
            else:
                self._values[label] = self._sampled(label)
        return self._values[label]

    def evaluate_sum(self, op) -> complex:
        """Sum of coeff * <P> over the operator's strings."""
        return sum(c * self(l) for l, c in op.terms.items())

    def _sampled(self, label: str) -> float:
        setting = "".join(c if c != "I" else "Z" for c in label)
        if setting not in self._counts:
            circ = Circuit(self.state.n_qubits)
            for q, c in enumerate(setting):
                if c == "X":
                    circ.h(q)
                elif c == "Y":
                    circ.rx(q, math.pi / 2)
            code = 0
            for c in setting:           # stable per-setting stream id
                code = 4 * code + "IXYZ".index(c)
            counts = sample(self.state, circ, self.shots, self.seed,
                            self.noise, stream=self.stream + (code,))
            if self.calibration is not None:
                counts = mitigate(counts, self.calibration)
            self._counts[setting] = counts
        support = tuple(q for q, c in enumerate(label) if c != "I")
        return self._counts[setting].z_expectation(support)
