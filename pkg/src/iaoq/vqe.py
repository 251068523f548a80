"""Variational ground-state search.

Three circuit families: the hardware-efficient Ry ladder, the SO(4)
entangler network, and the single-Trotter-step qubit UCCSD.  Gradients
use the parameter-shift rule (every parameter sits in a single-qubit
rotation; UCCSD amplitudes fan out over several Pauli rotations and the
chain rule sums the shifted pairs).  Optimizers: gradient descent with a
deterministic grid + golden-section line search, and a quasi-Newton
minimizer (scipy L-BFGS-B) for the exact-simulation path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .pauli import PauliSum, jw_annihilation, jw_creation
from .rng import make_rng
from .simulator import (Circuit, CountsHistogram, NoiseModel, QuantumState,
                        expectation, mitigate, run, sample)


class VQEError(ValueError):
    pass


@dataclass(frozen=True)
class AnsatzSpec:
    """Ansatz family, register size, and reference occupancy pattern."""

    kind: str                   # 'ry' | 'so4' | 'quccsd'
    n_qubits: int
    reference: int = 0          # occupancy bit pattern of the reference state
    depth: int = 1
    pairs: tuple[tuple[int, int], ...] | None = None     # SO(4) edge set
    occupied: tuple[int, ...] = ()                       # quccsd, spatial
    virtual: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("ry", "so4", "quccsd"):
            raise VQEError(f"unknown ansatz kind {self.kind!r}")
        if self.kind in ("ry", "so4") and self.depth < 1:
            raise VQEError("depth must be >= 1")
        if self.kind == "quccsd":
            if set(self.occupied) & set(self.virtual):
                raise VQEError("occupied/virtual excitation lists must be disjoint")
            if self.n_qubits != 2 * (len(self.occupied) + len(self.virtual)):
                raise VQEError("quccsd register must hold 2 spin orbitals per "
                               "spatial orbital")

    @property
    def edge_set(self) -> tuple[tuple[int, int], ...]:
        if self.pairs is not None:
            return self.pairs
        return tuple((i, i + 1) for i in range(self.n_qubits - 1))

    def n_parameters(self) -> int:
        if self.kind == "ry":
            return self.n_qubits * (self.depth + 1)
        if self.kind == "so4":
            return 6 * len(self.edge_set) * self.depth
        return len(_uccsd_excitations(self)[0]) + len(_uccsd_excitations(self)[1])

    def reference_state(self) -> QuantumState:
        return QuantumState.from_bits(self.n_qubits, self.reference)


def hf_reference_mask(n_orb: int, n_occ: int) -> int:
    """JW occupancy pattern of the closed-shell determinant."""
    mask = 0
    for p in range(n_occ):
        mask |= (1 << p) | (1 << (n_orb + p))
    return mask


# ----------------------------------------------------------------------
# circuit construction
# ----------------------------------------------------------------------

@dataclass
class Binding:
    """One circuit angle bound to an ansatz parameter: angle = coeff * theta."""

    gate_index: int
    slot: int
    param_index: int
    coeff: float = 1.0


@dataclass
class BoundCircuit:
    circuit: Circuit
    bindings: list[Binding] = field(default_factory=list)


def _uccsd_excitations(spec: AnsatzSpec):
    """Spin-orbital singles and doubles, Sz-conserving, fixed order."""
    n_orb = (len(spec.occupied) + len(spec.virtual))
    so = {("up", p): p for p in range(n_orb)}
    so.update({("down", p): n_orb + p for p in range(n_orb)})
    occ_so = [(s, p) for s in ("up", "down") for p in spec.occupied]
    vir_so = [(s, p) for s in ("up", "down") for p in spec.virtual]
    singles = [(a, i) for i in occ_so for a in vir_so if a[0] == i[0]]
    doubles = []
    for ii, i in enumerate(occ_so):
        for j in occ_so[ii + 1:]:
            for ai, a in enumerate(vir_so):
                for b in vir_so[ai + 1:]:
                    if {a[0], b[0]} == {i[0], j[0]}:
                        doubles.append((a, b, j, i))
    singles.sort()
    doubles.sort()
    return singles, doubles


def _excitation_rotations(spec: AnsatzSpec):
    """Per parameter: list of (pauli label, coefficient) with
    T - T^dag = -i * sum_m c_m P_m (real c_m, mutually commuting strings)."""
    n_orb = len(spec.occupied) + len(spec.virtual)
    singles, doubles = _uccsd_excitations(spec)
    plans = []
    for (a, i) in singles:
        t = jw_creation(a[1], a[0], n_orb) * jw_annihilation(i[1], i[0], n_orb)
        plans.append(_anti_hermitian_strings(t))
    for (a, b, j, i) in doubles:
        t = (jw_creation(a[1], a[0], n_orb) * jw_creation(b[1], b[0], n_orb)
             * jw_annihilation(j[1], j[0], n_orb) * jw_annihilation(i[1], i[0], n_orb))
        plans.append(_anti_hermitian_strings(t))
    return plans


def _anti_hermitian_strings(t: PauliSum) -> list[tuple[str, float]]:
    g = (t - t.adjoint()).simplify(1e-14)
    out = []
    for label, coeff in sorted(g.terms.items()):
        if abs(coeff.real) > 1e-14:
            raise VQEError("excitation generator is not anti-Hermitian")
        out.append((label, float(coeff.imag)))   # g = i * sum c P -> exp(theta g)
    return out


def _append_pauli_rotation(circ: Circuit, label: str, angle_slot_cb) -> None:
    """exp(-i angle/2 * P) as basis changes, a CNOT ladder and one Rz."""
    support = [q for q, c in enumerate(label) if c != "I"]
    for q in support:
        if label[q] == "X":
            circ.h(q)
        elif label[q] == "Y":
            circ.rx(q, math.pi / 2)
    for a, b in zip(support, support[1:]):
        circ.cnot(a, b)
    angle_slot_cb(circ)            # appends the Rz on support[-1]
    for a, b in reversed(list(zip(support, support[1:]))):
        circ.cnot(a, b)
    for q in support:
        if label[q] == "X":
            circ.h(q)
        elif label[q] == "Y":
            circ.rx(q, -math.pi / 2)


def build_circuit(spec: AnsatzSpec, theta: np.ndarray) -> BoundCircuit:
    """Ansatz circuit for the given parameter vector.

    The returned bindings map every parametrized gate angle back to its
    parameter (used by the parameter-shift rule).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_parameters(),):
        raise VQEError(f"expected {spec.n_parameters()} parameters, "
                       f"got {theta.shape}")
    circ = Circuit(spec.n_qubits)
    bindings: list[Binding] = []
    n = spec.n_qubits

    if spec.kind == "ry":
        k = 0
        for _layer in range(spec.depth):
            for q in range(n):
                bindings.append(Binding(len(circ.gates), 0, k))
                circ.ry(q, theta[k])
                k += 1
            for q in range(n - 1):
                circ.cnot(q, q + 1)
        for q in range(n):
            bindings.append(Binding(len(circ.gates), 0, k))
            circ.ry(q, theta[k])
            k += 1

    elif spec.kind == "so4":
        k = 0
        for _layer in range(spec.depth):
            for (i, j) in spec.edge_set:
                for slot in range(6):
                    bindings.append(Binding(len(circ.gates), slot, k + slot))
                circ.so4(j, i, theta[k:k + 6])
                k += 6

    else:  # quccsd: one first-order Trotter step, singles then doubles
        plans = _excitation_rotations(spec)
        for k, plan in enumerate(plans):
            for label, c in plan:
                # exp(theta (T - T^dag)) = prod_m exp(+i theta c_m P_m),
                # and the sandwich realizes exp(-i phi/2 P): phi = -2 c theta
                angle = -2.0 * c * theta[k]

                def put(circ_, a=angle, lbl=label, kk=k, cc=c):
                    q_last = max(q for q, ch in enumerate(lbl) if ch != "I")
                    bindings.append(Binding(len(circ_.gates), 0, kk, -2.0 * cc))
                    circ_.rz(q_last, a)

                _append_pauli_rotation(circ, label, put)

    return BoundCircuit(circ, bindings)


def _shifted_circuit(spec: AnsatzSpec, theta: np.ndarray,
                     binding: Binding, delta: float) -> Circuit:
    bound = build_circuit(spec, theta)
    g = bound.circuit.gates[binding.gate_index]
    params = list(g.params)
    params[binding.slot] += delta
    from .simulator import Gate
    bound.circuit.gates[binding.gate_index] = Gate(g.name, g.qubits, tuple(params))
    return bound.circuit


# ----------------------------------------------------------------------
# energy evaluation
# ----------------------------------------------------------------------

def _measurement_groups(op: PauliSum) -> list[tuple[str, list[tuple[str, float]]]]:
    """Qubit-wise-commuting grouping: one basis assignment per group."""
    groups: list[tuple[list[str], list[tuple[str, float]]]] = []
    ident = 0.0
    for label, coeff in sorted(op.terms.items()):
        c = complex(coeff)
        if abs(c.imag) > 1e-10:
            raise VQEError("sampled estimation needs a Hermitian operator")
        if set(label) == {"I"}:
            ident += c.real
            continue
        for basis, members in groups:
            ok = True
            for q, ch in enumerate(label):
                if ch != "I" and basis[q] != "I" and basis[q] != ch:
                    ok = False
                    break
            if ok:
                for q, ch in enumerate(label):
                    if ch != "I":
                        basis[q] = ch
                members.append((label, c.real))
                break
        else:
            basis = list(label)
            groups.append((basis, [(label, c.real)]))
    out = [("".join(basis), members) for basis, members in groups]
    if ident:
        out.append(("I" * op.n_qubits, [("I" * op.n_qubits, ident)]))
    return out


def _basis_rotation(basis: str, n: int) -> Circuit:
    circ = Circuit(n)
    for q, ch in enumerate(basis):
        if ch == "X":
            circ.h(q)
        elif ch == "Y":
            circ.rx(q, math.pi / 2)
    return circ


def sampled_expectation(state: QuantumState, op: PauliSum, shots: int,
                        seed: int, noise: NoiseModel | None = None,
                        calibration=None, stream: tuple[int, ...] = ()) -> float:
    """Grouped-Pauli shot estimate of <op>, optionally readout-mitigated."""
    total = 0.0
    for gi, (basis, members) in enumerate(_measurement_groups(op)):
        if set(basis) == {"I"}:
            total += sum(c for _, c in members)
            continue
        counts = sample(state, _basis_rotation(basis, op.n_qubits), shots,
                        seed, noise, stream=stream + (gi,))
        if calibration is not None:
            counts = mitigate(counts, calibration)
        for label, c in members:
            support = tuple(q for q, ch in enumerate(label) if ch != "I")
            total += c * counts.z_expectation(support)
    return total


def energy(spec: AnsatzSpec, theta: np.ndarray, hamiltonian: PauliSum,
           shots: int | None = None, noise: NoiseModel | None = None,
           seed: int | None = None, calibration=None,
           stream: tuple[int, ...] = ()) -> float:
    """E(theta); exact expectation when shots is None, sampled otherwise."""
    circ = build_circuit(spec, theta).circuit
    state = run(circ, spec.reference_state(), noise)
    if shots is None:
        return expectation(state, hamiltonian)
    if seed is None:
        raise VQEError("seed is mandatory when sampling")
    return sampled_expectation(state, hamiltonian, shots, seed, noise,
                               calibration, stream)


def parameter_shift_gradient(spec: AnsatzSpec, theta: np.ndarray,
                             hamiltonian: PauliSum, shots: int | None = None,
                             noise: NoiseModel | None = None,
                             seed: int | None = None,
                             stream: tuple[int, ...] = ()) -> np.ndarray:
    """dE/dtheta via shifted-angle pairs.

    With R(a) = exp(-i a sigma / 2) the exact rule per gate angle is
    dE/da = [E(a + pi/2) - E(a - pi/2)] / 2; amplitudes that fan out over
    several rotations accumulate coeff-weighted contributions.
    """
    theta = np.asarray(theta, dtype=float)
    bound = build_circuit(spec, theta)
    grad = np.zeros(spec.n_parameters())
    ref = spec.reference_state()
    for bi, binding in enumerate(bound.bindings):
        vals = []
        for si, delta in enumerate((math.pi / 2, -math.pi / 2)):
            circ = _shifted_circuit(spec, theta, binding, delta)
            state = run(circ, ref, noise)
            if shots is None:
                vals.append(expectation(state, hamiltonian))
            else:
                vals.append(sampled_expectation(
                    state, hamiltonian, shots, seed, noise,
                    stream=stream + (bi, si)))
        grad[binding.param_index] += binding.coeff * 0.5 * (vals[0] - vals[1])
    return grad


def gradient_cost(spec: AnsatzSpec) -> int:
    """Energy evaluations per gradient (two per bound rotation angle)."""
    theta = np.zeros(spec.n_parameters())
    return 2 * len(build_circuit(spec, theta).bindings)


# ----------------------------------------------------------------------
# optimizers
# ----------------------------------------------------------------------

@dataclass
class VQEResult:
    energy: float
    parameters: np.ndarray
    trace: list[tuple[float, float]]          # (energy, gradient norm)
    converged: bool
    spec: AnsatzSpec

    def final_state(self, noise: NoiseModel | None = None) -> QuantumState:
        circ = build_circuit(self.spec, self.parameters).circuit
        return run(circ, self.spec.reference_state(), noise)

    def to_json(self) -> str:
        return json.dumps({
            "energy": self.energy,
            "parameters": list(map(float, self.parameters)),
            "trace": [[float(e), float(g)] for e, g in self.trace],
            "converged": self.converged,
        }, sort_keys=True)


def _golden_section(f, lo: float, hi: float, tol: float = 1e-4) -> float:
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def gradient_descent(spec: AnsatzSpec, hamiltonian: PauliSum,
                     theta0: np.ndarray | None = None,
                     grid: tuple[float, float, int] = (0.0, 2.0, 21),
                     max_iter: int = 200, tol: float = 1e-9,
                     shots: int | None = None, noise: NoiseModel | None = None,
                     seed: int | None = None, calibration=None) -> VQEResult:
    """Steepest descent with a deterministic grid + golden-section search.

    theta defaults to zero; each iteration moves along -gradient with the
    step chosen by minimizing the line energy over ``grid`` followed by a
    golden-section refinement around the best grid point.
    """
    n = spec.n_parameters()
    theta = np.zeros(n) if theta0 is None else np.asarray(theta0, float).copy()
    trace: list[tuple[float, float]] = []
    converged = False

    def e_at(t, it, tag):
        return energy(spec, t, hamiltonian, shots, noise, seed, calibration,
                      stream=(it, tag))

    e_prev = e_at(theta, 0, 0)
    for it in range(1, max_iter + 1):
        g = parameter_shift_gradient(spec, theta, hamiltonian, shots, noise,
                                     seed, stream=(it,))
        gnorm = float(np.linalg.norm(g))
        trace.append((e_prev, gnorm))
        if gnorm < 1e-12:
            converged = True
            break
        lo, hi, npts = grid
        lams = np.linspace(lo, hi, npts)
        vals = [e_at(theta - lam * g, it, 1000 + k) for k, lam in enumerate(lams)]
        best = int(np.argmin(vals))
        a = lams[max(best - 1, 0)]
        b = lams[min(best + 1, npts - 1)]
        lam_gs = _golden_section(lambda l: e_at(theta - l * g, it, 999), a, b)
        e_gs = e_at(theta - lam_gs * g, it, 2)
        lam, e_new = ((lam_gs, e_gs) if e_gs < vals[best]
                      else (float(lams[best]), vals[best]))
        if e_new >= e_prev:          # no descent along the grid: stationary
            converged = True
            break
        theta = theta - lam * g
        delta, e_prev = e_prev - e_new, e_new
        if delta < tol:
            converged = True
            break
    trace.append((e_prev, float("nan")))
    return VQEResult(float(e_prev), theta, trace, converged, spec)


def minimize_exact(spec: AnsatzSpec, hamiltonian: PauliSum,
                   theta0: np.ndarray | None = None,
                   gtol: float = 1e-9) -> VQEResult:
    """Quasi-Newton (L-BFGS-B) minimization on the exact-expectation path."""
    n = spec.n_parameters()
    theta0 = np.zeros(n) if theta0 is None else np.asarray(theta0, float)
    trace: list[tuple[float, float]] = []

    def fun(t):
        return energy(spec, t, hamiltonian)

    def jac(t):
        g = parameter_shift_gradient(spec, t, hamiltonian)
        trace.append((fun(t), float(np.linalg.norm(g))))
        return g

    res = minimize(fun, theta0, jac=jac, method="L-BFGS-B",
                   options={"gtol": gtol, "ftol": 1e-14, "maxiter": 500})
    return VQEResult(float(res.fun), res.x, trace, bool(res.success), spec)
