"""Quantum imaginary-time evolution.

Each step approximates normalized imaginary-time evolution under a
Hamiltonian term by a unitary exp(i sum_mu x_mu P_mu) whose coefficients
solve a measured linear system: with S_{mu nu} = <P_mu P_nu> and
c = 1 - 2 dtau <h> the post-step norm,

    2 Re(S) x = -b,    b_mu = (2 dtau / sqrt(c)) Im <P_mu h> ,

Tikhonov-regularized because the expansion basis is overcomplete.  For
two-qubit Hamiltonians the whole operator is evolved in a single step
(no Trotter split) and the accumulated 4x4 unitary can be recompiled to
a constant-depth circuit with 2 CNOTs through the KAK route.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np
from scipy.linalg import expm

from .kak import KAKResult, kak_compact
from .pauli import PauliSum, _mul_labels
from .simulator import NoiseModel, PauliEvaluator, QuantumState, expectation

__all__ = ["QiteConfig", "QiteResult", "qite_step", "qite_run",
           "kak_compact", "KAKResult", "default_basis"]


class QiteError(ValueError):
    pass


def default_basis(n_qubits: int) -> list[str]:
    """All non-identity Pauli strings (exact closure for small registers)."""
    if n_qubits > 3:
        raise QiteError("default expansion basis is exponential; pass one")
    labels = ["".join(p) for p in iproduct("IXYZ", repeat=n_qubits)]
    return [l for l in labels if set(l) != {"I"}]


@dataclass
class QiteConfig:
    dtau: float = 0.5
    beta_total: float = 7.0
    basis: list[str] | None = None
    trotterize: bool = False
    regularization: float = 1e-8
    residual_threshold: float = 1e-6

    def __post_init__(self):
        if self.dtau <= 0:
            raise QiteError("dtau must be positive")
        if self.beta_total < self.dtau:
            raise QiteError("beta_total must cover at least one step")


@dataclass
class QiteResult:
    betas: list[float] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    x_norms: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    state: QuantumState | None = None
    accumulated: np.ndarray | None = None      # product of step unitaries

    @property
    def final_energy(self) -> float:
        return self.energies[-1]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("beta,energy,x_norm,residual\n")
        for row in zip(self.betas, self.energies, self.x_norms, self.residuals):
            out.write("%.6f,%.12e,%.6e,%.6e\n" % row)
        return out.getvalue()

    def compact_circuit(self) -> KAKResult:
        if self.accumulated is None:
            raise QiteError("no accumulated two-qubit unitary to compact")
        return kak_compact(self.accumulated)


def qite_step(state: QuantumState, h_term: PauliSum, dtau: float,
              basis: list[str], regularization: float = 1e-8,
              evaluator: PauliEvaluator | None = None
              ) -> tuple[np.ndarray, QuantumState, float, np.ndarray]:
    """One linear-solve QITE step under ``h_term``.

    Returns (x, new_state, residual, unitary).  The state must be a
    normalized statevector; the applied operator is exactly unitary.
    """
    if state.vec is None:
        raise QiteError("QITE evolves statevectors")
    if not h_term.is_hermitian(1e-10):
        raise QiteError("Hamiltonian term must be Hermitian")
    ev = evaluator if evaluator is not None else PauliEvaluator(state)
    m = len(basis)
    amat = np.empty((m, m))
    bvec = np.empty(m)
    e_h = sum(float(c.real) * ev(l) for l, c in h_term.terms.items())
    c_norm = max(1.0 - 2.0 * dtau * e_h, 1e-12)
    for i, pi in enumerate(basis):
        for j, pj in enumerate(basis):
            phase, lab = _mul_labels(pi, pj)
            amat[i, j] = 2.0 * (phase * ev(lab)).real
        acc = 0.0j
        for l, c in h_term.terms.items():
            phase, lab = _mul_labels(pi, l)
            acc += c * phase * ev(lab)
        bvec[i] = 2.0 * dtau / math.sqrt(c_norm) * acc.imag
    x = np.linalg.solve(amat + regularization * np.eye(m), -bvec)
    residual = float(np.linalg.norm(amat @ x + bvec))
    gen = PauliSum(state.n_qubits)
    for lab, xi in zip(basis, x):
        gen._add_term(lab, xi)
    unitary = expm(1j * gen.to_matrix())
    new_vec = unitary @ state.vec
    nrm = np.linalg.norm(new_vec)
    assert abs(nrm - 1.0) < 1e-12, "QITE step lost unitarity"
    return x, QuantumState(state.n_qubits, vec=new_vec), residual, unitary


def qite_run(hamiltonian: PauliSum, initial: QuantumState,
             config: QiteConfig, shots: int | None = None,
             seed: int | None = None, noise: NoiseModel | None = None,
             calibration=None) -> QiteResult:
    """Run imaginary-time evolution to ``beta_total``.

    Without ``trotterize`` the whole Hamiltonian evolves in one step per
    dtau (the two-qubit regime); otherwise each Pauli term is evolved in
    sequence.  With ``shots`` the linear-system elements and energies are
    estimated from sampled counts (optionally mitigated); the statevector
    itself evolves exactly, mirroring measurement-limited hardware runs.
    """
    if shots is not None and seed is None:
        raise QiteError("seed is mandatory when sampling")
    basis = config.basis or default_basis(hamiltonian.n_qubits)
    for lab in basis:
        if not PauliSum.from_term(lab).is_hermitian():
            raise QiteError("expansion basis strings must be Hermitian")
    n_steps = int(round(config.beta_total / config.dtau))
    result = QiteResult()
    state = initial.copy()
    track_unitary = hamiltonian.n_qubits == 2
    acc = np.eye(4, dtype=complex) if track_unitary else None

    def make_ev(st, step_stream):
        return PauliEvaluator(st, shots, seed, noise, calibration, step_stream)

    ev0 = make_ev(state, (0,))
    e0 = sum(float(c.real) * ev0(l) for l, c in hamiltonian.terms.items())
    result.betas.append(0.0)
    result.energies.append(e0)
    result.x_norms.append(0.0)
    result.residuals.append(0.0)

    terms = [hamiltonian] if not config.trotterize else [
        PauliSum(hamiltonian.n_qubits, {l: c})
        for l, c in sorted(hamiltonian.terms.items())]

    for k in range(1, n_steps + 1):
        x_norm = 0.0
        res_max = 0.0
        for ti, term in enumerate(terms):
            ev = make_ev(state, (k, ti))
            x, state, res, u = qite_step(state, term, config.dtau, basis,
                                         config.regularization, ev)
            x_norm += float(np.linalg.norm(x))
            res_max = max(res_max, res)
            if track_unitary:
                acc = u @ acc
        if res_max > config.residual_threshold:
            result.warnings.append(
                f"step {k}: linear-system residual {res_max:.2e}")
        ev_e = make_ev(state, (k, len(terms)))
        energy = sum(float(c.real) * ev_e(l)
                     for l, c in hamiltonian.terms.items())
        result.betas.append(k * config.dtau)
        result.energies.append(energy)
        result.x_norms.append(x_norm)
        result.residuals.append(res_max)
    result.state = state
    result.accumulated = acc
    return result
