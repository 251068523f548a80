"""Quantum equation-of-motion excited states.

Spin-summed single and double excitation operators over the reference
define a generalized eigenvalue pencil assembled from ground-state
expectation values of (double and triple) commutators,

    [[M, Q], [Q*, M*]]  vs  [[V, W], [-W*, -V*]] ,

with the symmetrized triple commutator [A, B, C] = ([[A,B],C] +
[A,[B,C]]) / 2.  Every commutator is expanded once in Pauli algebra and
cached; expectations are shared across matrix elements, mirroring how a
hardware run groups Pauli measurements.  The metric determinant is the
ill-conditioning diagnostic: it collapses toward zero when the ground
state becomes degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliSum
from .simulator import PauliEvaluator, QuantumState


class QeomError(ValueError):
    pass


@dataclass
class ExcitationBasis:
    operators: list[PauliSum]
    labels: list[str]

    def __len__(self) -> int:
        return len(self.operators)


def build_excitation_basis(n_occ: int, n_orb: int, encoding) -> ExcitationBasis:
    """Spin-summed singles and doubles over the reference determinant."""
    occ = range(n_occ)
    vir = range(n_occ, n_orb)
    ops: list[PauliSum] = []
    labels: list[str] = []
    for i in occ:
        for a in vir:
            e = (encoding.excitation(a, i, "up")
                 + encoding.excitation(a, i, "down"))
            ops.append(e.simplify())
            labels.append(f"s:{i}->{a}")
    pairs = [(a, i) for i in occ for a in vir]
    for k, (a, i) in enumerate(pairs):
        for (b, j) in pairs[k:]:
            # E_{abij} = sum_{st} adag_{a s} adag_{b t} a_{j t} a_{i s}
            #          = sum_{st} [X^s_{ai} X^t_{bj} - d_{st} d_{ib} X^s_{aj}]
            e = PauliSum(encoding.n_qubits)
            for s in ("up", "down"):
                for t in ("up", "down"):
                    term = (encoding.excitation(a, i, s)
                            * encoding.excitation(b, j, t))
                    if s == t and b == i:
                        term = term - encoding.excitation(a, j, s)
                    e = e + term
            e = e.simplify(1e-12)
            if len(e) == 0:
                continue
            ops.append(e)
            labels.append(f"d:({i},{j})->({a},{b})")
    return ExcitationBasis(ops, labels)


@dataclass
class QeomMatrices:
    m: np.ndarray
    q: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @property
    def size(self) -> int:
        return self.m.shape[0]

    def lhs(self) -> np.ndarray:
        return np.block([[self.m, self.q],
                         [self.q.conj(), self.m.conj()]])

    def metric(self) -> np.ndarray:
        return np.block([[self.v, self.w],
                         [-self.w.conj(), -self.v.conj()]])


def _triple_commutator(a: PauliSum, h: PauliSum, c: PauliSum) -> PauliSum:
    inner1 = a.commutator(h).commutator(c)
    inner2 = a.commutator(h.commutator(c))
    return ((inner1 + inner2) * 0.5).simplify(1e-13)


def build_matrices(state: QuantumState, basis: ExcitationBasis,
                   hamiltonian: PauliSum, shots: int | None = None,
                   seed: int | None = None, noise=None, calibration=None
                   ) -> QeomMatrices:
    """Assemble M, Q, V, W from commutator expectations over ``state``."""
    n = len(basis)
    m = np.zeros((n, n), dtype=complex)
    q = np.zeros((n, n), dtype=complex)
    v = np.zeros((n, n), dtype=complex)
    w = np.zeros((n, n), dtype=complex)
    ev = PauliEvaluator(state, shots, seed, noise, calibration, stream=(0xE0,))
    for mu, e_mu in enumerate(basis.operators):
        adj = e_mu.adjoint()
        for nu, e_nu in enumerate(basis.operators):
            e_nu_dag = e_nu.adjoint()
            v[mu, nu] = ev.evaluate_sum(adj.commutator(e_nu).simplify(1e-13))
            w[mu, nu] = -ev.evaluate_sum(adj.commutator(e_nu_dag).simplify(1e-13))
            m[mu, nu] = ev.evaluate_sum(
                _triple_commutator(adj, hamiltonian, e_nu))
            q[mu, nu] = -ev.evaluate_sum(
                _triple_commutator(adj, hamiltonian, e_nu_dag))
    return QeomMatrices(m, q, v, w)


def solve(qm: QeomMatrices, cond_threshold: float = 1e8,
          discard: float = 1e-8) -> np.ndarray:
    """Positive-branch excitation energies of the qEOM pencil, ascending.

    The (indefinite) metric is whitened: eigenvalues below
    ``discard * max`` are dropped, the rest rescaled to a signature
    matrix, and the reduced ordinary problem diagonalized.
    """
    lhs, metric = qm.lhs(), qm.metric()
    herm_dev = np.abs(metric - metric.conj().T).max()
    if herm_dev > 1e-6:
        raise QeomError(f"metric is not Hermitian (deviation {herm_dev:.2e})")
    metric = 0.5 * (metric + metric.conj().T)
    s, u = np.linalg.eigh(metric)
    smax = np.abs(s).max()
    if smax == 0:
        raise QeomError("metric vanished")
    keep = np.abs(s) >= discard * smax
    if not keep.any():
        raise QeomError("empty retained subspace after whitening")
    cond = smax / np.abs(s[keep]).min()
    if cond > cond_threshold:
        det = float(np.linalg.det(metric).real)
        raise QeomError(
            f"qEOM metric ill-conditioned: cond {cond:.3e}, det(G) {det:.3e}")
    x = u[:, keep] / np.sqrt(np.abs(s[keep]))
    sig = np.sign(s[keep])
    reduced = np.diag(sig) @ (x.conj().T @ lhs @ x)
    vals = np.linalg.eigvals(reduced)
    if np.abs(vals.imag).max() > 1e-8:
        raise QeomError("excitation energies drifted complex")
    vals = np.sort(vals.real)
    return vals[vals > 1e-10]


def metric_determinant(qm: QeomMatrices) -> float:
    """det of the metric block matrix (the paper's diagnostic curve)."""
    det = np.linalg.det(qm.metric())
    assert abs(det.imag) < 1e-8 * max(1.0, abs(det))
    return float(det.real)


def excitation_energies(state: QuantumState, hamiltonian: PauliSum,
                        n_occ: int, n_orb: int, encoding,
                        shots: int | None = None, seed: int | None = None,
                        noise=None, calibration=None
                        ) -> tuple[np.ndarray, float]:
    """End-to-end qEOM: (ascending positive energies, metric determinant)."""
    basis = build_excitation_basis(n_occ, n_orb, encoding)
    qm = build_matrices(state, basis, hamiltonian, shots, seed, noise,
                        calibration)
    return solve(qm), metric_determinant(qm)
