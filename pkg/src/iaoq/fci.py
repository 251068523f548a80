"""Exact diagonalization oracle.

Three routes, all dense:

* qubit route: any Hermitian ``PauliSum`` is diagonalized as a matrix,
  optionally restricted to a particle-number / S_z sector of the JW
  encoding (the sector basis is enumerated, so the full 4^n matrix is
  never materialized);
* folded route: ``MOIntegrals`` are JW-mapped first (<= 14 qubits);
* two-electron route: for n_elec == 2 the (1 up, 1 down) determinant
  basis of size n_orb^2 is diagonalized directly, covering bases far
  beyond the qubit budget (used as the full-basis reference for the
  subspace-expansion checks).

Eigenvectors are stored over the sector basis; ``statevector(k)`` embeds
state k back into the full computational basis when it fits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .orbitals import MOIntegrals
from .pauli import PauliSum, map_hamiltonian, pair_s_squared, s_squared_operator

QUBIT_BUDGET = 14


class FCIError(ValueError):
    pass


@dataclass
class FCIResult:
    energies: np.ndarray            # ascending, Hartree
    vectors: np.ndarray             # columns over ``basis_states``
    basis_states: np.ndarray        # computational-basis indices (sector basis)
    n_qubits: int
    s_squared: np.ndarray | None = None
    n_elec: int | None = None
    sz: float | None = None
    encoding: str = "qubit"         # "qubit" or "determinant"

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])

    def statevector(self, k: int = 0) -> np.ndarray:
        if self.encoding != "qubit":
            raise FCIError("no qubit embedding for the determinant route")
        if self.n_qubits > QUBIT_BUDGET:
            raise FCIError("statevector embedding exceeds the qubit budget")
        out = np.zeros(1 << self.n_qubits, dtype=complex)
        out[self.basis_states] = self.vectors[:, k]
        return out


def _sector_states(n_orb: int, n_up: int, n_down: int) -> np.ndarray:
    """JW basis indices with fixed up/down occupation numbers."""
    from itertools import combinations
    ups = []
    for occ in combinations(range(n_orb), n_up):
        m = 0
        for q in occ:
            m |= 1 << q
        ups.append(m)
    downs = []
    for occ in combinations(range(n_orb), n_down):
        m = 0
        for q in occ:
            m |= 1 << (n_orb + q)
        downs.append(m)
    states = sorted(u | d for u in ups for d in downs)
    return np.asarray(states, dtype=np.int64)


def _matrix_on_states(op: PauliSum, states: np.ndarray) -> np.ndarray:
    """Dense matrix of ``op`` restricted to the given basis states."""
    pos = {int(s): k for k, s in enumerate(states)}
    dim = len(states)
    out = np.zeros((dim, dim), dtype=complex)
    for label, coeff in op.terms.items():
        xm = zm = 0
        ny = 0
        for q, c in enumerate(label):
            if c == "X":
                xm |= 1 << q
            elif c == "Z":
                zm |= 1 << q
            elif c == "Y":
                xm |= 1 << q
                zm |= 1 << q
                ny += 1
        ph = 1j ** (ny % 4)
        for k, s in enumerate(states):
            t = int(s) ^ xm
            j = pos.get(t)
            if j is None:
                continue
            sign = -1.0 if bin(int(s) & zm).count("1") & 1 else 1.0
            out[j, k] += coeff * ph * sign
    return out


def _label_s_squared(ham_matrix: np.ndarray, s2_matrix: np.ndarray,
                     energies: np.ndarray, vectors: np.ndarray,
                     tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize S^2 inside degenerate blocks for stable sector labels."""
    vals = np.empty(len(energies))
    k = 0
    while k < len(energies):
        j = k + 1
        while j < len(energies) and abs(energies[j] - energies[k]) < tol:
            j += 1
        block = vectors[:, k:j]
        s2_block = block.conj().T @ s2_matrix @ block
        s2_block = 0.5 * (s2_block + s2_block.conj().T)
        w, v = np.linalg.eigh(s2_block)
        vectors[:, k:j] = block @ v
        vals[k:j] = w
        k = j
    return vals, vectors


def fci(problem, n_elec: int | None = None, sz: float | None = None,
        budget: int = QUBIT_BUDGET) -> FCIResult:
    """Exact spectrum of a PauliSum or of folded integrals.

    For ``MOIntegrals`` input, ``n_elec``/``sz`` default to the stored
    electron count and 0; for a raw ``PauliSum`` no sector restriction
    is applied unless both are given.
    """
    if isinstance(problem, MOIntegrals):
        if 2 * problem.n_orb > budget:
            if (n_elec or problem.n_elec) == 2:
                return fci_two_electron(problem)
            raise FCIError(
                f"{2 * problem.n_orb} qubits exceed the budget of {budget}")
        if n_elec is None:
            n_elec = problem.n_elec
        if sz is None:
            sz = 0.0 if n_elec % 2 == 0 else 0.5
        op = map_hamiltonian(problem, budget=budget)
        n_orb = problem.n_orb
    else:
        op = problem
        n_orb = op.n_qubits // 2 if op.n_qubits % 2 == 0 else None

    nq = op.n_qubits
    if nq > budget:
        raise FCIError(f"{nq} qubits exceed the budget of {budget}")

    if n_elec is not None and sz is not None and n_orb is not None:
        n_up = round(n_elec / 2 + sz)
        n_down = n_elec - n_up
        if not (0 <= n_up <= n_orb and 0 <= n_down <= n_orb):
            raise FCIError(f"no ({n_elec}, {sz}) sector in {n_orb} orbitals")
        states = _sector_states(n_orb, n_up, n_down)
        s2_op = s_squared_operator(n_orb)
    else:
        states = np.arange(1 << nq, dtype=np.int64)
        s2_op = pair_s_squared() if nq == 2 else None

    hmat = _matrix_on_states(op, states)
    if np.abs(hmat - hmat.conj().T).max() > 1e-9:
        raise FCIError("Hamiltonian matrix is not Hermitian")
    hmat = 0.5 * (hmat + hmat.conj().T)
    energies, vectors = np.linalg.eigh(hmat)
    s2_vals = None
    if s2_op is not None:
        s2_mat = _matrix_on_states(s2_op, states)
        s2_vals, vectors = _label_s_squared(hmat, s2_mat, energies, vectors)
    return FCIResult(energies, vectors, states, nq, s2_vals, n_elec, sz)


def fci_two_electron(mo: MOIntegrals) -> FCIResult:
    """Exact (1 up, 1 down) diagonalization in the determinant basis.

    Basis |p q> = a^dag_{p up} a^dag_{q down} |vac>, index p * n + q.
    Covers the S_z = 0 sector (all singlets plus the m = 0 triplets).
    """
    if mo.n_elec != 2:
        raise FCIError("two-electron route needs n_elec == 2")
    n = mo.n_orb
    h = np.asarray(mo.h, dtype=float)
    g = mo.eri_dense()
    eye = np.eye(n)
    hmat = (np.kron(h, eye) + np.kron(eye, h)
            + g.transpose(0, 2, 1, 3).reshape(n * n, n * n))
    hmat = 0.5 * (hmat + hmat.T) + mo.e0 * np.eye(n * n)
    energies, vectors = np.linalg.eigh(hmat)
    # S^2 on this sector is I - SWAP(p, q)
    swap = np.zeros((n * n, n * n))
    for p in range(n):
        for q in range(n):
            swap[p * n + q, q * n + p] = 1.0
    s2 = np.eye(n * n) - swap
    s2_vals, vectors = _label_s_squared(hmat, s2, energies, vectors)
    return FCIResult(energies, vectors, np.arange(n * n), 2 * n,
                     s2_vals, 2, 0.0, encoding="determinant")
