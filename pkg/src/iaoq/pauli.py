"""Pauli-string algebra and fermion-to-qubit mappings.

A Pauli string is stored as a plain python string over the alphabet
``IXYZ`` indexed by qubit (``label[q]`` is the letter acting on qubit
``q``); the text serialization reverses this so that qubit 0 is printed
rightmost, matching the bitstring convention used by the simulator.

Two encodings are provided:

* Jordan-Wigner over 2n qubits for n spatial orbitals: up-spin orbital p
  maps to qubit p, down-spin to qubit n+p, ``|1>`` means occupied.
* A two-qubit "pair" encoding for 2-orbital / 2-electron (Sz = 0)
  problems: qubit 0 holds the orbital index of the up electron, qubit 1
  that of the down electron, so the closed-shell reference is |00>.
  This is the form in which the 2-qubit fixture Hamiltonians are stored.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

LETTERS = "IXYZ"

# single-qubit product table: (a, b) -> (phase, c) with  a.b = phase * c
_PROD = {}
for _a in LETTERS:
    _PROD[("I", _a)] = (1.0, _a)
    _PROD[(_a, "I")] = (1.0, _a)
    _PROD[(_a, _a)] = (1.0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PROD[(_a, _b)] = (1j, _c)
    _PROD[(_b, _a)] = (-1j, _c)

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """One weighted Pauli string; ``label[q]`` is the letter on qubit q."""

    label: str
    coeff: complex = 1.0

    def __post_init__(self):
        if any(c not in LETTERS for c in self.label):
            raise PauliError(f"bad Pauli label {self.label!r}")
        if not cmath.isfinite(complex(self.coeff)):
            raise PauliError("non-finite coefficient")

    @property
    def n_qubits(self) -> int:
        return len(self.label)

    def weight(self) -> int:
        """Number of non-identity letters."""
        return sum(c != "I" for c in self.label)


def _mul_labels(a: str, b: str) -> tuple[complex, str]:
    phase = 1.0 + 0j
    out = []
    for ca, cb in zip(a, b):
        ph, c = _PROD[(ca, cb)]
        phase *= ph
        out.append(c)
    return phase, "".join(out)


class PauliSum:
    """Weighted sum of Pauli strings on a fixed qubit register.

    Value semantics: arithmetic returns new objects; in-place mutation is
    limited to the private accumulator methods used while building sums.
    """

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Mapping[str, complex] | None = None):
        self.n_qubits = int(n_qubits)
        self.terms: dict[str, complex] = {}
        if terms:
            for label, coeff in terms.items():
                self._add_term(label, coeff)

    # -- construction -------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {"I" * n_qubits: coeff})

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def from_term(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        return cls(len(label), {label: coeff})

    @classmethod
    def from_single(cls, n_qubits: int, qubit: int, letter: str,
                    coeff: complex = 1.0) -> "PauliSum":
        if not 0 <= qubit < n_qubits:
            raise PauliError(f"qubit {qubit} out of range for n={n_qubits}")
        label = "".join(letter if q == qubit else "I" for q in range(n_qubits))
        return cls(n_qubits, {label: coeff})

    def _add_term(self, label: str, coeff: complex) -> None:
        if len(label) != self.n_qubits:
            raise PauliError("term length does not match register size")
        new = self.terms.get(label, 0.0) + coeff
        if new == 0:
            self.terms.pop(label, None)
        else:
            self.terms[label] = new

    # -- protocol -----------------------------------------------------

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PauliString]:
        for label, coeff in self.terms.items():
            yield PauliString(label, coeff)

    def __repr__(self) -> str:
        parts = [f"({c:.6g})*{l}" for l, c in sorted(self.terms.items())]
        return f"PauliSum[{self.n_qubits}]({' + '.join(parts) or '0'})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    # -- algebra ------------------------------------------------------

    def _check(self, other: "PauliSum") -> None:
        if self.n_qubits != other.n_qubits:
            raise PauliError("qubit-count mismatch")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check(other)
        out = PauliSum(self.n_qubits, self.terms)
        for label, coeff in other.terms.items():
            out._add_term(label, coeff)
        return out

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check(other)
            out = PauliSum(self.n_qubits)
            for la, ca in self.terms.items():
                for lb, cb in other.terms.items():
                    phase, lc = _mul_labels(la, lb)
                    out._add_term(lc, phase * ca * cb)
            return out
        return PauliSum(self.n_qubits,
                        {l: c * other for l, c in self.terms.items()})

    __rmul__ = __mul__

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits,
                        {l: np.conj(c) for l, c in self.terms.items()})

    def simplify(self, threshold: float = 1e-12) -> "PauliSum":
        """Drop terms with |coeff| < threshold. Idempotent."""
        return PauliSum(self.n_qubits,
                        {l: c for l, c in self.terms.items()
                         if abs(c) >= threshold})

    def commutator(self, other: "PauliSum") -> "PauliSum":
        return self * other - other * self

    # -- queries ------------------------------------------------------

    def coefficient(self, label: str) -> complex:
        return self.terms.get(label, 0.0)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(abs(c.imag if isinstance(c, complex) else 0.0) <= tol
                   for c in self.terms.values())

    def support(self) -> set[int]:
        """Qubits touched by at least one non-identity letter."""
        out = set()
        for label in self.terms:
            out.update(q for q, c in enumerate(label) if c != "I")
        return out

    def norm(self) -> float:
        """Coefficient 2-norm."""
        return float(np.sqrt(sum(abs(c) ** 2 for c in self.terms.values())))

    def to_matrix(self) -> np.ndarray:
        """Dense matrix in the computational basis (qubit 0 = LSB).

        Intended for oracles and small-system work; 2^n x 2^n.
        """
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for label, coeff in self.terms.items():
            m = np.array([[coeff]], dtype=complex)
            # qubit 0 is the least-significant index -> rightmost kron factor
            for q in range(self.n_qubits - 1, -1, -1):
                m = np.kron(m, _MATS[label[q]])
            out += m
        return out

    # -- text form ----------------------------------------------------

    def to_text(self) -> str:
        """Serialize as lines of ``coeff_re coeff_im LETTERS``.

        LETTERS is printed with qubit 0 rightmost. This is the fixture
        format for the committed 2-qubit Hamiltonians.
        """
        lines = []
        for label in sorted(self.terms):
            c = complex(self.terms[label])
            lines.append(f"{c.real:+.16e} {c.imag:+.16e} {label[::-1]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        terms: dict[str, complex] = {}
        n = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise PauliError(f"bad PauliSum line: {raw!r}")
            re_, im_, label = parts
            label = label[::-1]
            if n is None:
                n = len(label)
            elif len(label) != n:
                raise PauliError("inconsistent string lengths")
            terms[label] = terms.get(label, 0.0) + complex(float(re_), float(im_))
        if n is None:
            raise PauliError("empty PauliSum text")
        return cls(n, terms)


# ----------------------------------------------------------------------
# Jordan-Wigner mapping
# ----------------------------------------------------------------------

QUBIT_BUDGET = 14


def _spin_orbital_qubit(p: int, spin: str, n: int) -> int:
    if spin not in ("up", "down"):
        raise PauliError(f"spin must be 'up' or 'down', got {spin!r}")
    if not 0 <= p < n:
        raise PauliError(f"orbital index {p} out of range for n={n}")
    return p if spin == "up" else n + p


def _ladder(q: int, n_qubits: int, dagger: bool) -> PauliSum:
    """JW ladder operator on qubit q with a Z tail on qubits 0..q-1.

    Creation must raise occupation, |0> -> |1>, which with Z = diag(1,-1)
    is (X - iY)/2; the annihilator is the adjoint.
    """
    x_label = ["I"] * n_qubits
    y_label = ["I"] * n_qubits
    for t in range(q):
        x_label[t] = y_label[t] = "Z"
    x_label[q], y_label[q] = "X", "Y"
    sign = -0.5j if dagger else 0.5j
    return PauliSum(n_qubits, {"".join(x_label): 0.5, "".join(y_label): sign})


def jw_creation(p: int, spin: str, n: int) -> PauliSum:
    """a^dag_{p,spin} on 2n qubits (up block first, then down block)."""
    return _ladder(_spin_orbital_qubit(p, spin, n), 2 * n, dagger=True)


def jw_annihilation(p: int, spin: str, n: int) -> PauliSum:
    return _ladder(_spin_orbital_qubit(p, spin, n), 2 * n, dagger=False)


def jw_excitation(p: int, r: int, spin: str, n: int) -> PauliSum:
    """X^sigma_pr = a^dag_{p sigma} a_{r sigma} via the three-case form.

    p > r: ladder(p) Z_{p-1}..Z_{r+1} ladder(r)^dag, p = r: (1-Z)/2,
    p < r: mirror case.  Equal, as a matrix, to the operator product of
    jw_creation and jw_annihilation.
    """
    qp = _spin_orbital_qubit(p, spin, n)
    qr = _spin_orbital_qubit(r, spin, n)
    nq = 2 * n
    if p == r:
        out = PauliSum.identity(nq, 0.5)
        out._add_term("".join("Z" if q == qp else "I" for q in range(nq)), -0.5)
        return out
    lo, hi = min(qp, qr), max(qp, qr)

    def dressed(letter_p: str, letter_r: str) -> str:
        label = ["I"] * nq
        for t in range(lo + 1, hi):
            label[t] = "Z"
        label[qp], label[qr] = letter_p, letter_r
        return "".join(label)

    # (X - iY)/2 on the creation end, (X + iY)/2 on the annihilation end,
    # Z string strictly between; the tail Z hitting the inner ladder
    # operator is absorbed without a phase (Z (X+iY)/2 = (X+iY)/2).
    out = PauliSum(nq)
    for lp, cp in (("X", 0.5), ("Y", -0.5j)):
        for lr, cr in (("X", 0.5), ("Y", 0.5j)):
            out._add_term(dressed(lp, lr), cp * cr)
    return out


def number_operator(n: int) -> PauliSum:
    """Total electron number over 2n qubits."""
    out = PauliSum(2 * n)
    for p in range(n):
        for spin in ("up", "down"):
            out = out + jw_excitation(p, p, spin, n)
    return out


def sz_operator(n: int) -> PauliSum:
    """S_z in units of hbar."""
    out = PauliSum(2 * n)
    for p in range(n):
        out = out + 0.5 * jw_excitation(p, p, "up", n)
        out = out - 0.5 * jw_excitation(p, p, "down", n)
    return out


def s_squared_operator(n: int) -> PauliSum:
    """S^2 = S_- S_+ + S_z (S_z + 1), assembled from JW-mapped operators."""
    if n > QUBIT_BUDGET // 2:
        raise PauliError(f"{n} orbitals exceed the {QUBIT_BUDGET}-qubit budget")
    nq = 2 * n
    s_plus = PauliSum(nq)
    for p in range(n):
        s_plus = s_plus + jw_creation(p, "up", n) * jw_annihilation(p, "down", n)
    sz = sz_operator(n)
    out = s_plus.adjoint() * s_plus + sz * sz + sz
    return out.simplify()


def map_hamiltonian(mo, budget: int = QUBIT_BUDGET) -> PauliSum:
    """JW image of E0 + sum h_pq a^dag a + 1/2 sum (pr|qs) a^dag a^dag a a.

    ``mo`` provides e0, h (n x n), eri (chemists' (pr|qs), dense 4-index
    or packed; see orbitals.MOIntegrals), n_orb.
    """
    n = mo.n_orb
    if 2 * n > budget:
        raise PauliError(f"{2 * n} qubits exceed budget {budget}")
    h = np.asarray(mo.h, dtype=float)
    eri = mo.eri_dense()
    nq = 2 * n
    out = PauliSum.identity(nq, complex(mo.e0))

    spins = ("up", "down")
    # one-body
    for p in range(n):
        for q in range(n):
            if abs(h[p, q]) < 1e-15:
                continue
            for s in spins:
                out = out + h[p, q] * jw_excitation(p, q, s, n)
    # two-body, normal-ordered via X^sigma operators:
    # a^dag_p a^dag_q a_s a_r = X_pr X_qs - delta_{qr} delta_{st} X_ps
    for p in range(n):
        for r in range(n):
            for q in range(n):
                for s in range(n):
                    g = eri[p, r, q, s]
                    if abs(g) < 1e-15:
                        continue
                    for sp in spins:
                        for tp in spins:
                            term = jw_excitation(p, r, sp, n) * jw_excitation(q, s, tp, n)
                            if sp == tp and q == r:
                                term = term - jw_excitation(p, s, sp, n)
                            out = out + (0.5 * g) * term
    return out.simplify()


# ----------------------------------------------------------------------
# dense-matrix Pauli decomposition (small registers)
# ----------------------------------------------------------------------

def pauli_decompose(matrix: np.ndarray, tol: float = 1e-12) -> PauliSum:
    """Expand a 2^n x 2^n matrix in the Pauli basis, dropping |c| < tol."""
    dim = matrix.shape[0]
    n = int(round(np.log2(dim)))
    if 2 ** n != dim or matrix.shape != (dim, dim):
        raise PauliError("matrix dimension is not a power of two")
    out = PauliSum(n)
    from itertools import product as iproduct
    for letters in iproduct(LETTERS, repeat=n):
        label = "".join(letters)
        m = np.array([[1.0]], dtype=complex)
        for q in range(n - 1, -1, -1):
            m = np.kron(m, _MATS[label[q]])
        c = np.trace(m.conj().T @ matrix) / dim
        if abs(c) >= tol:
            out._add_term(label, complex(c))
    return out


# ----------------------------------------------------------------------
# two-electron pair encoding (2 spatial orbitals -> 2 qubits)
# ----------------------------------------------------------------------
#
# Sector basis |u, d> = a^dag_{u up} a^dag_{d down} |vac>, with the qubit
# state |q1 q0> = |d u>: qubit 0 stores u, qubit 1 stores d.  Index into
# the 4-vector is u + 2 d.

def _pair_x_matrix(p: int, r: int, spin: str) -> np.ndarray:
    """Matrix of a^dag_{p spin} a_{r spin} on the pair-sector basis."""
    m = np.zeros((4, 4), dtype=complex)
    for u in range(2):
        for d in range(2):
            col = u + 2 * d
            if spin == "up" and r == u:
                m[p + 2 * d, col] += 1.0
            if spin == "down" and r == d:
                m[u + 2 * p, col] += 1.0
    return m


def pair_excitation(p: int, r: int, spin: str) -> PauliSum:
    """X^sigma_pr in the 2-qubit pair encoding."""
    if p not in (0, 1) or r not in (0, 1):
        raise PauliError("pair encoding holds exactly 2 orbitals")
    return pauli_decompose(_pair_x_matrix(p, r, spin))


def pair_hamiltonian(mo) -> PauliSum:
    """2-qubit image of a 2-orbital, 2-electron (Sz = 0) Hamiltonian.

    Built by direct evaluation on the 4-state determinant sector, then
    exact Pauli decomposition; has the eta_{mu nu} sigma x sigma shape of
    the committed fixture Hamiltonians.
    """
    if mo.n_orb != 2 or mo.n_elec != 2:
        raise PauliError("pair encoding needs n_orb == 2 and n_elec == 2")
    h = np.asarray(mo.h, dtype=float)
    eri = mo.eri_dense()
    mat = np.eye(4, dtype=complex) * mo.e0
    spins = ("up", "down")
    xs = {(p, r, s): _pair_x_matrix(p, r, s)
          for p in range(2) for r in range(2) for s in spins}
    for p in range(2):
        for q in range(2):
            for s in spins:
                mat += h[p, q] * xs[(p, q, s)]
    for p in range(2):
        for r in range(2):
            for q in range(2):
                for s in range(2):
                    g = eri[p, r, q, s]
                    if abs(g) < 1e-15:
                        continue
                    for sp in spins:
                        for tp in spins:
                            block = xs[(p, r, sp)] @ xs[(q, s, tp)]
                            if sp == tp and q == r:
                                block = block - xs[(p, s, sp)]
                            mat += 0.5 * g * block
    return pauli_decompose(mat).simplify()


def pair_s_squared() -> PauliSum:
    """S^2 on the pair-encoded sector (singlets -> 0, triplet -> 2)."""
    m = np.zeros((4, 4), dtype=complex)
    # S^2 acts on span{|01>, |10>} as [[1,-1],[-1,1]] (indices 1 and 2)
    m[1, 1] = m[2, 2] = 1.0
    m[1, 2] = m[2, 1] = -1.0
    return pauli_decompose(m)


def pair_number_operator() -> PauliSum:
    return PauliSum.identity(2, 2.0)


# ----------------------------------------------------------------------
# encoding handles (shared by the measurement and excited-state modules)
# ----------------------------------------------------------------------

class JWEncoding:
    """Jordan-Wigner over 2 n_orb qubits."""

    name = "jw"

    def __init__(self, n_orb: int):
        self.n_orb = n_orb
        self.n_qubits = 2 * n_orb

    def excitation(self, p: int, r: int, spin: str) -> PauliSum:
        return jw_excitation(p, r, spin, self.n_orb)

    def hamiltonian(self, mo) -> PauliSum:
        return map_hamiltonian(mo)

    def hf_bits(self, n_occ: int) -> int:
        bits = 0
        for p in range(n_occ):
            bits |= (1 << p) | (1 << (self.n_orb + p))
        return bits

    def s_squared(self) -> PauliSum:
        return s_squared_operator(self.n_orb)


class PairEncoding:
    """Two-electron pair sector of a 2-orbital space on 2 qubits."""

    name = "pair"
    n_orb = 2
    n_qubits = 2

    def excitation(self, p: int, r: int, spin: str) -> PauliSum:
        return pair_excitation(p, r, spin)

    def hamiltonian(self, mo) -> PauliSum:
        return pair_hamiltonian(mo)

    def hf_bits(self, n_occ: int = 1) -> int:
        if n_occ != 1:
            raise PauliError("pair encoding holds one doubly occupied orbital")
        return 0

    def s_squared(self) -> PauliSum:
        return pair_s_squared()
