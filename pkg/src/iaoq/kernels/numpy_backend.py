"""Pure-numpy statevector kernels (fallback backend).

Statevectors are contiguous complex128 arrays of length 2^n with qubit 0
as the least-significant bit of the index.  Pauli strings arrive
mask-encoded: ``xm`` has a bit set where the letter is X or Y, ``zm``
where it is Z or Y, and ``ny`` counts Y letters (the i^ny prefactor).
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

_PHASE_I = np.array([1.0, 1j, -1.0, -1j])


def _parity(values: np.ndarray) -> np.ndarray:
    """Bit parity of each entry (uint64 in, 0/1 out)."""
    v = values.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return (v & 1).astype(np.int8)


def apply_1q(psi: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    """Apply a 2x2 unitary to qubit q."""
    lo = 1 << q
    view = psi.reshape(-1, 2, lo)
    out = np.empty_like(view)
    a, b = view[:, 0, :], view[:, 1, :]
    out[:, 0, :] = u[0, 0] * a + u[0, 1] * b
    out[:, 1, :] = u[1, 0] * a + u[1, 1] * b
    return out.reshape(-1)

def apply_2q(psi: np.ndarray, u: np.ndarray, q1: int, q0: int, n: int) -> np.ndarray:
    """Apply a 4x4 unitary; u is indexed by (b1 b0) with b0 the bit of q0."""
    dim = psi.shape[0]
    idx = np.arange(dim)
    b0 = (idx >> q0) & 1
    b1 = (idx >> q1) & 1
    base = idx & ~((1 << q0) | (1 << q1))
    sub = (b1 << 1) | b0
    out = np.zeros_like(psi)
    for s in range(4):
        src = base | ((s & 1) << q0) | (((s >> 1) & 1) << q1)
        out += u[sub, s] * psi[src]
    return out


def apply_cnot(psi: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    dim = psi.shape[0]
    idx = np.arange(dim)
    sel = (idx >> control) & 1 == 1
    out = psi.copy()
    out[idx[sel] ^ (1 << target)] = psi[sel]
    return out


def pauli_masks(label: str) -> tuple[int, int, int]:
    """Mask-encode a Pauli label (label[q] = letter on qubit q)."""
    xm = zm = ny = 0
    for q, c in enumerate(label):
        if c == "X":
            xm |= 1 << q
        elif c == "Z":
            zm |= 1 << q
        elif c == "Y":
            xm |= 1 << q
            zm |= 1 << q
            ny += 1
    return xm, zm, ny


def apply_pauli(psi: np.ndarray, xm: int, zm: int, ny: int) -> np.ndarray:
    """P |psi> for the mask-encoded Pauli string."""
    dim = psi.shape[0]
    idx = np.arange(dim, dtype=np.uint64)
    signs = 1.0 - 2.0 * _parity(idx & np.uint64(zm))
    out = np.empty_like(psi)
    out[np.bitwise_xor(idx, np.uint64(xm)).astype(np.int64)] = \
        (_PHASE_I[ny % 4] * signs) * psi
    return out


def pauli_expect(psi: np.ndarray, xm: int, zm: int, ny: int) -> complex:
    """<psi| P |psi> for the mask-encoded Pauli string."""
    return complex(np.vdot(psi, apply_pauli(psi, xm, zm, ny)))
