"""Packed storage for 8-fold-symmetric two-electron integrals.

Chemists' notation (pr|qs) with the symmetries
(pr|qs) = (rp|qs) = (pr|sq) = (qs|pr).  The canonical compound index is

    pair(i, j) = i (i + 1) / 2 + j          for i >= j
    index((p,r), (q,s)) = pair(PR, QS)      for PR >= QS

with PR = pair(max(p,r), min(p,r)) and likewise QS.  This layout is the
on-disk format of bundle ERI blobs.
"""

from __future__ import annotations

import numpy as np


def n_pairs(n: int) -> int:
    return n * (n + 1) // 2


def packed_size(n: int) -> int:
    return n_pairs(n_pairs(n))


def pair_index(i, j):
    """Compound index for i >= j (arrays allowed)."""
    return i * (i + 1) // 2 + j


def quartet_index(p: int, r: int, q: int, s: int) -> int:
    pr = pair_index(max(p, r), min(p, r))
    qs = pair_index(max(q, s), min(q, s))
    return pair_index(max(pr, qs), min(pr, qs))


def _pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays mapping pair index t -> (i, j) with i >= j."""
    i_of = np.empty(n_pairs(n), dtype=np.int64)
    j_of = np.empty(n_pairs(n), dtype=np.int64)
    t = 0
    for i in range(n):
        k = i + 1
        i_of[t:t + k] = i
        j_of[t:t + k] = np.arange(k)
        t += k
    return i_of, j_of


def pack(dense: np.ndarray, validate: bool = True, tol: float = 0.0) -> np.ndarray:
    """Pack a dense (n,n,n,n) array; optionally verify the 8-fold symmetry.

    With tol == 0 the symmetry must hold exactly as stored.
    """
    n = dense.shape[0]
    if dense.shape != (n, n, n, n):
        raise ValueError("eri must be a 4-index hypercube")
    if validate:
        for perm, name in (((1, 0, 2, 3), "(rp|qs)"),
                           ((0, 1, 3, 2), "(pr|sq)"),
                           ((2, 3, 0, 1), "(qs|pr)")):
            dev = np.abs(dense - dense.transpose(perm)).max()
            if dev > tol:
                raise ValueError(f"eri breaks {name} symmetry by {dev:.3e}")
    i_of, j_of = _pair_arrays(n)
    PR, QS = np.tril_indices(n_pairs(n))
    out = dense[i_of[PR], j_of[PR], i_of[QS], j_of[QS]]
    return np.ascontiguousarray(out, dtype=np.float64)


def unpack(packed: np.ndarray, n: int) -> np.ndarray:
    """Expand packed integrals back to a dense (n,n,n,n) array."""
    if packed.shape != (packed_size(n),):
        raise ValueError(f"packed eri has wrong length for n={n}")
    i_of, j_of = _pair_arrays(n)
    PR, QS = np.tril_indices(n_pairs(n))
    p, r = i_of[PR], j_of[PR]
    q, s = i_of[QS], j_of[QS]
    dense = np.empty((n, n, n, n), dtype=np.float64)
    for pp, rr, qq, ss in ((p, r, q, s), (r, p, q, s), (p, r, s, q),
                           (r, p, s, q), (q, s, p, r), (s, q, p, r),
                           (q, s, r, p), (s, q, r, p)):
        dense[pp, rr, qq, ss] = packed
    return dense
