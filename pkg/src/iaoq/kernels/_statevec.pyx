# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled statevector kernels (hot path behind the simulator).

Same contracts as ``numpy_backend``: length-2^n complex128 statevectors,
qubit 0 = least-significant bit, mask-encoded Pauli strings.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "cython"


def apply_1q(cnp.ndarray[cnp.complex128_t, ndim=1] psi,
             cnp.ndarray[cnp.complex128_t, ndim=2] u,
             int q, int n):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t lo = 1 << q
    cdef Py_ssize_t step = lo << 1
    cdef Py_ssize_t base, k, i0, i1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef double complex a, b
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(dim, dtype=np.complex128)
    for base in range(0, dim, step):
        for k in range(lo):
            i0 = base + k
            i1 = i0 + lo
            a = psi[i0]
            b = psi[i1]
            out[i0] = u00 * a + u01 * b
            out[i1] = u10 * a + u11 * b
    return out


def apply_2q(cnp.ndarray[cnp.complex128_t, ndim=1] psi,
             cnp.ndarray[cnp.complex128_t, ndim=2] u,
             int q1, int q0, int n):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t m0 = 1 << q0
    cdef Py_ssize_t m1 = 1 << q1
    cdef Py_ssize_t i, j00, j01, j10, j11
    cdef double complex a, b, c, d
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(dim, dtype=np.complex128)
    for i in range(dim):
        if (i & m0) or (i & m1):
            continue
        j00 = i
        j01 = i | m0
        j10 = i | m1
        j11 = i | m0 | m1
        a = psi[j00]; b = psi[j01]; c = psi[j10]; d = psi[j11]
        out[j00] = u[0, 0] * a + u[0, 1] * b + u[0, 2] * c + u[0, 3] * d
        out[j01] = u[1, 0] * a + u[1, 1] * b + u[1, 2] * c + u[1, 3] * d
        out[j10] = u[2, 0] * a + u[2, 1] * b + u[2, 2] * c + u[2, 3] * d
        out[j11] = u[3, 0] * a + u[3, 1] * b + u[3, 2] * c + u[3, 3] * d
    return out


def apply_cnot(cnp.ndarray[cnp.complex128_t, ndim=1] psi,
               int control, int target, int n):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t mc = 1 << control
    cdef Py_ssize_t mt = 1 << target
    cdef Py_ssize_t i
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(dim, dtype=np.complex128)
    for i in range(dim):
        if i & mc:
            out[i ^ mt] = psi[i]
        else:
            out[i] = psi[i]
    return out


def pauli_masks(label):
    cdef long long xm = 0, zm = 0
    cdef int ny = 0, q
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


cdef inline int _parity(long long v) nogil:
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return v & 1


cdef double complex _iphase(int ny) nogil:
    cdef int r = ny & 3
    if r == 0:
        return 1.0
    if r == 1:
        return 1.0j
    if r == 2:
        return -1.0
    return -1.0j


def apply_pauli(cnp.ndarray[cnp.complex128_t, ndim=1] psi,
                long long xm, long long zm, int ny):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef double complex ph = _iphase(ny)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(dim, dtype=np.complex128)
    for i in range(dim):
        if _parity(i & zm):
            out[i ^ xm] = -ph * psi[i]
        else:
            out[i ^ xm] = ph * psi[i]
    return out


def pauli_expect(cnp.ndarray[cnp.complex128_t, ndim=1] psi,
                 long long xm, long long zm, int ny):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef double complex ph = _iphase(ny)
    cdef double complex acc = 0.0
    cdef double complex amp
    for i in range(dim):
        amp = ph * psi[i]
        if _parity(i & zm):
            amp = -amp
        acc += amp * (psi[i ^ xm].real - 1j * psi[i ^ xm].imag)
    return complex(acc)
