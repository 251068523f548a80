#!/usr/bin/env python3
"""Compare the compiled statevector kernels against the numpy fallback.

Two workloads mirror the package's hot loops: a layered
rotation+entangler circuit (the VQE/QITE execution path) and repeated
Pauli-string expectations (the measurement path).

Run:  python benchmarks/bench_kernels.py [--qubits 4 6 8 10 12]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from iaoq.kernels import get_backend


def random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def bench_circuit(backend, n, layers, rng) -> float:
    gate = np.array([[np.cos(0.3), -np.sin(0.3)],
                     [np.sin(0.3), np.cos(0.3)]], dtype=complex)
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    t0 = time.perf_counter()
    for _ in range(layers):
        for q in range(n):
            psi = backend.apply_1q(psi, gate, q, n)
        for q in range(n - 1):
            psi = backend.apply_cnot(psi, q, q + 1, n)
    return time.perf_counter() - t0


def bench_pauli(backend, n, reps, rng) -> float:
    psi = random_state(n, rng)
    labels = ["".join(rng.choice(list("IXYZ")) for _ in range(n))
              for _ in range(64)]
    masks = [backend.pauli_masks(lab) for lab in labels]
    t0 = time.perf_counter()
    acc = 0.0
    for _ in range(reps):
        for m in masks:
            acc += backend.pauli_expect(psi, *m).real
    _ = acc
    return time.perf_counter() - t0


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--qubits", type=int, nargs="+",
                        default=[4, 6, 8, 10, 12])
    parser.add_argument("--layers", type=int, default=200)
    parser.add_argument("--pauli-reps", type=int, default=50)
    args = parser.parse_args()
    rng = np.random.default_rng(1)
    np_backend = get_backend("numpy")
    try:
        cy_backend = get_backend("cython")
    except ImportError:
        print("compiled backend unavailable; build with pip install -e .")
        return
    print(f"{'n':>3} {'circuit numpy':>14} {'circuit cython':>15} "
          f"{'speedup':>8} | {'pauli numpy':>12} {'pauli cython':>13} "
          f"{'speedup':>8}")
    for n in args.qubits:
        tc_np = bench_circuit(np_backend, n, args.layers, rng)
        tc_cy = bench_circuit(cy_backend, n, args.layers, rng)
        tp_np = bench_pauli(np_backend, n, args.pauli_reps, rng)
        tp_cy = bench_pauli(cy_backend, n, args.pauli_reps, rng)
        print(f"{n:>3} {tc_np:>12.4f}s {tc_cy:>13.4f}s "
              f"{tc_np / tc_cy:>7.2f}x | {tp_np:>10.4f}s {tp_cy:>11.4f}s "
              f"{tp_np / tp_cy:>7.2f}x")


if __name__ == "__main__":
    main()
