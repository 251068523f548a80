"""Quantum simulation of molecules in intrinsic-atomic-orbital active spaces.

Pipeline: integral bundles -> IAO construction -> folded active-space
Hamiltonians -> Jordan-Wigner / pair-encoded qubit operators -> ground-
and excited-state solvers (VQE, QITE, qEOM, VQSE) on a built-in noisy
simulator, all validated against exact diagonalization.
"""

from .kernels import backend_name

__version__ = "0.1.0"

__all__ = ["backend_name", "__version__"]
