"""Property measurement and potential-energy-surface analysis.

Density matrices follow the index convention rho^(s)_{pr} = <adag_ps
a_rs> and rho^(st)_{prqs} = <adag_ps adag_qt a_st a_rs>, assembled from
products of the encoding's excitation operators; spin-squared, purity
and reference-state fidelity diagnose the wavefunction; scans collect
per-geometry energies into curves from which equilibrium bondlengths
and binding energies are extracted by a local quartic fit.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .orbitals import MOIntegrals
from .pauli import PauliSum
from .simulator import PauliEvaluator, QuantumState

SPINS = ("up", "down")


class AnalysisError(ValueError):
    pass


@dataclass
class RDMPair:
    """Spin-resolved one- and two-body density matrices."""

    rdm1: dict                      # spin -> (n, n)
    rdm2: dict                      # (spin, spin) -> (n, n, n, n)
    hermiticity_defect: float = 0.0

    @property
    def n_orb(self) -> int:
        return self.rdm1["up"].shape[0]

    def spin_summed_1(self) -> np.ndarray:
        return self.rdm1["up"] + self.rdm1["down"]

    def spin_summed_2(self) -> np.ndarray:
        out = None
        for key, block in self.rdm2.items():
            out = block.copy() if out is None else out + block
        return out

    def validate(self, n_up: float, n_down: float, tol: float = 1e-8) -> None:
        for spin, want in (("up", n_up), ("down", n_down)):
            m = self.rdm1[spin]
            if np.abs(m - m.conj().T).max() > tol:
                raise AnalysisError(f"rdm1[{spin}] is not Hermitian")
            if abs(np.trace(m).real - want) > tol:
                raise AnalysisError(f"Tr rdm1[{spin}] != {want}")


def measure_rdms(state: QuantumState, n_orb: int, encoding,
                 shots: int | None = None, seed: int | None = None,
                 noise=None, calibration=None) -> RDMPair:
    """Assemble the density matrices from Pauli expectations.

    Every element comes from products of the encoding's X^s_pr
    operators; Hermiticity is enforced by averaging (M + M^dag)/2 with
    the largest asymmetry recorded.
    """
    ev = PauliEvaluator(state, shots, seed, noise, calibration, stream=(0xD,))
    xops = {(p, r, s): encoding.excitation(p, r, s)
            for p in range(n_orb) for r in range(n_orb) for s in SPINS}
    rdm1 = {}
    defect = 0.0
    for s in SPINS:
        m = np.zeros((n_orb, n_orb), dtype=complex)
        for p in range(n_orb):
            for r in range(n_orb):
                m[p, r] = ev.evaluate_sum(xops[(p, r, s)])
        defect = max(defect, float(np.abs(m - m.conj().T).max()))
        rdm1[s] = 0.5 * (m + m.conj().T).real
    rdm2 = {}
    for s in SPINS:
        for t in SPINS:
            block = np.zeros((n_orb,) * 4, dtype=complex)
            for p in range(n_orb):
                for r in range(n_orb):
                    for q in range(n_orb):
                        for u in range(n_orb):
                            op = xops[(p, r, s)] * xops[(q, u, t)]
                            if s == t and q == r:
                                op = op - xops[(p, u, s)]
                            block[p, r, q, u] = ev.evaluate_sum(
                                op.simplify(1e-14))
            sym = block.transpose(2, 3, 0, 1)       # (q,s | p,r) pair swap
            defect = max(defect, float(np.abs(block - sym.conj()).max())
                         if s == t else defect)
            rdm2[(s, t)] = 0.5 * (block + sym.conj()).real \
                if s == t else block.real
    return RDMPair(rdm1, rdm2, defect)


def energy_from_rdms(rdms: RDMPair, mo: MOIntegrals) -> float:
    """E = e0 + sum h rho1 + 1/2 sum (pr|qs) rho2 (spin-summed)."""
    d1 = rdms.spin_summed_1()
    d2 = rdms.spin_summed_2()
    g = mo.eri_dense()
    e = mo.e0 + float(np.einsum("pr,pr->", mo.h, d1))
    e += 0.5 * float(np.einsum("prqs,prqs->", g, d2))
    return e


def s_squared(state: QuantumState, encoding, shots: int | None = None,
              seed: int | None = None, noise=None, calibration=None) -> float:
    ev = PauliEvaluator(state, shots, seed, noise, calibration, stream=(0x5,))
    return float(ev.evaluate_sum(encoding.s_squared()).real)


def fidelity(state_or_rho, reference_bits: int, n_qubits: int) -> float:
    """<ref| rho |ref> against a computational reference pattern."""
    if isinstance(state_or_rho, QuantumState):
        rho = state_or_rho.density()
    else:
        rho = np.asarray(state_or_rho)
    val = float(rho[reference_bits, reference_bits].real)
    if not -1e-9 <= val <= 1 + 1e-9:
        raise AnalysisError(f"fidelity {val} outside [0, 1]")
    return min(max(val, 0.0), 1.0)


# ----------------------------------------------------------------------
# curves
# ----------------------------------------------------------------------

@dataclass
class PESCurve:
    rs: list[float]
    energies: list[float]
    sigmas: list[float] | None = None
    label: str = ""

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.rs, self.rs[1:])):
            raise AnalysisError("reaction coordinates must strictly increase")
        if len(self.rs) != len(self.energies):
            raise AnalysisError("curve lengths disagree")

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("r,energy,sigma\n")
        sig = self.sigmas or [0.0] * len(self.rs)
        for r, e, s in zip(self.rs, self.energies, sig):
            out.write(f"{r:.6f},{e:.12e},{s:.6e}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, label: str = "") -> "PESCurve":
        rs, es, sig = [], [], []
        for line in text.strip().splitlines()[1:]:
            r, e, s = line.split(",")
            rs.append(float(r))
            es.append(float(e))
            sig.append(float(s))
        return cls(rs, es, sig, label)


@dataclass
class FitResult:
    r_eq: float
    e_min: float
    binding: float          # quartic: E(largest grid R) - E_min; morse: D_e
    model: str = "quartic"


def fit_equilibrium(curve: PESCurve, model: str = "quartic") -> FitResult:
    """Equilibrium bondlength and binding energy of a dissociation curve.

    ``quartic`` (default): polynomial fit through the 5 points around
    the discrete minimum; binding is grid-relative, E at the largest
    grid point minus the fitted minimum.  ``morse``: least-squares Morse
    curve over the whole grid, returning the Morse R_e and well depth
    D_e; this is the convention behind the published dissociation
    tables, whose parenthetical digits are regression uncertainties.
    """
    if model == "morse":
        return _fit_morse(curve)
    if model != "quartic":
        raise AnalysisError(f"unknown fit model {model!r}")
    rs = np.asarray(curve.rs)
    es = np.asarray(curve.energies)
    if len(rs) < 5:
        raise AnalysisError("need at least 5 points to fit")
    k = int(np.argmin(es))
    if k == 0 or k == len(rs) - 1:
        raise AnalysisError("no interior minimum on the grid")
    lo = min(max(k - 2, 0), len(rs) - 5)
    window = slice(lo, lo + 5)
    coeffs = np.polynomial.polynomial.polyfit(rs[window], es[window], deg=4)
    deriv = np.polynomial.polynomial.polyder(coeffs)
    roots = np.polynomial.polynomial.polyroots(deriv)
    lo_r, hi_r = rs[window][0], rs[window][-1]
    cands = [r.real for r in roots
             if abs(r.imag) < 1e-9 and lo_r - 1e-12 <= r.real <= hi_r + 1e-12]
    if not cands:
        raise AnalysisError("quartic fit found no interior stationary point")
    vals = [np.polynomial.polynomial.polyval(r, coeffs) for r in cands]
    best = int(np.argmin(vals))
    r_eq, e_min = float(cands[best]), float(vals[best])
    return FitResult(r_eq, e_min, float(es[-1] - e_min))


def _fit_morse(curve: PESCurve) -> FitResult:
    from scipy.optimize import curve_fit
    rs = np.asarray(curve.rs)
    es = np.asarray(curve.energies)
    if len(rs) < 5:
        raise AnalysisError("need at least 5 points to fit")
    k = int(np.argmin(es))
    if k == 0 or k == len(rs) - 1:
        raise AnalysisError("no interior minimum on the grid")

    def morse(r, d_e, a, r_e, e0):
        return e0 + d_e * (1.0 - np.exp(-a * (r - r_e))) ** 2

    p0 = (float(es[-1] - es[k]), 1.5, float(rs[k]), float(es[k]))
    popt, _ = curve_fit(morse, rs, es, p0=p0, maxfev=50000)
    d_e, _, r_e, e0 = (float(x) for x in popt)
    if not rs[0] <= r_e <= rs[-1]:
        raise AnalysisError("Morse minimum fell outside the grid")
    return FitResult(r_e, e0, d_e, model="morse")


def mean_deviation(curve_a: PESCurve, curve_b: PESCurve) -> float:
    """Mean absolute pointwise deviation on the common grid."""
    common = sorted(set(curve_a.rs) & set(curve_b.rs))
    if not common:
        raise AnalysisError("curves share no grid points")
    ea = dict(zip(curve_a.rs, curve_a.energies))
    eb = dict(zip(curve_b.rs, curve_b.energies))
    return float(np.mean([abs(ea[r] - eb[r]) for r in common]))


# ----------------------------------------------------------------------
# scans
# ----------------------------------------------------------------------

def scan(entries: list[tuple[float, PauliSum]], method: str,
         options: dict | None = None) -> PESCurve:
    """Per-geometry ground-state energies over 2-qubit pair Hamiltonians.

    ``entries`` holds (R, PauliSum) pairs; ``method`` is one of fci,
    vqe, qite.  Richer pipelines (bundle ingestion, VQSE) are wired in
    the command-line layer, which shares fixture Hamiltonians with this
    function.
    """
    options = dict(options or {})
    rs, es = [], []
    for k, (r, ham) in enumerate(entries):
        rs.append(r)
        es.append(_scan_point(ham, method, options, k))
    return PESCurve(rs, es, label=method)


def qeom_scan(entries: list[tuple[float, PauliSum]], n_occ: int, n_orb: int,
              encoding, shots: int | None = None, seed: int | None = None,
              noise=None, calibration=None
              ) -> tuple[list[PESCurve], PESCurve]:
    """Excited-state curves plus the metric-determinant diagnostic.

    Ground states come from exact diagonalization of each entry; the
    returned excitation curves are absolute energies E_0 + dE_I, one
    curve per excited state, with det(G) as a separate curve.
    """
    from .fci import fci
    from .qeom import excitation_energies
    rs: list[float] = []
    levels: list[list[float]] = []
    dets: list[float] = []
    for k, (r, ham) in enumerate(entries):
        res = fci(ham)
        ground = QuantumState(ham.n_qubits, vec=res.statevector(0))
        energies, det_g = excitation_energies(
            ground, ham, n_occ, n_orb, encoding, shots=shots,
            seed=None if seed is None else seed + k, noise=noise,
            calibration=calibration)
        rs.append(r)
        levels.append([res.ground_energy + float(x) for x in energies])
        dets.append(det_g)
    n_levels = min(len(v) for v in levels)
    curves = [PESCurve(rs, [lv[i] for lv in levels], label=f"excited-{i + 1}")
              for i in range(n_levels)]
    det_curve = PESCurve(rs, dets, label="metric-determinant")
    return curves, det_curve


def _scan_point(ham: PauliSum, method: str, options: dict, k: int) -> float:
    from . import qite as qite_mod
    from . import vqe as vqe_mod
    from .fci import fci

    if method == "fci":
        return fci(ham).ground_energy
    if method == "vqe":
        spec = vqe_mod.AnsatzSpec(
            options.get("ansatz", "so4"), ham.n_qubits,
            reference=options.get("reference", 0),
            depth=options.get("depth", 1))
        shots = options.get("shots")
        seed = None if shots is None else options.get("seed", 0) + k
        res = vqe_mod.gradient_descent(
            spec, ham, max_iter=options.get("max_iter", 200),
            tol=options.get("tol", 1e-10), shots=shots, seed=seed,
            noise=options.get("noise"), calibration=options.get("calibration"))
        return res.energy
    if method == "qite":
        config = options.get("config") or qite_mod.QiteConfig()
        shots = options.get("shots")
        seed = None if shots is None else options.get("seed", 0) + k
        initial = QuantumState.from_bits(ham.n_qubits,
                                         options.get("reference", 0))
        res = qite_mod.qite_run(ham, initial, config, shots=shots, seed=seed,
                                noise=options.get("noise"),
                                calibration=options.get("calibration"))
        return res.final_energy
    raise AnalysisError(f"unknown scan method {method!r}")
