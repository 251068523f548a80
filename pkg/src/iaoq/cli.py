"""Command-line surface for the simulation pipeline.

Subcommands: iao-build, fold, run, scan, rdm, analyze-fit,
mitigate-demo.  Every run writes ``manifest.json`` first (config echo,
package versions, seeds, wall time) so partial failures stay
diagnosable; result files (CSV/JSON) are byte-deterministic for a given
config and seed.  Exit codes: 0 ok, 2 config error, 3 numerical
failure, 4 I/O error.

Configs come from flags or from ``--config`` files in JSON or a flat
TOML subset (tables, scalar/array values); flags win over file values.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time

import numpy as np

from . import __version__, analysis, bundle as bundle_mod, iao as iao_mod
from . import orbitals as orb_mod
from .fci import FCIError, fci
from .pauli import JWEncoding, PairEncoding, PauliError, PauliSum
from .simulator import NoiseModel, QuantumState, SimulatorError, \
    build_calibration, mitigate, sample

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

_NUMERICAL_ERRORS = (FCIError, PauliError, SimulatorError, np.linalg.LinAlgError,
                     analysis.AnalysisError, orb_mod.OrbitalError)


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _parse_toml_subset(text: str) -> dict:
    """Flat TOML reader: [tables], key = scalar or [scalar, ...]."""
    out: dict = {}
    table = out
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            table = out.setdefault(name, {})
            continue
        m = re.match(r"([A-Za-z0-9_.-]+)\s*=\s*(.+)$", line)
        if not m:
            raise ConfigError([f"config line {lineno}: cannot parse {raw!r}"])
        table[m.group(1)] = _toml_value(m.group(2).strip(), lineno)
    return out


def _toml_value(token: str, lineno: int):
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        return [_toml_value(t.strip(), lineno)
                for t in inner.split(",") if t.strip()]
    if token in ("true", "false"):
        return token == "true"
    if (token.startswith('"') and token.endswith('"')) or \
            (token.startswith("'") and token.endswith("'")):
        return token[1:-1]
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ConfigError([f"config line {lineno}: bad value {token!r}"])


def load_config(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        return json.loads(text)
    if path.endswith(".toml"):
        return _parse_toml_subset(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return _parse_toml_subset(text)


def _make_run_dir(out: str) -> str:
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(out: str, config: dict, seeds: dict, t0: float,
                    outputs: list[str]) -> None:
    config = {k: v for k, v in config.items() if k not in ("func", "config")}
    manifest = {
        "config": config,
        "versions": {"iaoq": __version__, "numpy": np.__version__},
        "seeds": seeds,
        "wall_time_s": round(time.time() - t0, 3),
        "outputs": sorted(outputs),
    }
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True, default=str)


def _noise_from(args) -> NoiseModel | None:
    fields = {}
    for name in ("p01", "p10", "gamma", "dephasing", "depol2"):
        v = getattr(args, name.replace("-", "_"), None)
        if v:
            fields[name] = v
    return NoiseModel(**fields) if fields else None


def _validate(args) -> list[str]:
    problems = []
    shots = getattr(args, "shots", None)
    if shots is not None and shots > 0 and getattr(args, "seed", None) is None:
        problems.append("seed: mandatory when shots > 0")
    for attr in ("bundle", "grid", "hamiltonian", "fcidump", "curve"):
        path = getattr(args, attr, None)
        if path is not None and not os.path.exists(path):
            problems.append(f"{attr}: path {path!r} does not exist")
    return problems


def _load_problem(args):
    """Hamiltonian + metadata from --hamiltonian/--fcidump inputs."""
    if getattr(args, "hamiltonian", None):
        with open(args.hamiltonian) as fh:
            ham = PauliSum.from_text(fh.read())
        return ham, None
    if getattr(args, "fcidump", None):
        mo = bundle_mod.load_fcidump(args.fcidump)
        enc = _encoding_for(mo, args)
        return enc.hamiltonian(mo), mo
    raise ConfigError(["input: need --hamiltonian or --fcidump"])


def _encoding_for(mo, args):
    if getattr(args, "encoding", "auto") in ("pair",) or (
            getattr(args, "encoding", "auto") == "auto"
            and mo.n_orb == 2 and mo.n_elec == 2):
        return PairEncoding()
    return JWEncoding(mo.n_orb)


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_iao_build(args) -> int:
    t0 = time.time()
    b = bundle_mod.load_bundle(args.bundle)
    basis = iao_mod.build_iao(b)
    basis = iao_mod.lowdin_orthonormalize(basis, b.s1)
    if not args.no_localize:
        basis = iao_mod.boys_localize(basis, b.dipole, b.s1)
    residual = iao_mod.occupied_span_residual(basis, b.s1, b.c_occ)
    out = _make_run_dir(args.out)
    np.save(os.path.join(out, "iao_coeff.npy"), basis.coeff)
    report = {
        "n_iao": basis.n_iao,
        "occupied_span_residual": residual,
        "boys_history": basis.boys_history,
        "localized": basis.localized,
    }
    with open(os.path.join(out, "iao.json"), "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    _write_manifest(out, vars(args) | {"command": "iao-build"}, {}, t0,
                    ["iao_coeff.npy", "iao.json"])
    print(f"built {basis.n_iao} IAOs, occupied-span residual {residual:.3e}")
    return EXIT_OK


def _fold_bundle(b, orbitals: str, localize: bool, freeze_core: int,
                 active: str, active_electrons: int):
    """Shared bundle -> active-space MOIntegrals pipeline."""
    if orbitals == "mo":
        coeff = b.mo_coeff
    else:
        basis = iao_mod.lowdin_orthonormalize(iao_mod.build_iao(b), b.s1)
        if localize:
            basis = iao_mod.boys_localize(basis, b.dipole, b.s1)
        coeff = basis.coeff
    mo = orb_mod.ao2mo(b, coeff)
    c_occ_here = coeff.T @ b.s1 @ b.c_occ      # occupied MOs in this basis
    mo, _eps, _ = orb_mod.canonicalize(mo, c_occ_here)
    if freeze_core > 0:
        mo = orb_mod.freeze_core(mo, list(range(freeze_core)))
    if active != "full":
        mo, _space = orb_mod.make_active_space(
            mo, active, n_active_elec=active_electrons)
    return mo


def cmd_fold(args) -> int:
    """ao2mo + frozen core + active space, emitting FCIDUMP/Pauli text."""
    t0 = time.time()
    b = bundle_mod.load_bundle(args.bundle)
    mo = _fold_bundle(b, args.orbitals, not args.no_localize,
                      args.freeze_core, args.active, args.active_electrons)
    out = _make_run_dir(args.out)
    outputs = []
    write_fcidump_path = os.path.join(out, "folded.fcidump")
    bundle_mod.write_fcidump(mo, write_fcidump_path)
    outputs.append("folded.fcidump")
    if mo.n_orb == 2 and mo.n_elec == 2:
        ham = PairEncoding().hamiltonian(mo)
        with open(os.path.join(out, "hamiltonian_2q.txt"), "w") as fh:
            fh.write(ham.to_text())
        outputs.append("hamiltonian_2q.txt")
    _write_manifest(out, vars(args) | {"command": "fold"}, {}, t0, outputs)
    print(f"folded to {mo.n_orb} orbitals / {mo.n_elec} electrons "
          f"(e0 = {mo.e0:.10f})")
    return EXIT_OK


def cmd_run(args) -> int:
    t0 = time.time()
    ham, mo = _load_problem(args)
    shots = args.shots if args.shots else None
    noise = _noise_from(args)
    calibration = None
    if args.mitigate:
        if noise is None or not noise.has_readout_noise:
            raise ConfigError(["mitigate: requires a readout noise model"])
        calibration = build_calibration(noise, ham.n_qubits,
                                        args.calibration_shots, args.seed)
    out = _make_run_dir(args.out)
    result: dict = {"method": args.method}
    if args.method == "fci":
        res = fci(ham)
        result["energies"] = [float(e) for e in res.energies]
        result["ground_energy"] = res.ground_energy
    elif args.method == "vqe":
        from . import vqe as vqe_mod
        spec = vqe_mod.AnsatzSpec(args.ansatz, ham.n_qubits,
                                  reference=args.reference, depth=args.depth)
        if args.optimizer == "exact":
            r = vqe_mod.minimize_exact(spec, ham)
        else:
            r = vqe_mod.gradient_descent(spec, ham, max_iter=args.max_iter,
                                         tol=args.tol, shots=shots,
                                         seed=args.seed, noise=noise,
                                         calibration=calibration)
        with open(os.path.join(out, "vqe.json"), "w") as fh:
            fh.write(r.to_json())
        result["ground_energy"] = r.energy
        result["converged"] = r.converged
    elif args.method == "qite":
        from . import qite as qite_mod
        config = qite_mod.QiteConfig(dtau=args.dtau, beta_total=args.beta)
        initial = QuantumState.from_bits(ham.n_qubits, args.reference)
        r = qite_mod.qite_run(ham, initial, config, shots=shots,
                              seed=args.seed, noise=noise,
                              calibration=calibration)
        with open(os.path.join(out, "qite.csv"), "w") as fh:
            fh.write(r.to_csv())
        result["ground_energy"] = r.final_energy
        result["warnings"] = r.warnings
    elif args.method == "qeom":
        from . import qeom as qeom_mod
        if mo is None:
            raise ConfigError(["qeom: needs --fcidump input for the reference"])
        enc = _encoding_for(mo, args)
        res = fci(ham)
        ground = QuantumState.from_statevector(res.statevector(0))
        energies, det_g = qeom_mod.excitation_energies(
            ground, ham, mo.n_occ, mo.n_orb, enc, shots=shots,
            seed=args.seed, noise=noise, calibration=calibration)
        result["excitation_energies"] = [float(e) for e in energies]
        result["metric_determinant"] = det_g
    elif args.method == "vqse":
        raise ConfigError(["vqse: use the scan command with a bundle grid"])
    else:
        raise ConfigError([f"method: unknown {args.method!r}"])
    with open(os.path.join(out, "result.json"), "w") as fh:
        json.dump(result, fh, indent=1, sort_keys=True)
    _write_manifest(out, vars(args) | {"command": "run"},
                    {"seed": args.seed}, t0,
                    [f for f in os.listdir(out) if f != "manifest.json"])
    print(json.dumps(result, indent=1, sort_keys=True))
    return EXIT_OK


def _vqse_scan(grid, args, out: str) -> int:
    """Subspace-expansion scan over a bundle grid (IAO active space)."""
    from .fci import fci_two_electron
    from .orbitals import _take_orbitals, complete_basis
    from .pauli import PairEncoding
    from .vqse import lowest_energy, problem_from_integrals, sample_statistics
    rs, es, sigmas, refs = [], [], [], []
    for r, b in grid:
        if not isinstance(b, bundle_mod.IntegralBundle):
            raise ConfigError(["vqse: needs a bundle grid"])
        basis = iao_mod.boys_localize(
            iao_mod.lowdin_orthonormalize(iao_mod.build_iao(b), b.s1),
            b.dipole, b.s1)
        full_c = complete_basis(basis.coeff, b.s1)
        mo_full = orb_mod.ao2mo(b, full_c)
        mo_act = _take_orbitals(mo_full, [0, 1])
        enc = PairEncoding()
        ham2 = enc.hamiltonian(mo_act)
        w, v = np.linalg.eigh(ham2.to_matrix())
        ground = QuantumState(2, vec=v[:, 0].astype(complex))
        shots = args.shots if args.shots else None
        if shots is None:
            rdms = analysis.measure_rdms(ground, 2, enc)
            es.append(lowest_energy(problem_from_integrals(
                mo_full, 2, rdms.rdm1["up"], rdms.rdm2[("up", "down")])))
            sigmas.append(0.0)
        else:
            def build(k, g=ground, mf=mo_full, e=enc):
                rd = analysis.measure_rdms(g, 2, e, shots=shots,
                                           seed=args.seed + 31 * k,
                                           noise=_noise_from(args))
                return problem_from_integrals(mf, 2, rd.rdm1["up"],
                                              rd.rdm2[("up", "down")])
            mean, err = sample_statistics(build, n_repeats=args.repeats,
                                          shots=shots)
            es.append(mean)
            sigmas.append(err)
        rs.append(r)
        refs.append(fci_two_electron(mo_full).ground_energy)
    curve = analysis.PESCurve(rs, es, sigmas, label="vqse")
    with open(os.path.join(out, "curve.csv"), "w") as fh:
        fh.write(curve.to_csv())
    ref_curve = analysis.PESCurve(rs, refs, label="fci-full")
    with open(os.path.join(out, "reference.csv"), "w") as fh:
        fh.write(ref_curve.to_csv())
    return EXIT_OK


def _qeom_scan(grid, args, out: str) -> int:
    entries = []
    n_occ = n_orb = None
    for r, payload in grid:
        if isinstance(payload, orb_mod.MOIntegrals):
            enc = _encoding_for(payload, args)
            n_occ, n_orb = payload.n_occ, payload.n_orb
            entries.append((r, enc.hamiltonian(payload)))
        else:
            enc = PairEncoding() if payload.n_qubits == 2 \
                else JWEncoding(payload.n_qubits // 2)
            n_occ, n_orb = 1, 2
            entries.append((r, payload))
    from .pauli import PairEncoding as _PE
    curves, det_curve = analysis.qeom_scan(
        entries, n_occ, n_orb,
        _PE() if entries[0][1].n_qubits == 2 else enc,
        shots=args.shots if args.shots else None, seed=args.seed,
        noise=_noise_from(args))
    for k, c in enumerate(curves):
        with open(os.path.join(out, f"excited_{k + 1}.csv"), "w") as fh:
            fh.write(c.to_csv())
    with open(os.path.join(out, "metric_determinant.csv"), "w") as fh:
        fh.write(det_curve.to_csv())
    return EXIT_OK


def cmd_scan(args) -> int:
    t0 = time.time()
    grid = bundle_mod.load_grid(args.grid)
    if args.method in ("vqse", "qeom"):
        out = _make_run_dir(args.out)
        rc = (_vqse_scan if args.method == "vqse" else _qeom_scan)(
            grid, args, out)
        _write_manifest(out, vars(args) | {"command": "scan"},
                        {"seed": args.seed}, t0,
                        [f for f in os.listdir(out) if f != "manifest.json"])
        print(f"scanned {len(grid)} geometries with {args.method}")
        return rc
    entries = []
    for r, payload in grid:
        if isinstance(payload, bundle_mod.IntegralBundle):
            payload = _fold_bundle(payload, args.orbitals,
                                   not args.no_localize, args.freeze_core,
                                   args.active, args.active_electrons)
        if isinstance(payload, PauliSum):
            entries.append((r, payload))
        elif isinstance(payload, orb_mod.MOIntegrals):
            entries.append((r, _encoding_for(payload, args).hamiltonian(payload)))
        else:
            raise ConfigError([f"scan: cannot handle grid payload "
                               f"{type(payload).__name__}"])
    options = {"ansatz": args.ansatz, "depth": args.depth,
               "max_iter": args.max_iter, "tol": args.tol,
               "reference": args.reference}
    if args.shots:
        options |= {"shots": args.shots, "seed": args.seed,
                    "noise": _noise_from(args)}
        if args.mitigate:
            noise = options["noise"]
            if noise is None or not noise.has_readout_noise:
                raise ConfigError(["mitigate: requires a readout noise model"])
            options["calibration"] = build_calibration(
                noise, entries[0][1].n_qubits, args.calibration_shots,
                args.seed)
    if args.method == "qite":
        from . import qite as qite_mod
        options["config"] = qite_mod.QiteConfig(dtau=args.dtau,
                                                beta_total=args.beta)
    curve = analysis.scan(entries, args.method, options)
    out = _make_run_dir(args.out)
    with open(os.path.join(out, "curve.csv"), "w") as fh:
        fh.write(curve.to_csv())
    _write_manifest(out, vars(args) | {"command": "scan"},
                    {"seed": args.seed}, t0, ["curve.csv"])
    print(f"scanned {len(curve.rs)} geometries with {args.method}")
    return EXIT_OK


def cmd_rdm(args) -> int:
    t0 = time.time()
    ham, mo = _load_problem(args)
    res = fci(ham)
    ground = QuantumState.from_statevector(res.statevector(0))
    n_orb = mo.n_orb if mo is not None else ham.n_qubits // 2
    enc = _encoding_for(mo, args) if mo is not None else JWEncoding(n_orb)
    if isinstance(enc, PairEncoding):
        n_orb = 2
    shots = args.shots if args.shots else None
    rdms = analysis.measure_rdms(ground, n_orb, enc, shots=shots,
                                 seed=args.seed, noise=_noise_from(args))
    out = _make_run_dir(args.out)
    payload = {
        "rdm1_up": rdms.rdm1["up"].tolist(),
        "rdm1_down": rdms.rdm1["down"].tolist(),
        "rdm2_ud": rdms.rdm2[("up", "down")].tolist(),
        "hermiticity_defect": rdms.hermiticity_defect,
    }
    if mo is not None:
        payload["energy_from_rdms"] = analysis.energy_from_rdms(rdms, mo)
    with open(os.path.join(out, "rdms.json"), "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    _write_manifest(out, vars(args) | {"command": "rdm"},
                    {"seed": args.seed}, t0, ["rdms.json"])
    print(f"one-body spectrum (up): "
          f"{np.round(np.linalg.eigvalsh(rdms.rdm1['up']), 6).tolist()}")
    return EXIT_OK


def cmd_analyze_fit(args) -> int:
    with open(args.curve) as fh:
        curve = analysis.PESCurve.from_csv(fh.read())
    fit = analysis.fit_equilibrium(curve, model=args.model)
    result = {"r_eq": fit.r_eq, "e_min": fit.e_min, "binding": fit.binding,
              "model": fit.model}
    if args.out:
        out = _make_run_dir(args.out)
        with open(os.path.join(out, "fit.json"), "w") as fh:
            json.dump(result, fh, indent=1, sort_keys=True)
    print(json.dumps(result, indent=1, sort_keys=True))
    return EXIT_OK


def cmd_mitigate_demo(args) -> int:
    """Readout-error mitigation on a Bell state, before/after report."""
    noise = NoiseModel(p01=args.p01, p10=args.p10)
    from .simulator import Circuit, run
    state = run(Circuit(2).h(0).cnot(0, 1), QuantumState.zero(2))
    counts = sample(state, None, args.shots, args.seed, noise)
    calib = build_calibration(noise, 2, args.calibration_shots, args.seed)
    fixed = mitigate(counts, calib)
    report = {
        "raw_zz": counts.z_expectation((0, 1)),
        "mitigated_zz": fixed.z_expectation((0, 1)),
        "ideal_zz": 1.0,
    }
    print(json.dumps(report, indent=1, sort_keys=True))
    return EXIT_OK


# ----------------------------------------------------------------------
# argument plumbing
# ----------------------------------------------------------------------

def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--hamiltonian", help="PauliSum text fixture")
    p.add_argument("--fcidump", help="FCIDUMP input")
    p.add_argument("--encoding", default="auto", choices=["auto", "pair", "jw"])
    p.add_argument("--shots", type=int, default=0,
                   help="0 means the exact expectation path")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reference", type=int, default=0,
                   help="occupancy bit pattern of the reference state")
    p.add_argument("--p01", type=float, default=0.0)
    p.add_argument("--p10", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--dephasing", type=float, default=0.0)
    p.add_argument("--depol2", type=float, default=0.0)
    p.add_argument("--mitigate", action="store_true")
    p.add_argument("--calibration-shots", type=int, default=200_000)
    p.add_argument("--ansatz", default="so4", choices=["ry", "so4", "quccsd"])
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--optimizer", default="gd", choices=["gd", "exact"])
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--dtau", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=7.0)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="iaoq",
        description="Molecular quantum simulation in IAO active spaces")
    parser.add_argument("--config", help="JSON or flat-TOML config file")
    sub = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    p = registry["iao-build"] = sub.add_parser(
        "iao-build", help="construct IAOs from a bundle")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-localize", action="store_true")
    p.set_defaults(func=cmd_iao_build)

    p = registry["fold"] = sub.add_parser(
        "fold", help="ao2mo, frozen core and active space")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--orbitals", default="iao", choices=["mo", "iao"])
    p.add_argument("--no-localize", action="store_true")
    p.add_argument("--freeze-core", type=int, default=0)
    p.add_argument("--active", default="full")
    p.add_argument("--active-electrons", type=int, default=2)
    p.set_defaults(func=cmd_fold)

    p = registry["run"] = sub.add_parser(
        "run", help="single-geometry solver run")
    p.add_argument("--method", required=True,
                   choices=["fci", "vqe", "qite", "qeom", "vqse"])
    p.add_argument("--out", required=True)
    _add_common_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = registry["scan"] = sub.add_parser(
        "scan", help="dissociation-grid scan")
    p.add_argument("--grid", required=True)
    p.add_argument("--orbitals", default="mo", choices=["mo", "iao"])
    p.add_argument("--no-localize", action="store_true")
    p.add_argument("--freeze-core", type=int, default=0)
    p.add_argument("--active", default="full")
    p.add_argument("--active-electrons", type=int, default=2)
    p.add_argument("--method", required=True,
                   choices=["fci", "vqe", "qite", "qeom", "vqse"])
    p.add_argument("--out", required=True)
    _add_common_run_flags(p)
    p.set_defaults(func=cmd_scan)

    p = registry["rdm"] = sub.add_parser(
        "rdm", help="measure density matrices")
    p.add_argument("--out", required=True)
    _add_common_run_flags(p)
    p.set_defaults(func=cmd_rdm)

    p = registry["analyze-fit"] = sub.add_parser(
        "analyze-fit", help="equilibrium fit of a curve CSV")
    p.add_argument("--curve", required=True)
    p.add_argument("--model", default="quartic", choices=["quartic", "morse"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze_fit)

    p = registry["mitigate-demo"] = sub.add_parser(
        "mitigate-demo", help="readout mitigation demo")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--p01", type=float, default=0.05)
    p.add_argument("--p10", type=float, default=0.03)
    p.add_argument("--calibration-shots", type=int, default=200_000)
    p.set_defaults(func=cmd_mitigate_demo)
    return parser, registry


def main(argv: list[str] | None = None) -> int:
    parser, registry = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            file_values = load_config(args.config)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except ConfigError as exc:
            for problem in exc.problems:
                print(f"config error: {problem}", file=sys.stderr)
            return EXIT_CONFIG
        flat: dict = {}
        for key, val in file_values.items():
            if isinstance(val, dict):
                flat.update({k.replace("-", "_"): v for k, v in val.items()})
            else:
                flat[key.replace("-", "_")] = val
        # config supplies values still sitting at their subcommand default;
        # explicit flags always win
        defaults = {a.dest: a.default
                    for a in registry[args.command]._actions}
        for key, val in flat.items():
            if key in defaults and getattr(args, key) == defaults[key]:
                setattr(args, key, val)
    problems = _validate(args)
    if problems:
        for problem in problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except bundle_mod.BundleError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
