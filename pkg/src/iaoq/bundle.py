"""Integral bundles: the on-disk input of the whole pipeline.

A bundle is a directory holding ``manifest.json`` plus little-endian
float64 blobs, one per matrix, each checksummed.  The manifest carries
dimensions and geometry metadata; every load re-verifies the checksums
and the physical invariants (overlap positivity, MO orthonormality,
packed ERI layout), so no partially constructed bundle escapes.

FCIDUMP files (Knowles-Handy layout) are the interchange format for
folded Hamiltonians: a namelist header, then ``value p q r s`` records,
1-based, chemists' notation, zero indices flagging one-body entries and
the core energy.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field

import numpy as np

from . import eri as eri_mod
from .orbitals import MOIntegrals
from .pauli import PauliSum

MANIFEST = "manifest.json"
FORMAT_TAG = "iaoq-bundle-v1"


class BundleError(ValueError):
    pass


@dataclass
class GeometryMeta:
    elements: list[str]
    coords: list[list[float]]          # Angstrom
    reaction_coordinate: float | None = None
    basis_b1: str = ""
    basis_b2: str = ""

    def to_dict(self) -> dict:
        return {
            "elements": self.elements,
            "coords_angstrom": self.coords,
            "reaction_coordinate": self.reaction_coordinate,
            "basis_b1": self.basis_b1,
            "basis_b2": self.basis_b2,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeometryMeta":
        return cls(list(d.get("elements", [])),
                   [list(map(float, xyz)) for xyz in d.get("coords_angstrom", [])],
                   d.get("reaction_coordinate"),
                   d.get("basis_b1", ""), d.get("basis_b2", ""))


@dataclass
class IntegralBundle:
    n_b1: int
    n_b2: int
    s1: np.ndarray
    s12: np.ndarray
    s2: np.ndarray
    hcore: np.ndarray
    eri: np.ndarray                 # packed, canonical 8-fold compound index
    dipole: np.ndarray              # (3, n_b1, n_b1)
    mo_coeff: np.ndarray
    n_occ: int
    e_nuc: float
    meta: GeometryMeta = field(default_factory=lambda: GeometryMeta([], []))

    def validate(self) -> None:
        n1, n2 = self.n_b1, self.n_b2
        if n2 > n1:
            raise BundleError("n_b2: reference basis larger than B1")
        shapes = {
            "s1": (self.s1, (n1, n1)), "s12": (self.s12, (n1, n2)),
            "s2": (self.s2, (n2, n2)), "hcore": (self.hcore, (n1, n1)),
            "dipole": (self.dipole, (3, n1, n1)),
            "mo_coeff": (self.mo_coeff, None),
        }
        for name, (arr, want) in shapes.items():
            if want is not None and arr.shape != want:
                raise BundleError(f"{name}: expected shape {want}, got {arr.shape}")
        if self.mo_coeff.shape[0] != n1 or self.mo_coeff.shape[1] < self.n_occ:
            raise BundleError("mo_coeff: wrong leading dimension or too few columns")
        for name, arr in (("s1", self.s1), ("s2", self.s2),
                          ("hcore", self.hcore)):
            if np.abs(arr - arr.T).max() > 1e-10:
                raise BundleError(f"{name}: not symmetric")
        for name, arr in (("s1", self.s1), ("s2", self.s2)):
            if np.linalg.eigvalsh(arr).min() <= 1e-10:
                raise BundleError(f"{name}: overlap not positive definite")
        for d in range(3):
            if np.abs(self.dipole[d] - self.dipole[d].T).max() > 1e-10:
                raise BundleError("dipole: component not symmetric")
        if self.eri.shape != (eri_mod.packed_size(n1),):
            raise BundleError("eri: packed length inconsistent with n_b1")
        gram = self.mo_coeff.T @ self.s1 @ self.mo_coeff
        dev = np.abs(gram - np.eye(self.mo_coeff.shape[1])).max()
        if dev > 1e-8:
            raise BundleError(f"mo_coeff: not orthonormal under s1 (dev {dev:.2e})")

    def eri_dense(self) -> np.ndarray:
        return eri_mod.unpack(self.eri, self.n_b1)

    @property
    def c_occ(self) -> np.ndarray:
        return self.mo_coeff[:, :self.n_occ]


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def save_bundle(bundle: IntegralBundle, path: str) -> None:
    """Write manifest + blobs; the payload round-trips bit-exactly."""
    bundle.validate()
    os.makedirs(path, exist_ok=True)
    blobs = {
        "s1": bundle.s1, "s12": bundle.s12, "s2": bundle.s2,
        "hcore": bundle.hcore, "eri": bundle.eri, "dipole": bundle.dipole,
        "mo_coeff": bundle.mo_coeff,
    }
    manifest: dict = {
        "format": FORMAT_TAG,
        "n_b1": bundle.n_b1, "n_b2": bundle.n_b2,
        "n_occ": bundle.n_occ, "e_nuc": repr(float(bundle.e_nuc)),
        "meta": bundle.meta.to_dict(),
        "blobs": {},
    }
    for name, arr in blobs.items():
        data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        fname = f"{name}.bin"
        with open(os.path.join(path, fname), "wb") as fh:
            fh.write(data)
        manifest["blobs"][name] = {
            "file": fname, "shape": list(arr.shape), "sha256": _sha256(data),
        }
    with open(os.path.join(path, MANIFEST), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)


def load_bundle(path: str) -> IntegralBundle:
    """Load and fully validate a bundle; violations raise, never warn."""
    mpath = os.path.join(path, MANIFEST)
    if not os.path.exists(mpath):
        raise BundleError(f"no bundle manifest at {path}")
    with open(mpath) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != FORMAT_TAG:
        raise BundleError("format: unknown bundle format tag")
    for key in ("n_b1", "n_b2", "n_occ", "e_nuc", "blobs"):
        if key not in manifest:
            raise BundleError(f"{key}: missing manifest field")
    arrays = {}
    for name in ("s1", "s12", "s2", "hcore", "eri", "dipole", "mo_coeff"):
        if name not in manifest["blobs"]:
            raise BundleError(f"{name}: missing blob entry")
        entry = manifest["blobs"][name]
        bpath = os.path.join(path, entry["file"])
        with open(bpath, "rb") as fh:
            data = fh.read()
        if _sha256(data) != entry["sha256"]:
            raise BundleError(f"{name}: checksum mismatch")
        arr = np.frombuffer(data, dtype="<f8").reshape(entry["shape"])
        arrays[name] = arr.astype(np.float64, copy=True)
    bundle = IntegralBundle(
        n_b1=int(manifest["n_b1"]), n_b2=int(manifest["n_b2"]),
        s1=arrays["s1"], s12=arrays["s12"], s2=arrays["s2"],
        hcore=arrays["hcore"], eri=arrays["eri"], dipole=arrays["dipole"],
        mo_coeff=arrays["mo_coeff"], n_occ=int(manifest["n_occ"]),
        e_nuc=float(str(manifest["e_nuc"])),
        meta=GeometryMeta.from_dict(manifest.get("meta", {})),
    )
    bundle.validate()
    return bundle


# ----------------------------------------------------------------------
# FCIDUMP
# ----------------------------------------------------------------------

def write_fcidump(mo: MOIntegrals, path: str, ms2: int = 0) -> None:
    mo.validate()
    n = mo.n_orb
    lines = [f" &FCI NORB={n},NELEC={mo.n_elec},MS2={ms2},",
             "  ORBSYM=" + "1," * n,
             "  ISYM=1,",
             " &END"]
    g = mo.eri_dense()
    seen = set()
    for p in range(n):
        for r in range(p + 1):
            for q in range(n):
                for s in range(q + 1):
                    if (p, r) < (q, s):
                        continue
                    key = eri_mod.quartet_index(p, r, q, s)
                    if key in seen:
                        continue
                    seen.add(key)
                    v = g[p, r, q, s]
                    if v != 0.0:
                        lines.append(f"{float(v)!r} {p + 1} {r + 1} {q + 1} {s + 1}")
    for p in range(n):
        for q in range(p + 1):
            if mo.h[p, q] != 0.0:
                lines.append(f"{float(mo.h[p, q])!r} {p + 1} {q + 1} 0 0")
    lines.append(f"{float(mo.e0)!r} 0 0 0 0")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_fcidump(path: str) -> MOIntegrals:
    with open(path) as fh:
        text = fh.read()
    header_match = re.search(r"&FCI(.*?)(?:&END|/)", text, re.S | re.I)
    if not header_match:
        raise BundleError("FCIDUMP: malformed header namelist")
    header = header_match.group(1)

    def field_value(name):
        m = re.search(rf"{name}\s*=\s*(-?\d+)", header, re.I)
        if not m:
            raise BundleError(f"FCIDUMP: missing {name} in header")
        return int(m.group(1))

    n = field_value("NORB")
    n_elec = field_value("NELEC")
    body = text[header_match.end():]
    h = np.zeros((n, n))
    e0 = 0.0
    packed = np.zeros(eri_mod.packed_size(n))
    for raw in body.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise BundleError(f"FCIDUMP: malformed record {raw!r}")
        v = float(parts[0])
        p, q, r, s = (int(x) for x in parts[1:])
        for idx in (p, q, r, s):
            if idx < 0 or idx > n:
                raise BundleError(f"FCIDUMP: index {idx} out of range")
        if p == q == r == s == 0:
            e0 = v
        elif r == s == 0:
            h[p - 1, q - 1] = h[q - 1, p - 1] = v
        elif p == 0 or q == 0:
            raise BundleError(f"FCIDUMP: malformed record {raw!r}")
        else:
            packed[eri_mod.quartet_index(p - 1, q - 1, r - 1, s - 1)] = v
    out = MOIntegrals(e0, h, packed, n, n_elec)
    out.validate()
    return out


# ----------------------------------------------------------------------
# dissociation grids
# ----------------------------------------------------------------------

@dataclass
class PESGrid:
    """Ordered (R, payload) entries, strictly increasing in R."""

    entries: list[tuple[float, object]]
    kind: str = ""                   # bundle | fcidump | pauli
    basis: str = ""
    n_elec: int | None = None

    def __post_init__(self):
        rs = [r for r, _ in self.entries]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise BundleError("grid reaction coordinates must strictly increase")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def rs(self) -> list[float]:
        return [r for r, _ in self.entries]


def load_grid(path: str) -> PESGrid:
    """Read a grid manifest (grid.json) and its per-geometry payloads."""
    gpath = os.path.join(path, "grid.json")
    if not os.path.exists(gpath):
        raise BundleError(f"no grid manifest at {path}")
    with open(gpath) as fh:
        spec = json.load(fh)
    kind = spec.get("kind", "")
    entries = []
    for ent in spec.get("entries", []):
        r = float(ent["r"])
        ppath = os.path.join(path, ent["path"])
        if kind == "bundle":
            payload = load_bundle(ppath)
        elif kind == "fcidump":
            payload = load_fcidump(ppath)
        elif kind == "pauli":
            with open(ppath) as fh:
                payload = PauliSum.from_text(fh.read())
        else:
            raise BundleError(f"grid kind {kind!r} unknown")
        entries.append((r, payload))
    return PESGrid(entries, kind, spec.get("basis", ""), spec.get("n_elec"))


def save_grid_manifest(path: str, kind: str, entries: list[tuple[float, str]],
                       basis: str = "", n_elec: int | None = None) -> None:
    os.makedirs(path, exist_ok=True)
    data = {
        "kind": kind, "basis": basis, "n_elec": n_elec,
        "entries": [{"r": r, "path": rel} for r, rel in entries],
    }
    with open(os.path.join(path, "grid.json"), "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
