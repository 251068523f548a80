import numpy as np
import pytest

from iaoq import eri as eri_mod
from iaoq.bundle import (BundleError, GeometryMeta, IntegralBundle, PESGrid,
                         load_bundle, load_fcidump, save_bundle,
                         save_grid_manifest, load_grid, write_fcidump)
from iaoq.iao import (IAOError, boys_localize, build_iao,
                      lowdin_orthonormalize, occupied_span_residual,
                      span_projector)
from iaoq.orbitals import MOIntegrals, ao2mo
from iaoq.fci import fci

RNG = np.random.default_rng(8833)


def synthetic_bundle(n_b1=4, n_b2=2, n_occ=1, seed=0, b2_cols=None):
    """Fake AO system: SPD overlap, B2 = chosen combinations of B1."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n_b1, n_b1))
    s1 = a @ a.T + n_b1 * np.eye(n_b1)
    s1 /= np.linalg.norm(s1) / n_b1
    if b2_cols is None:
        t = rng.normal(size=(n_b1, n_b2))
    else:
        t = np.zeros((n_b1, n_b2))
        for k, col in enumerate(b2_cols):
            t[col, k] = 1.0
    s12 = s1 @ t
    s2 = t.T @ s1 @ t
    hcore = _sym(rng.normal(size=(n_b1, n_b1)))
    g = rng.normal(size=(n_b1,) * 4) * 0.1
    g = g + g.transpose(1, 0, 2, 3)
    g = g + g.transpose(0, 1, 3, 2)
    g = g + g.transpose(2, 3, 0, 1)
    dip = np.stack([_sym(rng.normal(size=(n_b1, n_b1))) for _ in range(3)])
    # s1-orthonormal molecular orbitals
    evals, evecs = np.linalg.eigh(s1)
    s1_inv_half = evecs @ np.diag(evals ** -0.5) @ evecs.T
    q, _ = np.linalg.qr(rng.normal(size=(n_b1, n_b1)))
    mo = s1_inv_half @ q
    return IntegralBundle(
        n_b1=n_b1, n_b2=n_b2, s1=s1, s12=s12, s2=s2, hcore=hcore,
        eri=eri_mod.pack(g, tol=1e-12), dipole=dip, mo_coeff=mo,
        n_occ=n_occ, e_nuc=0.5,
        meta=GeometryMeta(["H", "H"], [[0, 0, 0], [0, 0, 0.7]], 0.7,
                          "test-b1", "test-b2"))


def _sym(m):
    return 0.5 * (m + m.T)


def converge_scf(bundle, iters=400, damp=0.5):
    """Tiny damped RHF on a synthetic bundle; rewrites mo_coeff in place."""
    import scipy.linalg
    g = bundle.eri_dense()
    n_occ = bundle.n_occ
    c = bundle.mo_coeff
    dm = 2.0 * c[:, :n_occ] @ c[:, :n_occ].T
    for _ in range(iters):
        f = bundle.hcore + np.einsum("pqrs,rs->pq", g, dm) \
            - 0.5 * np.einsum("psrq,rs->pq", g, dm)
        _, c = scipy.linalg.eigh(f, bundle.s1)
        dm = (1 - damp) * dm + damp * (2.0 * c[:, :n_occ] @ c[:, :n_occ].T)
    f = bundle.hcore + np.einsum("pqrs,rs->pq", g, dm) \
        - 0.5 * np.einsum("psrq,rs->pq", g, dm)
    assert np.abs(f @ dm @ bundle.s1 - bundle.s1 @ dm @ f).max() < 1e-9, \
        "synthetic SCF did not converge"
    _, c = scipy.linalg.eigh(f, bundle.s1)
    bundle.mo_coeff = c
    return bundle


class TestBundleIO:
    def test_roundtrip_bit_exact(self, tmp_path):
        b = synthetic_bundle(seed=1)
        save_bundle(b, str(tmp_path / "b"))
        back = load_bundle(str(tmp_path / "b"))
        for name in ("s1", "s12", "s2", "hcore", "eri", "dipole", "mo_coeff"):
            assert np.array_equal(getattr(b, name), getattr(back, name)), name
        assert back.e_nuc == b.e_nuc
        assert back.meta.basis_b1 == "test-b1"

    def test_non_positive_definite_overlap_rejected(self, tmp_path):
        b = synthetic_bundle(seed=2)
        b.s1 = b.s1 - np.linalg.eigvalsh(b.s1).max() * np.eye(b.n_b1)
        with pytest.raises(BundleError, match="positive definite"):
            b.validate()

    def test_non_orthonormal_mos_rejected(self):
        b = synthetic_bundle(seed=3)
        b.mo_coeff = b.mo_coeff * 1.01
        with pytest.raises(BundleError, match="orthonormal"):
            b.validate()

    def test_checksum_corruption_detected(self, tmp_path):
        b = synthetic_bundle(seed=4)
        save_bundle(b, str(tmp_path / "b"))
        blob = tmp_path / "b" / "hcore.bin"
        data = bytearray(blob.read_bytes())
        data[3] ^= 0xFF
        blob.write_bytes(bytes(data))
        with pytest.raises(BundleError, match="checksum"):
            load_bundle(str(tmp_path / "b"))

    def test_minimal_hydrogen_like_bundle(self, tmp_path):
        one = IntegralBundle(
            n_b1=1, n_b2=1, s1=np.eye(1), s12=np.eye(1), s2=np.eye(1),
            hcore=np.array([[-0.5]]), eri=np.array([0.625]),
            dipole=np.zeros((3, 1, 1)), mo_coeff=np.eye(1), n_occ=1,
            e_nuc=0.0)
        save_bundle(one, str(tmp_path / "h"))
        back = load_bundle(str(tmp_path / "h"))
        assert back.n_b1 == 1 and back.hcore[0, 0] == -0.5


class TestFCIDump:
    def test_minimal_echo(self, tmp_path):
        mo = MOIntegrals.from_dense(0.0, np.array([[-0.5]]),
                                    np.full((1, 1, 1, 1), 0.625), 2)
        p = tmp_path / "one.fcidump"
        write_fcidump(mo, str(p))
        back = load_fcidump(str(p))
        assert back.h[0, 0] == -0.5
        assert back.eri_dense()[0, 0, 0, 0] == 0.625
        assert back.e0 == 0.0

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_roundtrip_bit_identical(self, n, tmp_path):
        rng = np.random.default_rng(n)
        h = _sym(rng.normal(size=(n, n)))
        g = rng.normal(size=(n,) * 4)
        g = g + g.transpose(1, 0, 2, 3)
        g = g + g.transpose(0, 1, 3, 2)
        g = g + g.transpose(2, 3, 0, 1)
        mo = MOIntegrals.from_dense(rng.normal(), h, g, 2)
        p = tmp_path / "x.fcidump"
        write_fcidump(mo, str(p))
        back = load_fcidump(str(p))
        assert back.e0 == mo.e0
        assert np.array_equal(back.h, mo.h)
        assert np.array_equal(back.eri, mo.eri)

    def test_malformed_header(self, tmp_path):
        p = tmp_path / "bad.fcidump"
        p.write_text("NOT A HEADER\n1.0 1 1 0 0\n")
        with pytest.raises(BundleError, match="header"):
            load_fcidump(str(p))

    def test_index_out_of_range(self, tmp_path):
        p = tmp_path / "bad2.fcidump"
        p.write_text(" &FCI NORB=1,NELEC=2,MS2=0, &END\n1.0 2 1 1 1\n")
        with pytest.raises(BundleError, match="range"):
            load_fcidump(str(p))


class TestGrid:
    def test_grid_monotone_required(self):
        with pytest.raises(BundleError):
            PESGrid([(1.0, None), (0.5, None)])

    def test_fcidump_grid_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        entries = []
        for k, r in enumerate((0.5, 1.0, 1.5)):
            h = _sym(rng.normal(size=(2, 2)))
            g = np.zeros((2, 2, 2, 2))
            mo = MOIntegrals.from_dense(0.0, h, g, 2)
            name = f"r{r:.3f}.fcidump"
            write_fcidump(mo, str(tmp_path / name))
            entries.append((r, name))
        save_grid_manifest(str(tmp_path), "fcidump", entries, basis="toy",
                           n_elec=2)
        grid = load_grid(str(tmp_path))
        assert grid.rs == [0.5, 1.0, 1.5]
        assert all(isinstance(p, MOIntegrals) for _, p in grid)


class TestIAO:
    def test_b1_equals_b2_identity_embedding(self):
        b = synthetic_bundle(n_b1=3, n_b2=3, n_occ=1, seed=5,
                             b2_cols=[0, 1, 2])
        basis = build_iao(b)
        assert np.abs(basis.coeff - np.eye(3)).max() < 1e-12

    def test_single_orbital(self):
        b = synthetic_bundle(n_b1=1, n_b2=1, n_occ=1, seed=6, b2_cols=[0])
        b.s1 = np.eye(1)
        b.s12 = np.eye(1)
        b.s2 = np.eye(1)
        b.mo_coeff = np.eye(1)
        basis = build_iao(b)
        assert basis.coeff == pytest.approx(np.array([[1.0]]))

    @pytest.mark.parametrize("seed", [7, 8, 9])
    def test_occupied_span_exactness(self, seed):
        b = synthetic_bundle(n_b1=5, n_b2=3, n_occ=2, seed=seed)
        basis = lowdin_orthonormalize(build_iao(b), b.s1)
        assert occupied_span_residual(basis, b.s1, b.c_occ) < 1e-8

    def test_lowdin_idempotent_and_scaling(self):
        b = synthetic_bundle(n_b1=4, n_b2=2, n_occ=1, seed=10)
        basis = lowdin_orthonormalize(build_iao(b), b.s1)
        again = lowdin_orthonormalize(basis, b.s1)
        assert np.abs(again.coeff - basis.coeff).max() < 1e-12
        rescaled = lowdin_orthonormalize(
            type(basis)(basis.coeff * 2.0), b.s1)
        gram = rescaled.coeff.T @ b.s1 @ rescaled.coeff
        assert np.abs(gram - np.eye(2)).max() < 1e-12
        p1 = span_projector(basis, b.s1)
        p2 = span_projector(rescaled, b.s1)
        assert np.abs(p1 - p2).max() < 1e-10

    def test_lowdin_two_vectors_with_overlap(self):
        s1 = np.array([[1.0, 0.5], [0.5, 1.0]])
        basis = type(build_iao(synthetic_bundle(2, 1, 1, seed=11)))(np.eye(2))
        out = lowdin_orthonormalize(basis, s1)
        gram = out.coeff.T @ s1 @ out.coeff
        assert np.abs(gram - np.eye(2)).max() < 1e-12

    def test_boys_single_orbital_unchanged(self):
        b = synthetic_bundle(n_b1=2, n_b2=1, n_occ=1, seed=12)
        basis = lowdin_orthonormalize(build_iao(b), b.s1)
        out = boys_localize(basis, b.dipole, b.s1)
        assert np.abs(out.coeff - basis.coeff).max() < 1e-14

    def test_boys_stationary_input_unchanged(self):
        # dipole components diagonal in the orbital basis: zero coupling
        b = synthetic_bundle(n_b1=2, n_b2=2, n_occ=1, seed=13, b2_cols=[0, 1])
        basis = lowdin_orthonormalize(build_iao(b), b.s1)
        c = basis.coeff
        dip = np.stack([
            np.linalg.inv(c.T) @ np.diag([0.3, -0.9]) @ np.linalg.inv(c),
            np.zeros((2, 2)), np.zeros((2, 2))])
        out = boys_localize(basis, dip, b.s1)
        assert np.abs(out.coeff - basis.coeff).max() < 1e-12

    def test_boys_monotone_and_span_preserving(self):
        b = synthetic_bundle(n_b1=5, n_b2=3, n_occ=2, seed=14)
        basis = lowdin_orthonormalize(build_iao(b), b.s1)
        out = boys_localize(basis, b.dipole, b.s1)
        hist = out.boys_history
        assert all(b2 >= a2 - 1e-10 for a2, b2 in zip(hist, hist[1:]))
        assert np.abs(span_projector(out, b.s1)
                      - span_projector(basis, b.s1)).max() < 1e-10
        assert occupied_span_residual(out, b.s1, b.c_occ) < 1e-8


class TestAO2MOFromBundle:
    def test_identity_transform_echo(self):
        one = IntegralBundle(
            n_b1=1, n_b2=1, s1=np.eye(1), s12=np.eye(1), s2=np.eye(1),
            hcore=np.array([[-0.5]]), eri=np.array([0.625]),
            dipole=np.zeros((3, 1, 1)), mo_coeff=np.eye(1), n_occ=1,
            e_nuc=0.1)
        mo = ao2mo(one, np.eye(1))
        assert mo.h[0, 0] == pytest.approx(-0.5)
        assert mo.eri_dense()[0, 0, 0, 0] == pytest.approx(0.625)
        assert mo.e0 == pytest.approx(0.1)

    def test_rotation_invariance_of_fci(self):
        b = synthetic_bundle(n_b1=3, n_b2=3, n_occ=1, seed=15)
        rng = np.random.default_rng(16)
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        mo1 = ao2mo(b, b.mo_coeff)
        mo2 = ao2mo(b, b.mo_coeff @ q)
        e1 = fci(mo1, 2, 0.0).ground_energy
        e2 = fci(mo2, 2, 0.0).ground_energy
        assert e1 == pytest.approx(e2, abs=1e-9)

    def test_non_orthonormal_coeffs_rejected(self):
        b = synthetic_bundle(n_b1=3, n_b2=2, n_occ=1, seed=17)
        with pytest.raises(Exception, match="orthonormal"):
            ao2mo(b, b.mo_coeff * 1.1)
