import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kslogistic.field import (
    Domain2D,
    Field2D,
    FieldError,
    chemo_flux_divergence,
    face_gradients,
    grad_norm_inf,
    grad_norm_l2_sq,
    integrate,
    laplacian,
    laplacian_l2_sq,
    load_field,
    norm_lp,
    save_field,
)

UNIT = Domain2D(1.0, 1.0, 32, 32)


def cos_field(d, kx=1, ky=0):
    X, Y = d.cell_centers()
    return Field2D(d, np.cos(kx * np.pi * X / d.Lx) * np.cos(ky * np.pi * Y / d.Ly))


def rand_field(d, seed, lo=-1.0, hi=1.0):
    rng = np.random.default_rng(seed)
    return Field2D(d, rng.uniform(lo, hi, (d.nx, d.ny)))


# width=32 keeps magnitudes sane (no denormal-squaring artifacts)
small_arrays = arrays(
    np.float64, (8, 8), elements=st.floats(-10, 10, allow_nan=False, width=32)
)
DOM8 = Domain2D(1.0, 1.0, 8, 8)


class TestDomain:
    def test_geometry(self):
        d = Domain2D(2.0, 1.0, 64, 32)
        assert d.hx == 2.0 / 64
        assert d.hy == 1.0 / 32
        assert d.cell_area == d.hx * d.hy
        assert d.measure == 2.0

    @pytest.mark.parametrize("bad", [dict(nx=3), dict(ny=2), dict(Lx=0.0), dict(Ly=-1.0)])
    def test_invalid(self, bad):
        kw = dict(Lx=1.0, Ly=1.0, nx=8, ny=8)
        kw.update(bad)
        with pytest.raises(ValueError):
            Domain2D(**kw)

    def test_cell_centers_are_midpoints(self):
        d = Domain2D(1.0, 1.0, 4, 4)
        X, Y = d.cell_centers()
        assert X[0, 0] == 0.125 and Y[0, 0] == 0.125
        assert X[-1, -1] == 0.875


class TestField:
    def test_rejects_nan(self):
        vals = np.zeros((8, 8))
        vals[3, 3] = np.nan
        with pytest.raises(FieldError):
            Field2D(DOM8, vals)

    def test_rejects_bad_shape(self):
        with pytest.raises(FieldError):
            Field2D(DOM8, np.zeros((8, 9)))


class TestLaplacian:
    def test_annihilates_constants(self):
        f = Field2D(UNIT, np.full((32, 32), 3.7))
        assert np.all(laplacian(f).values == 0.0)

    def test_converges_to_analytic(self):
        # -pi^2 cos(pi x) is the analytic image; error should drop at order ~2
        errs = []
        for n in (32, 64, 128):
            d = Domain2D(1.0, 1.0, n, n)
            f = cos_field(d, kx=1, ky=0)
            exact = Field2D(d, -np.pi**2 * f.values)
            errs.append(norm_lp(Field2D(d, laplacian(f).values - exact.values), 2))
        order1 = math.log2(errs[0] / errs[1])
        order2 = math.log2(errs[1] / errs[2])
        assert order1 >= 1.9
        assert order2 >= 1.9

    def test_integral_is_zero(self):
        f = rand_field(UNIT, 3)
        scale = norm_lp(laplacian(f), 1) + 1.0
        assert abs(integrate(laplacian(f))) <= 1e-12 * scale

    @given(small_arrays, small_arrays)
    def test_self_adjoint(self, a, b):
        f, g = Field2D(DOM8, a), Field2D(DOM8, b)
        lhs = integrate(Field2D(DOM8, g.values * laplacian(f).values))
        rhs = integrate(Field2D(DOM8, f.values * laplacian(g).values))
        scale = (norm_lp(f, 2) + 1.0) * (norm_lp(g, 2) + 1.0) / DOM8.hx**2
        assert abs(lhs - rhs) <= 1e-12 * scale


class TestChemoFlux:
    def test_zero_for_constant_v(self):
        u = rand_field(UNIT, 1, 0.0, 2.0)
        v = Field2D(UNIT, np.full((32, 32), 5.0))
        assert np.all(chemo_flux_divergence(u, v, 3.0).values == 0.0)

    def test_zero_for_zero_u(self):
        u = Field2D(UNIT, np.zeros((32, 32)))
        v = rand_field(UNIT, 2)
        assert np.all(chemo_flux_divergence(u, v, 3.0).values == 0.0)

    @given(small_arrays, small_arrays)
    def test_conservative(self, a, b):
        u, v = Field2D(DOM8, np.abs(a)), Field2D(DOM8, b)
        div = chemo_flux_divergence(u, v, 2.5)
        scale = norm_lp(div, 1) + 1.0
        assert abs(integrate(div)) <= 1e-12 * scale

    def test_upwind_uses_donor_cell(self):
        # v increasing in x drives flux in +x; the donor is the left cell
        d = Domain2D(1.0, 1.0, 4, 4)
        u = np.zeros((4, 4))
        u[1, :] = 1.0
        X, _ = d.cell_centers()
        div = chemo_flux_divergence(Field2D(d, u), Field2D(d, X.copy()), 1.0)
        # mass leaves cell 1 toward cell 2 only
        assert np.all(div.values[1, :] > 0)
        assert np.all(div.values[2, :] < 0)
        assert np.all(div.values[3, :] == 0)

    def test_domain_mismatch(self):
        with pytest.raises(FieldError):
            chemo_flux_divergence(rand_field(UNIT, 1), rand_field(DOM8, 1), 1.0)

    def test_negative_chi_rejected(self):
        with pytest.raises(ValueError):
            chemo_flux_divergence(rand_field(DOM8, 1), rand_field(DOM8, 2), -1.0)


class TestIntegrate:
    def test_constant(self):
        assert integrate(Field2D(UNIT, np.full((32, 32), 2.5))) == pytest.approx(2.5, rel=1e-14)

    def test_odd_symmetry(self):
        f = cos_field(UNIT, 1, 1)
        assert abs(integrate(f)) <= 1e-13

    def test_linear_exact(self):
        d = Domain2D(1.0, 1.0, 128, 128)
        X, _ = d.cell_centers()
        assert integrate(Field2D(d, X.copy())) == pytest.approx(0.5, abs=1e-12)


class TestNorms:
    @pytest.mark.parametrize("p", [1, 2, 3, 4, np.inf])
    def test_constant(self, p):
        f = Field2D(UNIT, np.full((32, 32), 1.5))
        assert norm_lp(f, p) == pytest.approx(1.5, rel=1e-13)

    def test_l2_of_cosine(self):
        d = Domain2D(1.0, 1.0, 64, 64)
        assert norm_lp(cos_field(d, 1, 1), 2) == pytest.approx(0.5, rel=1e-3)

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            norm_lp(rand_field(DOM8, 0), 5)

    @given(small_arrays)
    def test_holder_l1_vs_l2(self, a):
        f = Field2D(DOM8, a)
        assert norm_lp(f, 1) <= math.sqrt(DOM8.measure) * norm_lp(f, 2) * (1 + 1e-12)

    @given(small_arrays, arrays(np.float64, (8, 8), elements=st.floats(0, 5, width=32)))
    def test_monotone_in_field(self, a, extra):
        f = Field2D(DOM8, a)
        g = Field2D(DOM8, np.sign(a) * (np.abs(a) + extra))
        for p in (1, 2, 3, 4, np.inf):
            assert norm_lp(f, p) <= norm_lp(g, p) * (1 + 1e-12)


class TestGradNorm:
    def test_constant_is_zero(self):
        assert grad_norm_l2_sq(Field2D(UNIT, np.full((32, 32), 4.0))) == 0.0

    def test_cosine_value(self):
        d = Domain2D(1.0, 1.0, 128, 128)
        assert grad_norm_l2_sq(cos_field(d, 1, 0)) == pytest.approx(np.pi**2 / 2, rel=1e-3)

    @given(small_arrays, st.floats(-4, 4))
    def test_homogeneous(self, a, c):
        f = Field2D(DOM8, a)
        g = Field2D(DOM8, c * a)
        assert grad_norm_l2_sq(g) == pytest.approx(c * c * grad_norm_l2_sq(f), rel=1e-10, abs=1e-12)

    def test_grad_inf_matches_faces(self):
        f = rand_field(DOM8, 5)
        gx, gy = face_gradients(f)
        assert grad_norm_inf(f) == max(np.abs(gx).max(), np.abs(gy).max())


class TestLaplacianL2:
    def test_constant_is_zero(self):
        assert laplacian_l2_sq(Field2D(UNIT, np.full((32, 32), 4.0))) == 0.0

    def test_cosine_value(self):
        d = Domain2D(1.0, 1.0, 128, 128)
        assert laplacian_l2_sq(cos_field(d, 1, 0)) == pytest.approx(np.pi**4 / 2, rel=2e-3)

    @given(small_arrays)
    def test_nonnegative(self, a):
        assert laplacian_l2_sq(Field2D(DOM8, a)) >= 0.0


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        f = rand_field(Domain2D(2.0, 0.5, 8, 16), 9)
        path = tmp_path / "field.txt"
        save_field(f, path, meta={"t": 1.25})
        g = load_field(path)
        assert g.domain == f.domain
        assert np.array_equal(g.values, f.values)

    def test_meta_lines_ignored(self, tmp_path):
        f = rand_field(DOM8, 10)
        path = tmp_path / "field.txt"
        save_field(f, path, meta={"run": "x"})
        assert path.read_text().startswith("# ")
        assert np.array_equal(load_field(path).values, f.values)
