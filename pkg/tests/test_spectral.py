import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from nlslab.spectral import (
    ComplexField1D,
    Grid1D,
    RealField1D,
    dealias_mask,
    derivative,
    dft,
    im_product,
    integrate,
    inverse_dft,
    l2_norm_sq,
    make_grid,
    pointwise_abs_pow,
    re_product,
    read_snapshot,
    write_snapshot,
)


def random_field(grid, seed):
    rng = np.random.default_rng(seed)
    return ComplexField1D(grid, rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))


def tone(grid, m):
    return ComplexField1D(grid, np.exp(2j * np.pi * m * grid.nodes / grid.length))


class TestGrid:
    def test_nodes_and_spacing(self):
        g = make_grid(8, 2 * np.pi)
        assert_allclose(g.dx, np.pi / 4)
        assert_allclose(g.nodes[0], -np.pi)
        assert_allclose(g.nodes[-1], 3 * np.pi / 4)

    def test_wavenumbers_dft_order(self):
        g = make_grid(8, 2 * np.pi)
        assert_allclose(g.wavenumbers, [0, 1, 2, 3, -4, -3, -2, -1])

    def test_nodes_are_read_only(self):
        g = make_grid(16, 1.0)
        with pytest.raises(ValueError):
            g.nodes[0] = 1.0

    @pytest.mark.parametrize("n", [6, 0, 4, 100])
    def test_rejects_bad_size(self, n):
        with pytest.raises(ValueError):
            Grid1D(n, 1.0)

    @pytest.mark.parametrize("length", [0.0, -1.0, np.inf])
    def test_rejects_bad_length(self, length):
        with pytest.raises(ValueError):
            Grid1D(16, length)

    def test_nearest_node(self):
        g = make_grid(8, 8.0)
        assert g.nearest_node(0.0) == 4
        assert g.nearest_node(0.49) == 4
        assert g.nearest_node(-4.0) == 0


class TestFields:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ComplexField1D(make_grid(16, 1.0), np.zeros(8))

    def test_non_finite(self):
        v = np.zeros(16, dtype=complex)
        v[3] = np.nan
        with pytest.raises(ValueError):
            ComplexField1D(make_grid(16, 1.0), v)

    def test_values_are_copied(self):
        g = make_grid(8, 1.0)
        raw = np.ones(8, dtype=complex)
        f = ComplexField1D(g, raw)
        raw[0] = 5.0
        assert f.values[0] == 1.0

    def test_grid_mismatch_in_products(self):
        a = random_field(make_grid(16, 1.0), 0)
        b = random_field(make_grid(16, 2.0), 1)
        with pytest.raises(ValueError):
            im_product(a, b)


class TestTransform:
    def test_constant(self):
        g = make_grid(8, 2 * np.pi)
        spec = dft(ComplexField1D(g, np.ones(8)))
        expected = np.zeros(8)
        expected[0] = 8
        assert_allclose(spec, expected, atol=1e-12)

    def test_single_tone(self):
        g = make_grid(8, 2 * np.pi)
        spec = dft(tone(g, 1))
        expected = np.zeros(8, dtype=complex)
        expected[1] = -8  # node -pi carries a phase of -1
        assert_allclose(spec, expected, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([8, 32, 256]))
    def test_round_trip(self, seed, n):
        f = random_field(make_grid(n, 3.0), seed)
        back = inverse_dft(dft(f), f.grid)
        assert np.max(np.abs(back.values - f.values)) <= 1e-13 * max(1.0, np.max(np.abs(f.values)))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_parseval(self, seed):
        g = make_grid(64, 5.0)
        f = random_field(g, seed)
        spec = dft(f)
        assert_allclose(l2_norm_sq(f), g.length / g.n**2 * np.sum(np.abs(spec) ** 2), rtol=1e-13)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_linearity(self, seed, alpha):
        g = make_grid(32, 1.0)
        f, h = random_field(g, seed), random_field(g, seed + 1)
        assert_allclose(dft(f * alpha + h), alpha * dft(f) + dft(h), atol=1e-11)


class TestDerivative:
    def test_tone_first_derivative(self):
        g = make_grid(8, 2 * np.pi)
        d = derivative(tone(g, 1), 1)
        assert_allclose(d.values, 1j * tone(g, 1).values, atol=1e-12)

    def test_sine_second_derivative(self):
        g = make_grid(64, 2 * np.pi)
        f = ComplexField1D(g, np.sin(3 * g.nodes))
        assert_allclose(derivative(f, 2).values, -9 * np.sin(3 * g.nodes), atol=1e-11)

    def test_constant_has_zero_derivative(self):
        g = make_grid(16, 2.0)
        assert_allclose(derivative(ComplexField1D(g, np.full(16, 2.5 + 1j)), 1).values, 0, atol=1e-14)

    def test_real_field_stays_real(self):
        g = make_grid(32, 2 * np.pi)
        d = derivative(RealField1D(g, np.cos(g.nodes)), 1)
        assert isinstance(d, RealField1D)
        assert_allclose(d.values, -np.sin(g.nodes), atol=1e-13)

    @pytest.mark.parametrize("order", [0, 3])
    def test_unsupported_order(self, order):
        g = make_grid(16, 1.0)
        with pytest.raises(ValueError):
            derivative(random_field(g, 0), order)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_first_applied_twice_is_second(self, seed):
        g = make_grid(64, 2 * np.pi)
        rng = np.random.default_rng(seed)
        c = np.zeros(64, dtype=complex)
        c[:10] = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        f = inverse_dft(c, g)
        assert_allclose(derivative(derivative(f, 1), 1).values, derivative(f, 2).values, atol=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_derivative_integrates_to_zero(self, seed):
        f = random_field(make_grid(64, 7.0), seed)
        d = derivative(f, 1)
        assert abs(integrate(RealField1D(f.grid, d.values.real))) <= 1e-11


class TestQuadrature:
    def test_sech_squared(self, box):
        x = box.nodes
        assert_allclose(integrate(RealField1D(box, 1 / np.cosh(x) ** 2)), 2.0, rtol=1e-12)

    def test_plane_wave_norm(self):
        g = make_grid(64, 2 * np.pi)
        f = ComplexField1D(g, 2 * np.exp(2j * g.nodes))
        assert_allclose(l2_norm_sq(f), 8 * np.pi, rtol=1e-14)

    def test_abs_pow(self):
        g = make_grid(8, 1.0)
        f = ComplexField1D(g, np.full(8, 3 + 4j))
        assert_allclose(pointwise_abs_pow(f, 2).values, 25.0)
        assert_allclose(pointwise_abs_pow(f, 4).values, 625.0)

    def test_products(self):
        g = make_grid(8, 1.0)
        a = ComplexField1D(g, np.full(8, 1j))
        b = ComplexField1D(g, np.full(8, 1.0 + 0j))
        assert_allclose(im_product(a, b).values, 1.0)
        assert_allclose(re_product(a, b).values, 0.0)
        assert_allclose(im_product(b, a).values, -1.0)


class TestDealias:
    def test_keeps_lower_two_thirds(self):
        g = make_grid(32, 1.0)
        mask = dealias_mask(g)
        j = np.abs(np.fft.fftfreq(32, d=1 / 32))
        assert (mask[j <= 32 / 3] == 1).all()
        assert (mask[j > 32 / 3] == 0).all()


class TestSnapshot:
    def test_round_trip_is_exact(self, tmp_path):
        g = make_grid(32, 3.0)
        f = random_field(g, 7)
        write_snapshot(tmp_path / "u.csv", f)
        back = read_snapshot(tmp_path / "u.csv", g)
        assert np.array_equal(back.values, f.values)

    def test_header(self, tmp_path):
        g = make_grid(8, 1.0)
        write_snapshot(tmp_path / "u.csv", random_field(g, 0))
        assert (tmp_path / "u.csv").read_text().splitlines()[0] == "x,re,im"

    def test_grid_mismatch(self, tmp_path):
        write_snapshot(tmp_path / "u.csv", random_field(make_grid(8, 1.0), 0))
        with pytest.raises(ValueError):
            read_snapshot(tmp_path / "u.csv", make_grid(16, 1.0))

    def test_bad_header(self, tmp_path):
        (tmp_path / "u.csv").write_text("a,b,c\n0,0,0\n")
        with pytest.raises(ValueError):
            read_snapshot(tmp_path / "u.csv")
