import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccch.norms import sobolev_norm
from ccch.spectral import (
    Field,
    FieldState,
    GridSpec,
    PDEParams,
    dealiased_product,
    deriv,
    helmholtz,
    helmholtz_inv,
    inverse_transform,
    make_grid,
    mollifier_symbol,
    mollify,
    padded_size,
    random_bandlimited,
    transform,
)

from conftest import random_fields


def max_rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


class TestGrid:
    def test_points_and_wavenumbers(self):
        g = make_grid(8, 2 * np.pi)
        np.testing.assert_allclose(g.x, np.arange(8) * np.pi / 4)
        assert sorted(g.wavenumbers.tolist()) == [-3, -2, -1, 0, 1, 2, 3, 4]

    def test_box_length_sets_wavenumber_spacing(self):
        g = make_grid(8, 4 * np.pi)
        assert g.k[1] == pytest.approx(0.5)

    @pytest.mark.parametrize("n", [7, 12, 4, 0, -8])
    def test_rejects_bad_point_count(self, n):
        with pytest.raises(ValueError):
            make_grid(n)

    @pytest.mark.parametrize("length", [0.0, -1.0, float("nan"), float("inf")])
    def test_rejects_bad_length(self, length):
        with pytest.raises(ValueError):
            make_grid(16, length)

    def test_rejects_non_integer_n(self):
        with pytest.raises(TypeError):
            GridSpec(16.0)

    def test_right_endpoint_excluded(self):
        g = make_grid(16, 3.0)
        assert g.x[-1] < 3.0 and g.x[0] == 0.0

    def test_mode_weights_count_full_spectrum(self):
        g = make_grid(32)
        assert g.mode_weights.sum() == 32


class TestField:
    def test_values_are_read_only_copies(self, grid64):
        arr = np.zeros(64)
        f = Field(grid64, arr)
        arr[0] = 1.0
        assert f.values[0] == 0.0
        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_wrong_length(self, grid64):
        with pytest.raises(ValueError):
            Field(grid64, np.zeros(63))

    def test_grid_mismatch(self, grid64):
        with pytest.raises(ValueError):
            grid64.zeros() + GridSpec(32).zeros()

    def test_field_product_is_refused(self, grid64):
        with pytest.raises(TypeError):
            grid64.zeros() * grid64.zeros()

    def test_state_requires_common_grid(self, grid64):
        with pytest.raises(ValueError):
            FieldState(grid64.zeros(), GridSpec(32).zeros())

    @pytest.mark.parametrize("p", [0, -1])
    def test_params_reject_small_exponent(self, p):
        with pytest.raises(ValueError):
            PDEParams(p=p)

    def test_params_reject_fractional_exponent(self):
        with pytest.raises(TypeError):
            PDEParams(q=1.5)


class TestTransforms:
    def test_round_trip(self, rng):
        g = GridSpec(128)
        for f in random_fields(g, rng, 20):
            back = inverse_transform(g, transform(f))
            assert max_rel(back.values, f.values) <= 1e-12

    def test_parseval(self, rng):
        g = GridSpec(64, 5.0)
        f = random_bandlimited(g, rng)
        c = transform(f)
        assert g.length * np.sum(g.mode_weights * np.abs(c) ** 2) == pytest.approx(g.dx * np.sum(f.values**2), rel=1e-13)


class TestDeriv:
    def test_sin_to_cos(self):
        g = GridSpec(64)
        err = np.max(np.abs(deriv(g.sample(np.sin), 1).values - np.cos(g.x)))
        assert err <= 1e-12

    @pytest.mark.parametrize("order", [1, 2, 3, 5])
    def test_constant_maps_to_zero(self, grid64, order):
        assert deriv(grid64.field(np.full(64, 3.7)), order).max_abs() <= 1e-12

    def test_second_derivative(self):
        g = GridSpec(64)
        out = deriv(g.sample(lambda x: np.sin(3 * x)), 2)
        assert np.max(np.abs(out.values + 9 * np.sin(3 * g.x))) <= 1e-12

    def test_odd_order_drops_nyquist(self):
        g = GridSpec(16)
        f = g.sample(lambda x: np.cos(8 * x))
        assert deriv(f, 1).max_abs() == 0.0
        assert deriv(f, 2).max_abs() == pytest.approx(64.0)

    def test_order_zero_is_identity(self, grid64, rng):
        f = random_bandlimited(grid64, rng)
        assert deriv(f, 0) is f

    def test_rejects_negative_order(self, grid64):
        with pytest.raises(ValueError):
            deriv(grid64.zeros(), -1)

    def test_scaled_box(self):
        g = GridSpec(64, 10.0)
        kk = 2 * np.pi * 3 / 10.0
        out = deriv(g.sample(lambda x: np.sin(kk * x)), 1)
        assert np.max(np.abs(out.values - kk * np.cos(kk * g.x))) <= 1e-12

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 3))
    def test_linearity(self, seed, alpha, beta, order):
        g = GridSpec(64)
        r = np.random.default_rng(seed)
        f, h = random_bandlimited(g, r), random_bandlimited(g, r)
        lhs = deriv(alpha * f + beta * h, order).values
        rhs = alpha * deriv(f, order).values + beta * deriv(h, order).values
        scale = 1 + np.max(np.abs(rhs))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


class TestHelmholtz:
    @pytest.mark.parametrize("k", [0, 1, 4, 11])
    def test_eigenfunction(self, k):
        g = GridSpec(64)
        out = helmholtz(g.sample(lambda x: np.cos(k * x)))
        assert np.max(np.abs(out.values - (1 + k**2) * np.cos(k * g.x))) <= 1e-11

    def test_inverse_round_trip(self, rng):
        g = GridSpec(256)
        for f in random_fields(g, rng, 20):
            assert max_rel(helmholtz_inv(helmholtz(f)).values, f.values) <= 1e-12
            # the forward multiplier amplifies round-off by up to 1 + k_max^2
            assert max_rel(helmholtz(helmholtz_inv(f)).values, f.values) <= 1e-10

    def test_green_function_of_discrete_delta(self):
        g = GridSpec(1024)
        delta = np.zeros(g.n)
        delta[0] = g.n / g.length
        out = helmholtz_inv(g.field(delta)).values
        # oracle: the Fourier series sum_k e^{ikx} / (2 pi (1 + k^2)), summed far past the grid
        K = 200_000
        k = np.arange(1, K + 1)
        xs = g.x[::16]
        series = (1.0 + 2.0 * np.sum(np.cos(np.outer(xs, k)) / (1.0 + k**2), axis=1)) / (2 * np.pi)
        closed = np.cosh(xs - np.pi) / (2 * np.sinh(np.pi))
        assert np.max(np.abs(series - closed)) <= 1e-5
        assert np.max(np.abs(out[::16] - series)) <= 1e-3


class TestDealiasedProduct:
    def test_square_of_sine(self):
        g = GridSpec(32)
        s = g.sample(np.sin)
        out = dealiased_product([s, s])
        assert np.max(np.abs(out.values - (1 - np.cos(2 * g.x)) / 2)) <= 1e-12

    def test_cube_of_highest_mode_against_fine_grid(self):
        n = 64
        g = GridSpec(n)
        K = n // 2 - 1
        f = g.sample(lambda x: np.cos(K * x))
        out = dealiased_product([f, f, f])
        fine = GridSpec(4 * n)
        prod = np.cos(K * fine.x) ** 3
        c = transform(fine.field(prod))[: n // 2 + 1].copy()
        c[-1] *= 2
        oracle = inverse_transform(g, c).values
        assert np.max(np.abs(out.values - oracle)) <= 1e-12
        assert np.max(np.abs(out.values - 0.75 * np.cos(K * g.x))) <= 1e-12

    def test_identity_element(self, grid64, rng):
        f = random_bandlimited(grid64, rng)
        out = dealiased_product([f, grid64.field(np.ones(64))])
        assert np.max(np.abs(out.values - f.values)) <= 1e-13

    def test_grid_mismatch(self, grid64):
        with pytest.raises(ValueError):
            dealiased_product([grid64.zeros(), GridSpec(32).zeros()])

    def test_empty(self):
        with pytest.raises(ValueError):
            dealiased_product([])

    @pytest.mark.parametrize("degree", [2, 3, 4])
    def test_random_inputs_match_fine_grid(self, rng, degree):
        n = 64
        g = GridSpec(n)
        fs = random_fields(g, rng, degree, kmax=n // 2 - 1)
        out = dealiased_product(fs)
        fine = GridSpec(4 * n)
        # band-limited fields are sampled exactly on the finer grid by zero padding
        vals = np.ones(fine.n)
        for f in fs:
            c = np.zeros(fine.n // 2 + 1, dtype=complex)
            c[: n // 2 + 1] = transform(f)
            vals *= inverse_transform(fine, c).values
        c = transform(fine.field(vals))[: n // 2 + 1].copy()
        c[-1] = 2 * c[-1].real
        oracle = inverse_transform(g, c).values
        assert np.max(np.abs(out.values - oracle)) <= 1e-10 * max(1.0, np.max(np.abs(oracle)))

    @pytest.mark.parametrize("n,degree", [(64, 1), (64, 2), (128, 3), (256, 4)])
    def test_padded_size_is_large_enough(self, n, degree):
        size = padded_size(n, degree)
        assert size > (degree + 1) * n / 2
        assert size >= math.ceil((degree + 1) / 2) * n


class TestMollifier:
    def test_symbol_at_zero(self):
        assert mollifier_symbol(np.array([0.0]))[0] == 1.0

    def test_converges_monotonically(self):
        g = GridSpec(128)
        f = g.sample(lambda x: np.exp(np.sin(x)) + np.cos(5 * x))
        errs = [np.linalg.norm((mollify(f, eps) - f).values) for eps in (1, 0.5, 0.25, 0.125)]
        assert all(b < a for a, b in zip(errs, errs[1:]))

    @pytest.mark.parametrize("eps", [1.0, 0.3, 0.01])
    def test_constant_is_fixed(self, grid64, eps):
        c = grid64.field(np.full(64, -2.5))
        assert np.max(np.abs(mollify(c, eps).values + 2.5)) <= 1e-14

    def test_contraction_in_h3(self, rng):
        g = GridSpec(128)
        for i, f in enumerate(random_fields(g, rng, 100)):
            eps = [1.0, 0.5, 0.1, 0.01][i % 4]
            assert sobolev_norm(mollify(f, eps), 3) <= sobolev_norm(f, 3)

    @pytest.mark.parametrize("eps", [0.0, -0.1, 1.5])
    def test_rejects_bad_eps(self, grid64, eps):
        with pytest.raises(ValueError):
            mollify(grid64.zeros(), eps)

    def test_commutes_with_deriv(self, rng):
        g = GridSpec(64)
        f = random_bandlimited(g, rng)
        a = mollify(deriv(f, 1), 0.2).values
        b = deriv(mollify(f, 0.2), 1).values
        assert np.max(np.abs(a - b)) <= 1e-12


class TestRandomBandlimited:
    def test_amplitude_and_band(self, rng):
        g = GridSpec(64)
        f = random_bandlimited(g, rng, kmax=5, amplitude=0.3)
        assert f.max_abs() == pytest.approx(0.3)
        c = transform(f)
        assert np.all(np.abs(c[6:]) < 1e-15) and abs(c[0]) < 1e-15

    def test_seeded(self):
        g = GridSpec(64)
        a = random_bandlimited(g, np.random.default_rng(3))
        b = random_bandlimited(g, np.random.default_rng(3))
        assert np.array_equal(a.values, b.values)
