import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ccch.dynamics import CALIBRATED_CS
from ccch.experiments import (
    PROFILES,
    ExperimentReport,
    NonuniformParams,
    Verdict,
    build_high_freq,
    build_low_freq_data,
    calibrate_cs,
    check_lemma51,
    classify_region,
    compact_bump,
    fit_slope,
    hoelder_exponent,
    line_box,
    profile,
    run_conservation,
    run_hoelder,
    run_nonuniform,
)
from ccch.norms import sobolev_norm
from ccch.spectral import GridSpec


def line_sobolev(f, r, L=32.0, n=8192):
    """H^r norm on the line of a profile supported well inside the box."""
    g = GridSpec(n, L)
    return sobolev_norm(g.field(f(g.x - L / 2)), r)


class TestProfiles:
    @pytest.mark.parametrize("name", ["cinf", "smoothstep"])
    def test_plateau_and_support(self, name):
        f = profile(name)
        assert np.all(f(np.linspace(-1, 1, 101)) == 1.0)
        assert np.all(f(np.array([-5.0, -2.0, 2.0, 3.7])) == 0.0)
        mid = f(np.linspace(1, 2, 101))
        assert np.all(np.diff(mid) <= 0) and np.all((mid >= 0) & (mid <= 1))

    @pytest.mark.parametrize("narrow,wide", [("cinf", "cinf_wide"), ("smoothstep", "smoothstep_wide")])
    def test_wide_covers_narrow(self, narrow, wide):
        x = np.linspace(-2.5, 2.5, 1001)
        support = profile(narrow)(x) > 0
        assert np.all(profile(wide)(x)[support] == 1.0)

    @pytest.mark.parametrize("q", [1, 2, 3])
    def test_plateau_power_is_one(self, q):
        # the companion equals 1 on the support, so every power does too
        x = np.linspace(-2, 2, 401)
        assert np.all(profile("cinf_wide")(x) ** q == 1.0)

    def test_unknown(self):
        with pytest.raises(ValueError):
            profile("box")

    def test_even(self):
        x = np.linspace(0, 3, 77)
        for f in PROFILES.values():
            np.testing.assert_array_equal(f(x), f(-x))


class TestFit:
    def test_exact_power_law(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        fit = fit_slope(x, 3.0 * x**-0.75)
        assert fit.slope == pytest.approx(-0.75, abs=1e-14)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-14)
        lo, hi = fit.band
        assert lo <= fit.slope <= hi

    def test_two_points(self):
        assert fit_slope([1, 10], [1, 100]).slope == pytest.approx(2.0)

    def test_one_point(self):
        with pytest.raises(ValueError):
            fit_slope([1.0], [1.0])


class TestReport:
    def test_csv_round_trip_digits(self):
        rep = ExperimentReport("x", {}, ["a", "b"], [[0.1, "ok"], [1 / 3, "ok"]])
        lines = rep.csv_text().splitlines()
        assert lines[0] == "a,b"
        assert float(lines[2].split(",")[0]) == 1 / 3

    def test_passed_and_dict(self, tmp_path):
        rep = ExperimentReport("x", {"k": 1}, ["a"], [[1.0]])
        rep.verdicts.append(Verdict("v", 1.0, np.float64(0.9), "c", True))
        assert rep.passed
        rep.write(tmp_path)
        assert (tmp_path / "x.csv").exists() and (tmp_path / "report.json").exists()
        rep.verdicts.append(Verdict("w", None, None, "c", False))
        assert not rep.passed and rep.to_dict()["verdicts"][1]["verdict"] == "FAIL"


class TestHighFrequency:
    def test_omega_zero_is_static(self):
        g = line_box(64, 0.5, 1, 1)
        a = build_high_freq(g, 0.0, 64, 0.5, 3.0, 1, 1, t=0.0)
        b = build_high_freq(g, 0.0, 64, 0.5, 3.0, 1, 1, t=2.7)
        assert np.array_equal(a[0].values, b[0].values)

    @pytest.mark.parametrize("r", [0.0, 3.0])
    def test_norm_scaling(self, r):
        s = 3.0
        for lam in (64.0, 128.0, 256.0, 512.0, 1024.0):
            g = line_box(lam, 0.5, 1, 1)
            u, v = build_high_freq(g, 1.0, lam, 0.5, s, 1, 1)
            for f in (u, v):
                assert 0.3 <= sobolev_norm(f, r) / lam ** (r - s) <= 3.0

    def test_sup_bound(self):
        lam, d, s = 128.0, 0.5, 3.0
        g = line_box(lam, d, 2, 1)
        u, v = build_high_freq(g, 1.0, lam, d, s, 2, 1)
        assert u.max_abs() <= lam ** (-d / 4 - s)
        assert v.max_abs() <= lam ** (-d / 2 - s)

    def test_under_resolved(self):
        with pytest.raises(ValueError):
            build_high_freq(GridSpec(256, 100.0), 1.0, 64.0, 0.5, 3.0, 1, 1)

    @pytest.mark.parametrize("lam", [16.0, 100.0, 1024.0])
    def test_box_sampling(self, lam):
        g = line_box(lam, 0.5, 1, 2)
        assert g.n * 2 * np.pi / (lam * g.length) >= 8.0
        assert g.length == pytest.approx(8 * lam**0.5)


class TestLowFrequency:
    def test_zero_omega(self):
        g = line_box(64, 0.5, 1, 1)
        st0 = build_low_freq_data(g, 0.0, 64, 0.5, 1, 1)
        assert st0.u.max_abs() == 0.0 and st0.v.max_abs() == 0.0

    @pytest.mark.parametrize("r", [0.0, 1.0, 3.0])
    @pytest.mark.parametrize("q", [1, 2])
    def test_norm_bound(self, r, q):
        lam, d = 256.0, 0.5
        g = line_box(lam, d, 1, q)
        u = build_low_freq_data(g, 1.0, lam, d, 1, q).u
        bound = lam ** ((d - 2) / (2 * q)) * line_sobolev(profile("cinf_wide"), r)
        assert sobolev_norm(u, r) <= bound * (1 + 1e-6)
        if r == 0:
            assert sobolev_norm(u, r) == pytest.approx(bound, rel=1e-6)

    @pytest.mark.parametrize("rho", [2.0, 4.0, 8.0])
    def test_dilation_scaling(self, rho):
        f = profile("cinf_wide")
        base = line_sobolev(f, 0) ** 2
        scaled = line_sobolev(lambda x: f(x / rho), 0, L=32.0 * rho, n=8192 * int(rho)) ** 2
        assert scaled == pytest.approx(rho * base, rel=1e-10)

    def test_plateau_values(self):
        lam = 64.0
        g = line_box(lam, 0.5, 1, 2)
        st0 = build_low_freq_data(g, 1.0, lam, 0.5, 1, 2)
        mid = g.n // 2
        assert st0.u.values[mid] ** 2 == pytest.approx(1 / lam)
        assert st0.v.values[mid] == pytest.approx(1 / lam)


class TestLemma51:
    def test_cos_and_sin_share_the_limit(self):
        lams = (256.0, 512.0, 1024.0)
        c = check_lemma51(lambdas=lams)
        s = check_lemma51(lambdas=lams, use_sin=True, phase=0.3)
        assert c.verdicts[1].passed
        np.testing.assert_allclose(c.column("ratio"), s.column("ratio"), rtol=1e-3)
        assert abs(c.column("ratio")[-1] - 1) <= 0.05

    def test_zero_profile(self):
        rep = check_lemma51(psi=lambda x: 0.0 * x, lambdas=(64.0, 128.0))
        assert rep.column("scaled_norm") == [0.0, 0.0]


class TestNonuniform:
    def test_degenerate_omegas(self):
        params = NonuniformParams(lambdas=(16.0, 32.0), omegas=(0.0, 0.0), measure_error=False, t_probe=0.1, dt=0.05)
        rep = run_nonuniform(params)
        assert [v.name for v in rep.verdicts] == ["degenerate"] and rep.passed
        assert rep.column("dist_t0") == [0.0, 0.0]

    def test_initial_data_bounded_in_hs(self):
        norms = []
        for lam in (64.0, 128.0, 256.0, 512.0):
            g = line_box(lam, 0.5, 1, 1)
            low = build_low_freq_data(g, 1.0, lam, 0.5, 1, 1)
            uh, vh = build_high_freq(g, 1.0, lam, 0.5, 3.0, 1, 1)
            norms.append(sobolev_norm(low.u + uh, 3.0) + sobolev_norm(low.v + vh, 3.0))
        assert max(norms) <= 2.0 * min(norms)

    def test_small_sweep(self):
        params = NonuniformParams(lambdas=(16.0, 32.0, 64.0), measure_error=False, t_probe=0.5, dt=0.05)
        rep = run_nonuniform(params, workers=2)
        d0 = rep.column("dist_t0")
        assert all(b < a for a, b in zip(d0, d0[1:]))
        assert all(x == "ok" for x in rep.column("status"))

    @pytest.mark.parametrize(
        "kwargs",
        [{"s": 2.5}, {"delta": 1.0}, {"lambdas": (64.0,)}, {"lambdas": (64.0, 32.0)}, {"lambdas": (2.0, 8.0)},
         {"omegas": (0.0,)}, {"phi": "box"}, {"points_per_wavelength": 4.0}, {"theta": 3.5}],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            NonuniformParams(**kwargs)


class TestRegions:
    @pytest.mark.parametrize(
        "s,r,name,alpha",
        [
            (3.0, 2.0, "A1", 1.0),
            (3.0, 0.5, "A1", 1.0),
            (2.75, 0.2, "A2", 2.5 / 2.55),
            (2.75, 1.0, "A3", 0.875),
            (3.0, 2.5, "A4", 0.5),
            (4.0, 1.0, "A1", 1.0),
            (3.2, 1.4, "A3", 0.9),
        ],
    )
    def test_examples(self, s, r, name, alpha):
        reg = classify_region(s, r)
        assert reg.name == name and reg.alpha == pytest.approx(alpha)

    @pytest.mark.parametrize("s,r", [(2.5, 1.0), (3.0, 3.0), (3.0, -0.1)])
    def test_outside(self, s, r):
        with pytest.raises(ValueError):
            classify_region(s, r)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(2.51, 6.0), st.floats(0.0, 1.0))
    def test_every_admissible_point_is_classified(self, s, frac):
        r = frac * s * 0.999
        a = hoelder_exponent(s, r)
        assert 0 < a <= 1.0 + 1e-12


class TestHoelder:
    def test_zero_direction(self):
        rep = run_hoelder(perturbation_scale=0.0, n=64, t_final=0.05, dt=1e-2, eps_list=(1e-2, 5e-3))
        assert rep.passed and rep.column("dist_t") == [0.0, 0.0]

    def test_needs_two_sizes(self):
        with pytest.raises(ValueError):
            run_hoelder(eps_list=(1e-2,))


class TestSupportBump:
    def test_bump(self):
        x = np.array([0.0, 1.0, 1.5, 2.0, 3.0])
        out = compact_bump(x, 1.5, 0.5, 2.0)
        assert out[2] == 2.0 and out[0] == 0 and out[1] == 0 and out[3] == 0 and out[4] == 0


class TestReproducibility:
    def test_csv_bit_identical(self):
        a = run_conservation(n=64, t_final=0.05, dt=1e-2, monitor_every=1).csv_text()
        b = run_conservation(n=64, t_final=0.05, dt=1e-2, monitor_every=1).csv_text()
        assert a == b


@pytest.mark.slow
def test_calibrated_constant_covers_calibration_set():
    cal = calibrate_cs()
    assert cal.C_s <= CALIBRATED_CS <= 1.1 * cal.C_s


class TestConservationExperiment:
    @pytest.mark.parametrize(
        "p,q,a,b",
        [(2, 2, 1.0, 1.0), (1, 1, 2.0, 2.0), (2, 1, 2.0, 1.0), (3, 1, 2.0, 3.0), (1, 1, -2.0, -2.0)],
    )
    def test_lp_invariant(self, p, q, a, b):
        rep = run_conservation(p=p, q=q, a=a, b=b, n=128, dt=2e-3, t_final=0.5)
        v = {x.name: x for x in rep.verdicts}
        assert v["lp_drift"].passed, v["lp_drift"].measured
        assert v["rate_identity"].passed
        assert ("quadratic_drift" in v) == (p == 2 * a and q == 2 * b)

    def test_divergent_invariant_is_skipped(self):
        rep = run_conservation(p=1, q=2, a=-1.0, b=1.0, n=64, dt=1e-2, t_final=0.1)
        assert "lp_drift" not in {x.name for x in rep.verdicts}
        assert any("diverges" in note for note in rep.notes)
