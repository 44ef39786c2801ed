import json

import numpy as np
import pytest

from curveflow import (
    ClosureViolation,
    ConvexityViolation,
    CurveState,
    FlowParams,
    area,
    closure_residual,
    from_raw,
    length,
    make_circle,
    make_ellipse,
    make_fourier,
    reconstruct,
    shoelace_area,
)
from curveflow import spectral


class TestFlowParams:
    def test_defaults_are_valid(self):
        p = FlowParams(n=2.0)
        assert p.grid_size == 128
        assert p.scheme == "explicit-rk4"
        assert p.deriv_method == "spectral"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 0.0},
            {"n": -1.0},
            {"n": 2.0, "grid_size": 15},
            {"n": 2.0, "grid_size": 8},
            {"n": 2.0, "cfl_factor": 0.0},
            {"n": 2.0, "cfl_factor": 1.5},
            {"n": 2.0, "closure_tol": 0.0},
            {"n": 2.0, "positivity_floor": -1e-9},
            {"n": 2.0, "scheme": "leapfrog"},
            {"n": 2.0, "deriv_method": "upwind"},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            FlowParams(**kwargs)

    def test_n_equal_one_is_allowed(self):
        assert FlowParams(n=1.0).n == 1.0


class TestCurveState:
    def test_samples_are_copied_and_readonly(self):
        raw = np.ones(32)
        s = CurveState(raw, 0.0)
        raw[0] = 5.0
        assert s.rho[0] == 1.0
        with pytest.raises(ValueError):
            s.rho[0] = 2.0

    def test_theta_grid(self):
        s = make_circle(1.0, 16)
        assert np.allclose(s.theta, 2 * np.pi * np.arange(16) / 16)


class TestMakeCircle:
    def test_unit_circle(self):
        s = make_circle(1.0, 64)
        assert np.all(s.rho == 1.0)
        assert s.t == 0.0
        assert abs(length(s) - 2 * np.pi) < 1e-13
        assert abs(area(s) - np.pi) < 1e-13

    def test_radius_two(self):
        s = make_circle(2.0, 32)
        assert np.all(s.rho == 2.0)
        cx, cy = closure_residual(s)
        assert abs(cx) < 1e-14 and abs(cy) < 1e-14

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            make_circle(0.0, 64)
        with pytest.raises(ValueError):
            make_circle(-1.0, 64)

    def test_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            make_circle(1.0, 15)
        with pytest.raises(ValueError):
            make_circle(1.0, 8)


class TestMakeFourier:
    def test_mode_two_profile(self):
        s = make_fourier(1.0, [(2, 0.3, 0.0)], 128)
        expected = 1.0 + 0.3 * np.cos(2 * s.theta)
        assert np.max(np.abs(s.rho - expected)) < 1e-14
        assert abs(s.rho.min() - 0.7) < 1e-14

    def test_rejects_mode_one(self):
        with pytest.raises(ClosureViolation):
            make_fourier(1.0, [(1, 0.1, 0.0)], 64)

    def test_rejects_nonconvex_profile(self):
        with pytest.raises(ConvexityViolation):
            make_fourier(1.0, [(2, 1.05, 0.0)], 64)

    def test_rejects_unrepresentable_mode(self):
        with pytest.raises(ValueError):
            make_fourier(1.0, [(40, 0.01, 0.0)], 64)

    def test_closed_form_area_with_polygon_cross_check(self):
        s = make_fourier(1.0, [(2, 0.3, 0.0)], 128)
        expected = np.pi * (1.0 - 0.3**2 / 6.0)
        assert abs(area(s) - expected) < 1e-12
        polygon = shoelace_area(reconstruct(s, oversample=64))
        assert abs(polygon - expected) < 1e-6

    def test_constructors_have_no_first_harmonic(self):
        for s in (
            make_circle(1.5, 64),
            make_fourier(1.0, [(2, 0.2, 0.1), (5, 0.05, 0.0)], 64),
            make_ellipse(2.0, 1.0, 64),
        ):
            cx, cy = closure_residual(s)
            assert np.hypot(cx, cy) < 1e-13

    def test_sampled_min_matches_dense_min(self):
        # Incommensurate mode mix: the grid minimum may miss the true
        # minimum, but only by a refinement-limited margin.
        s = make_fourier(1.0, [(2, 0.21, 0.13), (3, -0.11, 0.07), (5, 0.04, -0.03)], 64)
        dense = spectral.resample(s.rho, 8 * 64)
        assert abs(s.rho.min() - dense.min()) < 1e-3


class TestMakeEllipse:
    def test_circle_special_case(self):
        s = make_ellipse(1.0, 1.0, 64)
        assert np.max(np.abs(s.rho - 1.0)) < 1e-12

    def test_area_is_pi_ab(self):
        s = make_ellipse(2.0, 1.0, 256)
        assert abs(area(s) - 2 * np.pi) < 1e-8

    def test_perimeter_matches_quadrature_oracle(self):
        # Independent oracle: dense quadrature of the parametric speed
        # sqrt(a^2 sin^2 u + b^2 cos^2 u) along the ellipse itself.
        a, b = 2.0, 1.0
        u = 2 * np.pi * np.arange(1 << 16) / (1 << 16)
        oracle = 2 * np.pi * np.mean(np.sqrt(a**2 * np.sin(u) ** 2 + b**2 * np.cos(u) ** 2))
        s = make_ellipse(a, b, 256)
        assert abs(length(s) - oracle) < 1e-6

    def test_profile_matches_closed_form(self):
        a, b = 2.0, 1.0
        s = make_ellipse(a, b, 256)
        h = np.sqrt(a**2 * np.cos(s.theta) ** 2 + b**2 * np.sin(s.theta) ** 2)
        assert np.max(np.abs(s.rho - a**2 * b**2 / h**3)) < 1e-10

    def test_rejects_nonpositive_axis(self):
        with pytest.raises(ValueError):
            make_ellipse(0.0, 1.0, 64)
        with pytest.raises(ValueError):
            make_ellipse(2.0, -1.0, 64)


class TestRawImport:
    def test_round_trip(self, tmp_path):
        s = make_fourier(1.0, [(2, 0.2, 0.0)], 64)
        payload = {"theta_count": 64, "rho": s.rho.tolist(), "t": 0.0}
        path = tmp_path / "curve.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        loaded = from_raw(path)
        assert np.array_equal(loaded.rho, s.rho)
        assert loaded.t == 0.0

    def test_accepts_dict(self):
        loaded = from_raw({"theta_count": 16, "rho": [1.0] * 16, "t": 0.5})
        assert loaded.t == 0.5

    def test_rejects_count_mismatch(self):
        with pytest.raises(ValueError):
            from_raw({"theta_count": 32, "rho": [1.0] * 16, "t": 0.0})

    def test_rejects_missing_key(self):
        with pytest.raises(ValueError):
            from_raw({"rho": [1.0] * 16})

    def test_rejects_open_curve(self):
        theta = spectral.grid(64)
        rho = 1.0 + 0.01 * np.cos(theta)  # first harmonic: does not close
        with pytest.raises(ClosureViolation):
            from_raw({"theta_count": 64, "rho": rho.tolist(), "t": 0.0})

    def test_rejects_nonpositive_samples(self):
        rho = np.ones(64)
        rho[3] = 0.0
        with pytest.raises(ConvexityViolation):
            from_raw({"theta_count": 64, "rho": rho.tolist(), "t": 0.0})
