"""Geometric functionals, support-function recovery, and polygon oracles.

Perimeter, enclosed area, and the nonlocal multiplier are all computed
from the radius profile with uniform-grid quadrature, which is spectrally
accurate for smooth periodic integrands.  The polygon routines at the
bottom are deliberately naive (shoelace sums over explicit points) so
they can serve as independent cross-checks of the quadrature path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import ClosureViolation
from .state import (
    DEFAULT_CLOSURE_TOL,
    DERIV_FD2,
    DERIV_SPECTRAL,
    CurveState,
    GeometricBounds,
)


def integrate_periodic(samples: np.ndarray) -> float:
    """Integrate one period of a uniformly sampled periodic function.

    Equivalent to the trapezoid rule, exact for trigonometric polynomials
    below the Nyquist mode.

    Raises
    ------
    ValueError
        For fewer than two samples.
    """
    return spectral.integrate(samples)


def second_derivative(samples: np.ndarray, method: str = DERIV_SPECTRAL) -> np.ndarray:
    """Second derivative of periodic samples.

    ``spectral`` multiplies modes by -k**2 (Nyquist included, keeping the
    operator symmetric); ``central-fd2`` is the 3-point periodic stencil.
    """
    if method == DERIV_SPECTRAL:
        return spectral.diff2(samples)
    if method == DERIV_FD2:
        return spectral.diff2_fd(samples)
    raise ValueError(f"unknown differentiation method '{method}'")


def first_derivative(samples: np.ndarray) -> np.ndarray:
    """Spectral first derivative of periodic samples."""
    return spectral.diff1(samples)


def length(state: CurveState) -> float:
    """Perimeter: the integral of the radius of curvature over the angle."""
    return integrate_periodic(state.rho)


def closure_residual(state: CurveState) -> tuple[float, float]:
    """First-harmonic content of the profile as the pair
    (integral of rho*cos, integral of rho*sin); (0, 0) iff the curve closes."""
    c1 = spectral.first_harmonic(state.rho) * (2.0 * np.pi / state.grid_size)
    return c1.real, -c1.imag


def support_function(state: CurveState, closure_tol: float = DEFAULT_CLOSURE_TOL) -> np.ndarray:
    """Support-function samples p(theta_j) recovered from the profile.

    Solves p'' + p = rho mode by mode (divide by 1 - k**2) and pins the
    first harmonic of p to zero, which places the curve's Steiner point at
    the origin and guarantees p > 0 for convex curves.

    Raises
    ------
    ClosureViolation
        If the profile's first-harmonic residual exceeds ``closure_tol``.
    """
    rho = state.rho
    m = rho.size
    spec = np.fft.rfft(rho)
    residual = 2.0 * np.pi * abs(spec[1]) / m
    if residual > closure_tol:
        raise ClosureViolation(
            f"closure residual {residual:.3e} exceeds tolerance {closure_tol:.1e}"
        )
    return np.fft.irfft(spectral.support_modes(spec), m)


def area(state: CurveState, closure_tol: float = DEFAULT_CLOSURE_TOL) -> float:
    """Enclosed area, 0.5 * integral(p * rho)."""
    p = support_function(state, closure_tol=closure_tol)
    return 0.5 * integrate_periodic(p * state.rho)


def lambda_nonlocal(state: CurveState, area_value: float, n: float) -> float:
    """Nonlocal multiplier integral(rho**(n+1)) / (2 * area).

    On a circle of radius r this equals r**(n-1), the value that makes the
    circle stationary.

    Raises
    ------
    ValueError
        For a non-positive area.
    """
    if area_value <= 0:
        raise ValueError("area must be positive")
    rho = state.rho
    return integrate_periodic(rho ** (n + 1.0)) / (2.0 * area_value)


def scaled_to_area(state: CurveState, target_area: float) -> CurveState:
    """Uniformly rescale the curve so it encloses ``target_area``."""
    if target_area <= 0:
        raise ValueError("target area must be positive")
    factor = math.sqrt(target_area / area(state))
    return CurveState(state.rho * factor, state.t)


def initial_bounds(state: CurveState, n: float) -> GeometricBounds:
    """Evaluate the run-constant bounds on the initial curve."""
    area0 = area(state)
    return GeometricBounds.from_scalars(
        area0=area0,
        length0=length(state),
        lam0=lambda_nonlocal(state, area0, n),
        n=n,
    )


@dataclass(frozen=True)
class EmbeddedCurve:
    """Planar points of a reconstructed curve plus its support samples."""

    t: float
    theta: np.ndarray
    rho: np.ndarray
    support: np.ndarray
    points: np.ndarray

    @property
    def theta_count(self) -> int:
        return self.theta.size

    def to_export_dict(self) -> dict:
        return {
            "t": self.t,
            "theta": self.theta.tolist(),
            "rho": self.rho.tolist(),
            "p": self.support.tolist(),
            "x": self.points[:, 0].tolist(),
            "y": self.points[:, 1].tolist(),
        }


def reconstruct(
    state: CurveState,
    oversample: int = 1,
    closure_tol: float = DEFAULT_CLOSURE_TOL,
) -> EmbeddedCurve:
    """Embed the curve in the plane from its support function.

    With tangent T = (cos, sin) and outward normal nu = (sin, -cos), the
    point at angle theta is X = p*nu + p'*T, whose derivative is rho*T.
    ``oversample`` > 1 evaluates the same trigonometric interpolant on a
    finer grid, which is how the polygon oracles reach tight tolerances.
    """
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    m = state.grid_size
    k_points = m * oversample
    p = support_function(state, closure_tol=closure_tol)
    if oversample > 1:
        p_dense = spectral.resample(p, k_points)
        rho_dense = spectral.resample(state.rho, k_points)
    else:
        p_dense = p
        rho_dense = state.rho.copy()
    dp = spectral.diff1(p_dense)
    theta = spectral.grid(k_points)
    cos_t, sin_t = spectral.trig_tables(k_points)
    x = p_dense * sin_t + dp * cos_t
    y = -p_dense * cos_t + dp * sin_t
    return EmbeddedCurve(
        t=state.t,
        theta=theta,
        rho=rho_dense,
        support=p_dense,
        points=np.column_stack([x, y]),
    )


def _points_of(curve) -> np.ndarray:
    points = curve.points if hasattr(curve, "points") else np.asarray(curve, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2 or points.shape[0] < 3:
        raise ValueError("need at least 3 planar points")
    return points


def shoelace_area(curve) -> float:
    """Signed polygon area (positive for counterclockwise orientation)."""
    pts = _points_of(curve)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_perimeter(curve) -> float:
    """Total edge length of the closed polygon through the points."""
    pts = _points_of(curve)
    return float(np.sum(np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)))


def polygon_is_convex(curve, tol: float = 1e-12) -> bool:
    """True when all consecutive edge cross products share one sign
    (up to ``tol`` relative to the squared edge scale)."""
    pts = _points_of(curve)
    edges = np.roll(pts, -1, axis=0) - pts
    cross = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
    scale = float(np.max(np.sum(edges**2, axis=1)))
    return bool(np.all(cross >= -tol * scale) or np.all(cross <= tol * scale))
