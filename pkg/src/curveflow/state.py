"""Evolving state, run parameters, and initial-curve constructors.

The simulation state is the radius-of-curvature profile rho(theta) sampled
on a uniform periodic grid of the tangent angle.  A strictly positive
profile with no first-harmonic content describes a closed strictly convex
plane curve, so every constructor validates positivity and closure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import spectral
from .errors import ClosureViolation, ConvexityViolation

SCHEME_RK4 = "explicit-rk4"
SCHEME_SEMI_IMPLICIT = "stabilized-semi-implicit"
SCHEMES = (SCHEME_RK4, SCHEME_SEMI_IMPLICIT)

DERIV_SPECTRAL = "spectral"
DERIV_FD2 = "central-fd2"
DERIV_METHODS = (DERIV_SPECTRAL, DERIV_FD2)

MIN_GRID_SIZE = 16
DEFAULT_CLOSURE_TOL = 1e-8
DEFAULT_POSITIVITY_FLOOR = 1e-8


@dataclass(frozen=True)
class FlowParams:
    """Physical and numerical parameters of a single run.

    ``n`` is the curvature exponent of the normal speed; everything else
    controls the discretization.  ``positivity_floor`` is an absolute
    radius threshold meant to sit around 1e-8 times the initial mean
    radius, separating genuine convexity loss from round-off.
    """

    n: float
    grid_size: int = 128
    scheme: str = SCHEME_RK4
    cfl_factor: float = 0.5
    t_end: float = 10.0
    snapshot_interval: float = 0.5
    closure_tol: float = DEFAULT_CLOSURE_TOL
    positivity_floor: float = DEFAULT_POSITIVITY_FLOOR
    project_closure: bool = False
    renormalize_area: bool = False
    deriv_method: str = DERIV_SPECTRAL

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError("n must be > 0")
        if self.grid_size < MIN_GRID_SIZE or self.grid_size % 2 != 0:
            raise ValueError(f"grid_size must be even and >= {MIN_GRID_SIZE}")
        if not 0.0 < self.cfl_factor <= 1.0:
            raise ValueError("cfl_factor must lie in (0, 1]")
        if not self.t_end > 0:
            raise ValueError("t_end must be > 0")
        if not self.snapshot_interval > 0:
            raise ValueError("snapshot_interval must be > 0")
        if not self.closure_tol > 0:
            raise ValueError("closure_tol must be > 0")
        if not self.positivity_floor > 0:
            raise ValueError("positivity_floor must be > 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.deriv_method not in DERIV_METHODS:
            raise ValueError(f"deriv_method must be one of {DERIV_METHODS}")


@dataclass(frozen=True)
class CurveState:
    """Radius-of-curvature samples rho(theta_j) at time t.

    Instances are immutable values: the sample array is copied in and
    marked read-only, and the stepping loop always builds new states.
    """

    rho: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        arr = np.array(self.rho, dtype=float)
        if arr.ndim != 1:
            raise ValueError("rho must be a 1-d sample array")
        arr.setflags(write=False)
        object.__setattr__(self, "rho", arr)
        object.__setattr__(self, "t", float(self.t))

    @property
    def grid_size(self) -> int:
        return self.rho.size

    @property
    def theta(self) -> np.ndarray:
        return spectral.grid(self.rho.size)


@dataclass(frozen=True)
class GeometricBounds:
    """Run-constant bounds derived once from the initial curve.

    ``lam_lower``/``lam_upper`` bracket the nonlocal multiplier for all
    time, ``length_lower``/``length_upper`` bracket the perimeter,
    ``decay_rate`` is the guaranteed exponential rate of the isoperimetric
    deficit, and ``limit_radius`` is the radius of the limiting circle.
    """

    lam_lower: float
    lam_upper: float
    length_lower: float
    length_upper: float
    decay_rate: float
    limit_radius: float

    @classmethod
    def from_scalars(cls, area0: float, length0: float, lam0: float, n: float) -> "GeometricBounds":
        if area0 <= 0:
            raise ValueError("initial area must be positive")
        lam_lower = (4.0 * np.pi * area0) ** ((n + 1.0) / 2.0) / (
            2.0 * area0 * (2.0 * np.pi) ** n
        )
        return cls(
            lam_lower=lam_lower,
            lam_upper=lam0,
            length_lower=math.sqrt(4.0 * np.pi * area0),
            length_upper=length0,
            decay_rate=2.0 * (area0 / np.pi) ** ((n - 1.0) / 2.0),
            limit_radius=math.sqrt(area0 / np.pi),
        )


def _check_grid_size(m: int) -> None:
    if m < MIN_GRID_SIZE or m % 2 != 0:
        raise ValueError(f"grid size must be even and >= {MIN_GRID_SIZE}, got {m}")


def closure_components(rho: np.ndarray) -> tuple[float, float]:
    """(integral of rho*cos, integral of rho*sin); both vanish iff the
    profile describes a closed curve."""
    rho = np.asarray(rho, dtype=float)
    c1 = spectral.first_harmonic(rho) * (2.0 * np.pi / rho.size)
    return c1.real, -c1.imag


def validate_state(
    rho: np.ndarray,
    closure_tol: float = DEFAULT_CLOSURE_TOL,
    positivity_floor: float = DEFAULT_POSITIVITY_FLOOR,
) -> None:
    """Raise if a sample array fails the convexity or closure invariant."""
    rho = np.asarray(rho, dtype=float)
    _check_grid_size(rho.size)
    if not np.all(np.isfinite(rho)):
        raise ValueError("rho contains non-finite samples")
    if rho.min() <= positivity_floor:
        j = int(np.argmin(rho))
        raise ConvexityViolation(
            f"rho = {rho[j]:.3e} at theta index {j} is at or below the floor {positivity_floor:.1e}"
        )
    cx, cy = closure_components(rho)
    residual = math.hypot(cx, cy)
    if residual > closure_tol:
        raise ClosureViolation(
            f"closure residual {residual:.3e} exceeds tolerance {closure_tol:.1e}"
        )


def make_circle(r: float, m: int) -> CurveState:
    """Circle of radius ``r``: the stationary profile rho == r.

    Raises
    ------
    ValueError
        For non-positive radius or an invalid grid size.
    """
    if not r > 0:
        raise ValueError("circle radius must be > 0")
    _check_grid_size(m)
    return CurveState(np.full(m, float(r)), 0.0)


def make_fourier(
    a0: float,
    coeffs: Iterable[tuple[int, float, float]],
    m: int,
    positivity_floor: float | None = None,
) -> CurveState:
    """Band-limited profile rho = a0 + sum(a_k cos(k theta) + b_k sin(k theta)).

    Parameters
    ----------
    a0:
        Mean radius (mode 0).
    coeffs:
        Triples ``(k, a_k, b_k)`` with integer ``k >= 2``.  Mode 1 is
        rejected because it would break the closure condition.
    m:
        Grid size (even, >= 16); every ``k`` must stay below m/2.
    positivity_floor:
        Convexity threshold; defaults to 1e-8 * |a0|.

    Raises
    ------
    ClosureViolation
        If any ``k == 1`` term is supplied.
    ConvexityViolation
        If the sampled profile is not strictly positive above the floor.
    """
    _check_grid_size(m)
    if positivity_floor is None:
        positivity_floor = DEFAULT_POSITIVITY_FLOOR * abs(a0)
    theta = spectral.grid(m)
    rho = np.full(m, float(a0))
    for k, a_k, b_k in coeffs:
        if int(k) != k or k < 1:
            raise ValueError(f"mode index must be an integer >= 2, got {k}")
        if k == 1:
            raise ClosureViolation("mode-1 coefficients are not allowed (curve would not close)")
        if k >= m // 2:
            raise ValueError(f"mode {k} is not representable on a grid of size {m}")
        rho += a_k * np.cos(k * theta) + b_k * np.sin(k * theta)
    if rho.min() <= positivity_floor:
        j = int(np.argmin(rho))
        raise ConvexityViolation(
            f"profile minimum {rho[j]:.3e} at theta index {j} is not strictly positive"
        )
    return CurveState(rho, 0.0)


def make_ellipse(a: float, b: float, m: int) -> CurveState:
    """Ellipse with semi-axes ``a`` and ``b``.

    The profile is sampled through the ellipse's support function
    h(theta) = sqrt(a^2 cos^2 + b^2 sin^2) as rho = h + h'', with the
    second derivative taken spectrally.
    """
    if not (a > 0 and b > 0):
        raise ValueError("ellipse semi-axes must be > 0")
    _check_grid_size(m)
    theta = spectral.grid(m)
    h = np.sqrt((a * np.cos(theta)) ** 2 + (b * np.sin(theta)) ** 2)
    rho = h + spectral.diff2(h)
    return CurveState(rho, 0.0)


def from_raw(
    source: dict | str | Path,
    closure_tol: float = DEFAULT_CLOSURE_TOL,
    positivity_floor: float = DEFAULT_POSITIVITY_FLOOR,
) -> CurveState:
    """Build a state from the raw-import JSON schema.

    The schema is ``{"theta_count": M, "rho": [...], "t": 0.0}``; the
    samples must satisfy the same invariants the constructors enforce.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = source
    for key in ("theta_count", "rho"):
        if key not in data:
            raise ValueError(f"raw import is missing key '{key}'")
    rho = np.asarray(data["rho"], dtype=float)
    if rho.size != int(data["theta_count"]):
        raise ValueError("theta_count does not match the number of rho samples")
    t = float(data.get("t", 0.0))
    if not math.isfinite(t) or t < 0:
        raise ValueError("t must be a finite non-negative number")
    validate_state(rho, closure_tol=closure_tol, positivity_floor=positivity_floor)
    return CurveState(rho, t)
