"""Semi-discrete right-hand side and time integration of the flow.

The evolution of the radius profile is

    d(rho)/dt = (rho**n)'' + rho**n - lam * rho,
    lam = integral(rho**(n+1)) / (2 * area),

with the area recomputed from the current profile at every evaluation.
Together with spectral differentiation this makes the discrete area an
exact invariant of the semi-discrete system (the quadrature pairing of
the support function with the right-hand side telescopes to the
first-harmonic content, which is zero for closed curves), so any area
drift observed in a run is purely a time-discretization effect.

Two steppers are provided: classical RK4 under a diffusive CFL limit,
and a first-order semi-implicit scheme whose constant-coefficient
stabilizer removes the step-size restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import spectral
from .diagnostics import DiagnosticsLog, GeometricSummary, summarize
from .errors import ConvexityViolation, NumericalBlowup
from .geometry import EmbeddedCurve, initial_bounds, reconstruct
from .state import DERIV_SPECTRAL, SCHEME_RK4, CurveState, FlowParams

TAIL_WARN_THRESHOLD = 1e-6

STABILIZER_CLOSURE = "closure-projection"
STABILIZER_AREA = "area-renormalization"


@dataclass(frozen=True)
class StepReport:
    """What one accepted step did."""

    dt_used: float
    rhs_max_norm: float
    stabilizers_applied: frozenset[str]
    post_step_summary: GeometricSummary


def _check_positive(rho: np.ndarray, floor: float, t: float) -> None:
    if rho.min() <= floor:
        j = int(np.argmin(rho))
        raise ConvexityViolation(
            f"rho = {rho[j]:.3e} at theta index {j}, t = {t:.6g} hit the positivity floor {floor:.1e}"
        )


def _rhs_arrays(rho: np.ndarray, n: float, deriv_method: str) -> np.ndarray:
    m = rho.size
    area_value = spectral.area_from_spectrum(np.fft.rfft(rho), m)
    phi = rho**n
    if deriv_method == DERIV_SPECTRAL:
        neg_k2 = spectral.operators(m)[1]
        d2phi = np.fft.irfft(np.fft.rfft(phi) * neg_k2, m)
    else:
        d2phi = spectral.diff2_fd(phi)
    lam = (np.pi / m) * float(np.dot(rho, phi)) / area_value
    return d2phi + phi - lam * rho


def rhs_rho(state: CurveState, params: FlowParams) -> np.ndarray:
    """Right-hand side in the radius formulation.

    Raises
    ------
    ConvexityViolation
        If any sample sits at or below the positivity floor.
    """
    _check_positive(state.rho, params.positivity_floor, state.t)
    return _rhs_arrays(state.rho, params.n, params.deriv_method)


def rhs_phi(phi: np.ndarray, params: FlowParams) -> np.ndarray:
    """Right-hand side in the power formulation phi = rho**n.

    Exposed for cross-validation: by the chain rule this must equal
    n * rho**(n-1) times the radius form evaluated at rho = phi**(1/n).
    """
    phi = np.asarray(phi, dtype=float)
    n = params.n
    _check_positive(phi, params.positivity_floor**n, 0.0)
    rho = phi ** (1.0 / n)
    m = rho.size
    area_value = spectral.area_from_spectrum(np.fft.rfft(rho), m)
    lam = (np.pi / m) * float(np.dot(rho, phi)) / area_value
    if params.deriv_method == DERIV_SPECTRAL:
        d2phi = spectral.diff2(phi)
    else:
        d2phi = spectral.diff2_fd(phi)
    return n * phi ** (1.0 - 1.0 / n) * (d2phi + phi - lam * rho)


def stable_dt(state: CurveState, params: FlowParams) -> float:
    """Diffusive CFL step: cfl * dtheta**2 / (2 * max(n * rho**(n-1))),
    capped by the snapshot interval."""
    dtheta = 2.0 * np.pi / state.grid_size
    diffusivity = params.n * float(np.max(state.rho ** (params.n - 1.0)))
    return min(params.cfl_factor * dtheta**2 / (2.0 * diffusivity), params.snapshot_interval)


def step(
    state: CurveState,
    params: FlowParams,
    dt: float | None = None,
    target_area: float | None = None,
) -> tuple[CurveState, StepReport]:
    """Advance one time step and summarize the result.

    ``dt`` defaults to the CFL-stable step.  With ``renormalize_area`` the
    profile is rescaled after the update so it encloses ``target_area``
    (the pre-step area when not given); with ``project_closure`` any
    first-harmonic drift is removed.

    Raises
    ------
    ConvexityViolation
        If the profile reaches the positivity floor.
    NumericalBlowup
        If the update produces non-finite values.
    """
    if dt is None:
        dt = stable_dt(state, params)
    if dt <= 0:
        raise ValueError("dt must be positive")

    rho = state.rho
    n = params.n
    floor = params.positivity_floor
    t = state.t

    k1 = rhs_rho(state, params)
    if params.scheme == SCHEME_RK4:
        def stage(r: np.ndarray) -> np.ndarray:
            _check_positive(r, floor, t)
            return _rhs_arrays(r, n, params.deriv_method)

        k2 = stage(rho + 0.5 * dt * k1)
        k3 = stage(rho + 0.5 * dt * k2)
        k4 = stage(rho + dt * k3)
        rho_new = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        # Semi-implicit: add and subtract the frozen top diffusivity d_max,
        # treating d_max * rho'' implicitly and the remainder explicitly:
        # (1 - dt*d_max*dtt) rho_new = rho + dt*(rhs(rho) - d_max*rho'').
        # Every Fourier mode then sees an amplification factor in (0, 1],
        # so the step size is not stability-limited.
        d_max = n * float(np.max(rho ** (n - 1.0)))
        explicit = rho + dt * (k1 - d_max * spectral.diff2(rho))
        spec = np.fft.rfft(explicit)
        neg_k2 = spectral.operators(rho.size)[1]
        rho_new = np.fft.irfft(spec / (1.0 - dt * d_max * neg_k2), rho.size)

    if not np.all(np.isfinite(rho_new)):
        raise NumericalBlowup(f"non-finite samples after step at t = {t:.6g}")

    applied = set()
    if params.project_closure:
        spec = np.fft.rfft(rho_new)
        spec[1] = 0.0
        rho_new = np.fft.irfft(spec, rho_new.size)
        applied.add(STABILIZER_CLOSURE)
    if params.renormalize_area:
        m = rho_new.size
        current = spectral.area_from_spectrum(np.fft.rfft(rho_new), m)
        if target_area is None:
            target_area = spectral.area_from_spectrum(np.fft.rfft(rho), m)
        rho_new = rho_new * math.sqrt(target_area / current)
        applied.add(STABILIZER_AREA)

    _check_positive(rho_new, floor, t + dt)
    new_state = CurveState(rho_new, t + dt)
    report = StepReport(
        dt_used=dt,
        rhs_max_norm=float(np.max(np.abs(k1))),
        stabilizers_applied=frozenset(applied),
        post_step_summary=summarize(new_state, n),
    )
    return new_state, report


def run(
    initial: CurveState,
    params: FlowParams,
    on_summary: Callable[[GeometricSummary], None] | None = None,
    on_snapshot: Callable[[int, EmbeddedCurve], None] | None = None,
) -> DiagnosticsLog:
    """Advance the flow to ``t_end``, recording a summary every step.

    Snapshots of the embedded curve are emitted through ``on_snapshot``
    at multiples of the snapshot interval (plus the initial and final
    instants).  Abnormal termination is recorded in ``log.error`` rather
    than raised, so a partial log is always returned.
    """
    log = DiagnosticsLog(n=params.n, bounds=initial_bounds(initial, params.n))

    def record(summary: GeometricSummary) -> None:
        log.summaries.append(summary)
        if on_summary is not None:
            on_summary(summary)

    tail_warned = False

    def check_tail(state: CurveState) -> None:
        nonlocal tail_warned
        if tail_warned:
            return
        fraction = spectral.tail_fraction(state.rho)
        if fraction > TAIL_WARN_THRESHOLD:
            log.warnings.append(
                f"spectral tail fraction {fraction:.2e} at t = {state.t:.6g}; "
                "the grid may under-resolve the profile"
            )
            tail_warned = True

    snap_index = 0
    last_snap_t = -math.inf

    def emit_snapshot(state: CurveState) -> None:
        nonlocal snap_index, last_snap_t
        if on_snapshot is not None:
            on_snapshot(snap_index, reconstruct(state, closure_tol=math.inf))
        snap_index += 1
        last_snap_t = state.t

    state = initial
    record(summarize(state, params.n))
    target_area = log.summaries[0].A
    check_tail(state)
    emit_snapshot(state)

    t_end = params.t_end
    eps = 1e-12 * max(1.0, t_end)
    next_snap = params.snapshot_interval
    while state.t < t_end - eps:
        dt = min(stable_dt(state, params), t_end - state.t)
        try:
            state, report = step(state, params, dt=dt, target_area=target_area)
        except (ConvexityViolation, NumericalBlowup) as exc:
            log.error = f"{type(exc).__name__}: {exc}"
            break
        record(report.post_step_summary)
        while state.t >= next_snap - eps:
            emit_snapshot(state)
            check_tail(state)
            next_snap += params.snapshot_interval

    if log.error is None and state.t > last_snap_t + eps:
        emit_snapshot(state)
    check_tail(state)
    log.final_state = state
    return log
