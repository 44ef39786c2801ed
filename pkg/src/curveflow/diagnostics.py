"""Per-instant summaries, claim monitors, and decay-rate estimation.

A run produces a ``DiagnosticsLog``: one ``GeometricSummary`` per time
step plus warnings and an optional abort reason.  ``build_verdict`` turns
a log into per-claim pass/fail entries covering conservation, the
monotone quantities, the a-priori bounds, the integral inequality, and
the exponential circularization checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import InsufficientData
from .state import CurveState, GeometricBounds
from .geometry import integrate_periodic, support_function

ISO_FLOOR = 1e-12  # below this the isoperimetric deficit is round-off
TRANSIENT_FRACTION = 0.05  # early window excluded from the decay fit
CIRCULARIZING_HORIZON = 5.0  # minimum horizon for end-state claims


@dataclass(frozen=True, slots=True)
class GeometricSummary:
    """Scalar snapshot of one instant.

    ``phi_max`` is the maximum of phi**2 + (phi')**2 with phi = rho**n,
    the quantity whose running maximum obeys a maximum principle;
    ``flux`` is the analytic length derivative integral(rho**n) - L*lam.
    """

    t: float
    L: float
    A: float
    lam: float
    rho_min: float
    rho_max: float
    iso_diff: float
    iso_ratio: float
    closure_norm: float
    phi_max: float
    grad_phi_max: float
    flux: float
    phi_thth_max: float = math.nan


@dataclass
class DiagnosticsLog:
    """Time series of summaries for one run."""

    n: float
    bounds: GeometricBounds
    summaries: list[GeometricSummary] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    error: str | None = None
    final_state: CurveState | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.summaries])

    @property
    def horizon(self) -> float:
        if len(self.summaries) < 2:
            return 0.0
        return self.summaries[-1].t - self.summaries[0].t


def summarize(state: CurveState, n: float) -> GeometricSummary:
    """Compute every summary field from one state."""
    rho = state.rho
    m = rho.size
    spec_rho = np.fft.rfft(rho)
    closure_norm = 2.0 * np.pi * abs(spec_rho[1]) / m

    area_value = spectral.area_from_spectrum(spec_rho, m)
    length_value = 2.0 * np.pi * spec_rho[0].real / m

    phi = rho**n
    ik, neg_k2 = spectral.operators(m)[:2]
    spec_phi = np.fft.rfft(phi)
    dphi = np.fft.irfft(spec_phi * ik, m)
    d2phi = np.fft.irfft(spec_phi * neg_k2, m)
    lam = (np.pi / m) * float(np.dot(rho, phi)) / area_value
    flux = 2.0 * np.pi * spec_phi[0].real / m - length_value * lam

    return GeometricSummary(
        t=state.t,
        L=length_value,
        A=area_value,
        lam=lam,
        rho_min=float(rho.min()),
        rho_max=float(rho.max()),
        iso_diff=length_value**2 - 4.0 * np.pi * area_value,
        iso_ratio=length_value**2 / (4.0 * np.pi * area_value),
        closure_norm=closure_norm,
        phi_max=float(np.max(phi**2 + dphi**2)),
        grad_phi_max=float(np.max(np.abs(dphi))),
        flux=flux,
        phi_thth_max=float(np.max(np.abs(d2phi))),
    )


@dataclass(frozen=True)
class ClaimCheck:
    """Outcome of one monitored claim over a whole log."""

    claim_id: str
    holds: bool
    worst_margin: float
    worst_time: float
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "id": self.claim_id,
            "holds": self.holds,
            "worst_margin": _json_float(self.worst_margin),
            "worst_time": _json_float(self.worst_time),
            "note": self.note,
        }


def _json_float(x: float | None):
    if x is None or not math.isfinite(x):
        return None
    return x


def _worst(margins: np.ndarray, times: np.ndarray) -> tuple[float, float]:
    i = int(np.argmin(margins))
    return float(margins[i]), float(times[i])


def _per_instant_claim(claim_id: str, margins: np.ndarray, times: np.ndarray, note: str = "") -> ClaimCheck:
    worst_margin, worst_time = _worst(margins, times)
    return ClaimCheck(claim_id, bool(worst_margin >= 0.0), worst_margin, worst_time, note)


def check_bounds(log: DiagnosticsLog, bounds: GeometricBounds, slack: float = 1e-6) -> list[ClaimCheck]:
    """Verify the a-priori bound claims at every recorded instant.

    Covers the bracket on the nonlocal multiplier, the perimeter bracket,
    the radius bracketing of the limit radius, and the running-maximum
    principle for phi**2 + (phi')**2.  ``slack`` is relative.

    Raises
    ------
    ValueError
        For an empty log.
    """
    if not log.summaries:
        raise ValueError("diagnostics log is empty")
    t = log.column("t")
    lam = log.column("lam")
    length_col = log.column("L")
    rho_min = log.column("rho_min")
    rho_max = log.column("rho_max")
    phi_big = log.column("phi_max")

    checks = [
        _per_instant_claim(
            "lambda-bounds",
            np.minimum(lam - bounds.lam_lower * (1.0 - slack), bounds.lam_upper * (1.0 + slack) - lam),
            t,
        ),
        _per_instant_claim(
            "length-bounds",
            np.minimum(
                length_col - bounds.length_lower * (1.0 - slack),
                bounds.length_upper * (1.0 + slack) - length_col,
            ),
            t,
        ),
        _per_instant_claim(
            "radius-bracketing",
            np.minimum(
                bounds.limit_radius * (1.0 + slack) - rho_min,
                rho_max - bounds.limit_radius * (1.0 - slack),
            ),
            t,
        ),
    ]

    # Running-maximum form: sup over [0, t] of Phi must not exceed the
    # larger of sup over [0, t] of phi**2 and Phi at t = 0.
    running_phi_big = np.maximum.accumulate(phi_big)
    running_sq = np.maximum.accumulate(rho_max ** (2.0 * log.n))
    cap = np.maximum(running_sq, phi_big[0])
    checks.append(
        _per_instant_claim("phi-max-principle", cap * (1.0 + slack) - running_phi_big, t)
    )
    return checks


def fit_decay_rate(
    series,
    floor: float = ISO_FLOOR,
    transient_fraction: float = TRANSIENT_FRACTION,
) -> tuple[float, float]:
    """Least-squares exponential rate of a decaying positive series.

    Fits log(y) versus t over the window that excludes the initial
    transient (first ``transient_fraction`` of the horizon) and the
    round-off floor (y <= ``floor``); returns (rate, r_squared) where the
    fitted model is y ~ exp(-rate * t).

    Raises
    ------
    InsufficientData
        When fewer than 10 usable points remain.
    """
    pairs = np.asarray(list(series), dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("series must contain (t, value) pairs")
    t, y = pairs[:, 0], pairs[:, 1]
    t0, t1 = t[0], t[-1]
    keep = (y > floor) & (t >= t0 + transient_fraction * (t1 - t0))
    if int(keep.sum()) < 10:
        raise InsufficientData(
            f"only {int(keep.sum())} usable points above the floor {floor:.1e}"
        )
    tw, yw = t[keep], np.log(y[keep])
    slope, intercept = np.polyfit(tw, yw, 1)
    fitted = slope * tw + intercept
    ss_res = float(np.sum((yw - fitted) ** 2))
    ss_tot = float(np.sum((yw - yw.mean()) ** 2))
    if ss_tot > 0.0:
        r_squared = 1.0 - ss_res / ss_tot
    else:
        r_squared = 1.0 if ss_res < 1e-20 else 0.0
    return -float(slope), r_squared


def check_limit_inequality(state: CurveState, n: float) -> tuple[float, float, float]:
    """Evaluate the curve-versus-circle integral inequality on one state.

    Returns (lhs, rhs, margin) with lhs = integral(rho**(n+1)) and
    rhs = 2*pi*(A/pi)**((n+1)/2); the margin lhs - rhs is nonnegative for
    every convex curve and zero exactly on circles.
    """
    rho = state.rho
    p = support_function(state)
    area_value = 0.5 * integrate_periodic(p * rho)
    lhs = integrate_periodic(rho ** (n + 1.0))
    rhs = 2.0 * np.pi * (area_value / np.pi) ** ((n + 1.0) / 2.0)
    return lhs, rhs, lhs - rhs


def _limit_inequality_series(log: DiagnosticsLog) -> tuple[np.ndarray, np.ndarray]:
    """(lhs, rhs) per instant, from recorded scalars only."""
    area_col = log.column("A")
    lam = log.column("lam")
    lhs = 2.0 * area_col * lam
    rhs = 2.0 * np.pi * (area_col / np.pi) ** ((log.n + 1.0) / 2.0)
    return lhs, rhs


def check_length_flux(log: DiagnosticsLog, slack: float = 1e-9) -> ClaimCheck:
    """Check the analytic length derivative integral(rho**n) - L*lam.

    Asserts (a) the flux is nonpositive up to slack at every instant,
    (b) it has collapsed by a factor 100 at the end of the run, and
    (c) it agrees with the centered difference of the recorded L(t).

    Raises
    ------
    InsufficientData
        For a horizon shorter than 5 time units.
    """
    if log.horizon < CIRCULARIZING_HORIZON:
        raise InsufficientData(
            f"flux check needs a horizon >= {CIRCULARIZING_HORIZON}, got {log.horizon:.3g}"
        )
    t = log.column("t")
    flux = log.column("flux")
    scale = abs(log.summaries[0].L * log.summaries[0].lam)
    margins = slack * scale - flux
    worst_margin, worst_time = _worst(margins, t)
    holds = worst_margin >= 0.0
    notes = []

    decay_target = max(abs(flux[0]) / 100.0, ISO_FLOOR * scale)
    if abs(flux[-1]) >= decay_target:
        holds = False
        notes.append(f"final |flux| {abs(flux[-1]):.3e} has not collapsed below {decay_target:.3e}")

    # Centered-difference cross-check of dL/dt against the recorded flux.
    if t.size >= 3:
        dl = (log.column("L")[2:] - log.column("L")[:-2]) / (t[2:] - t[:-2])
        mismatch = float(np.max(np.abs(dl - flux[1:-1])))
        step_scale = float(np.max(np.diff(t)))
        flux_scale = float(np.max(np.abs(flux))) + ISO_FLOOR
        tol = 2.0 * step_scale * flux_scale + 1e-9 * scale
        if mismatch > tol:
            holds = False
            notes.append(f"flux disagrees with differenced L by {mismatch:.3e} (tol {tol:.3e})")

    return ClaimCheck("length-flux", holds, worst_margin, worst_time, "; ".join(notes))


def check_derivative_bounds(log: DiagnosticsLog, growth_factor: float = 2.0) -> ClaimCheck:
    """Check uniform-in-time control of the first two phi derivatives.

    The running maxima of |phi'| and |phi''| must stay within
    ``growth_factor`` times their maxima over the first tenth of the run,
    and both must have decayed by 1e-3 at the end for long runs.
    """
    if not log.summaries:
        raise ValueError("diagnostics log is empty")
    t = log.column("t")
    early = t <= t[0] + 0.1 * max(log.horizon, 1e-300)
    phi_scale = math.sqrt(max(float(log.column("phi_max").max()), 1e-300))
    floor = 1e-12 * max(1.0, phi_scale)

    margins = []
    notes = []
    worst_margin = math.inf
    worst_time = t[0]
    for name, label in (("grad_phi_max", "|phi'|"), ("phi_thth_max", "|phi''|")):
        series = log.column(name)
        if not np.all(np.isfinite(series)):
            notes.append(f"{label} series unavailable; skipped")
            continue
        cap = growth_factor * float(series[early].max()) + floor
        margin = cap - float(series.max())
        if margin < worst_margin:
            worst_margin = margin
            worst_time = t[int(np.argmax(series))]
        margins.append(margin)
        if log.horizon >= CIRCULARIZING_HORIZON:
            target = 1e-3 * float(series[0]) + floor
            if series[-1] >= target:
                margins.append(-1.0)
                notes.append(f"final {label} {series[-1]:.3e} has not decayed below {target:.3e}")
    holds = all(m >= 0.0 for m in margins) if margins else True
    return ClaimCheck("derivative-bounds", holds, worst_margin, float(worst_time), "; ".join(notes))


@dataclass
class VerdictReport:
    """Per-claim results plus the fitted circularization quantities."""

    claims: list[ClaimCheck]
    fitted_decay_rate: float | None
    fit_r_squared: float | None
    paper_decay_rate: float
    final_radius_error: float | None
    warnings: list[str] = field(default_factory=list)
    error: str | None = None

    @property
    def all_passed(self) -> bool:
        return self.error is None and all(c.holds for c in self.claims)

    def to_dict(self) -> dict:
        return {
            "claims": [c.to_dict() for c in self.claims],
            "fitted_decay_rate": _json_float(self.fitted_decay_rate),
            "fit_r_squared": _json_float(self.fit_r_squared),
            "guaranteed_decay_rate": _json_float(self.paper_decay_rate),
            "final_radius_error": _json_float(self.final_radius_error),
            "warnings": list(self.warnings),
            "error": self.error,
            "all_passed": self.all_passed,
        }


def build_verdict(
    log: DiagnosticsLog,
    bound_slack: float = 1e-6,
    monotone_slack: float = 1e-9,
    length_slack: float = 1e-10,
    area_tol: float = 1e-8,
    final_radius_tol: float = 1e-4,
) -> VerdictReport:
    """Run every monitored claim against a log and assemble the report."""
    if not log.summaries:
        raise ValueError("diagnostics log is empty")
    bounds = log.bounds
    t = log.column("t")
    area_col = log.column("A")
    length_col = log.column("L")
    lam = log.column("lam")
    rho_min = log.column("rho_min")
    closure = log.column("closure_norm")
    iso_diff = log.column("iso_diff")
    iso_ratio = log.column("iso_ratio")
    area0 = area_col[0]
    circularizing = log.horizon >= CIRCULARIZING_HORIZON

    claims: list[ClaimCheck] = [
        ClaimCheck(
            "run-completed",
            log.error is None,
            0.0 if log.error is None else -1.0,
            float(t[-1]),
            log.error or "",
        ),
        _per_instant_claim("area-conservation", area_tol - np.abs(area_col - area0) / area0, t),
    ]

    def monotone_claim(claim_id: str, series: np.ndarray, slack: float) -> ClaimCheck:
        if series.size < 2:
            return ClaimCheck(claim_id, True, math.inf, float(t[0]), "single sample")
        margins = slack * abs(series[0]) - (series[1:] - series[:-1])
        return _per_instant_claim(claim_id, margins, t[1:])

    claims.append(monotone_claim("length-monotone", length_col, length_slack))
    claims.append(monotone_claim("lambda-monotone", lam, monotone_slack))
    claims.append(monotone_claim("iso-ratio-monotone", iso_ratio, monotone_slack))
    claims.extend(check_bounds(log, bounds, slack=bound_slack))

    # Curvature growth ceiling, checked in log form to avoid overflow:
    # log(kappa_max(t) / kappa_max(0)) <= lam_upper * t (+ slack).
    kappa_growth = np.log(rho_min[0] / rho_min) - bounds.lam_upper * t
    claims.append(_per_instant_claim("curvature-growth", math.log1p(1e-6) - kappa_growth, t))

    claims.append(
        _per_instant_claim(
            "closure-decay", closure[0] + 1e-12 * length_col[0] - closure, t
        )
    )
    claims.append(_per_instant_claim("iso-positivity", iso_diff + 1e-8 * length_col**2, t))

    lhs, rhs = _limit_inequality_series(log)
    margin = lhs - rhs
    limit_claim = _per_instant_claim("limit-inequality", margin + 1e-9 * lhs, t)
    if circularizing and limit_claim.holds and margin[-1] >= 1e-6 * lhs[-1]:
        limit_claim = ClaimCheck(
            "limit-inequality",
            False,
            limit_claim.worst_margin,
            float(t[-1]),
            f"final margin {margin[-1]:.3e} has not closed below 1e-6 of lhs",
        )
    claims.append(limit_claim)

    if circularizing:
        claims.append(check_length_flux(log))
    else:
        claims.append(
            ClaimCheck("length-flux", True, math.inf, float(t[-1]), "horizon too short; skipped")
        )
    claims.append(check_derivative_bounds(log))

    fitted_rate: float | None = None
    r_squared: float | None = None
    if iso_diff[0] <= 100.0 * ISO_FLOOR:
        claims.append(
            ClaimCheck(
                "decay-rate",
                True,
                math.inf,
                float(t[0]),
                "isoperimetric deficit at round-off from the start; nothing to fit",
            )
        )
    else:
        try:
            fitted_rate, r_squared = fit_decay_rate(np.column_stack([t, iso_diff]))
            rate_ok = fitted_rate >= 0.99 * bounds.decay_rate and r_squared > 0.99
            claims.append(
                ClaimCheck(
                    "decay-rate",
                    rate_ok,
                    fitted_rate - 0.99 * bounds.decay_rate,
                    float(t[-1]),
                    f"fitted {fitted_rate:.4g} vs guaranteed {bounds.decay_rate:.4g}, r2 {r_squared:.6f}",
                )
            )
        except InsufficientData as exc:
            claims.append(ClaimCheck("decay-rate", False, -1.0, float(t[-1]), str(exc)))

    final_radius_error: float | None = None
    if circularizing and log.error is None:
        last = log.summaries[-1]
        final_radius_error = max(
            abs(last.rho_max - bounds.limit_radius), abs(last.rho_min - bounds.limit_radius)
        )
        claims.append(
            ClaimCheck(
                "final-radius",
                final_radius_error < final_radius_tol,
                final_radius_tol - final_radius_error,
                float(t[-1]),
                f"sup |rho - {bounds.limit_radius:.6g}| = {final_radius_error:.3e}",
            )
        )
    else:
        claims.append(
            ClaimCheck(
                "final-radius", log.error is None, math.inf, float(t[-1]),
                "horizon too short; skipped" if log.error is None else "run aborted",
            )
        )

    return VerdictReport(
        claims=claims,
        fitted_decay_rate=fitted_rate,
        fit_r_squared=r_squared,
        paper_decay_rate=bounds.decay_rate,
        final_radius_error=final_radius_error,
        warnings=list(log.warnings),
        error=log.error,
    )
