"""FFT primitives on a uniform periodic grid.

All routines assume samples of a real 2*pi-periodic function taken at
theta_j = 2*pi*j/m.  Differentiation uses the symmetric wavenumber set;
for even m the Nyquist mode gets -k**2 under even derivatives and 0 under
odd ones, which keeps every operator real and self-adjoint with respect
to the uniform quadrature inner product.

The per-size multiplier arrays are cached because the stepping loop hits
them tens of thousands of times per run.
"""

from __future__ import annotations

import numpy as np

_TRIG_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}
_OP_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}


def grid(m: int) -> np.ndarray:
    """Sample angles theta_j = 2*pi*j/m."""
    return 2.0 * np.pi * np.arange(m) / m


def trig_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached (cos(theta_j), sin(theta_j)) tables."""
    tables = _TRIG_CACHE.get(m)
    if tables is None:
        theta = grid(m)
        tables = (np.cos(theta), np.sin(theta))
        _TRIG_CACHE[m] = tables
    return tables


def operators(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Cached rfft-layout multiplier arrays for grid size m:
    (ik with zeroed Nyquist, -k**2, support multiplier, Parseval weights)."""
    ops = _OP_CACHE.get(m)
    if ops is None:
        k = np.arange(m // 2 + 1, dtype=float)
        ik = 1j * k
        if m % 2 == 0:
            ik[-1] = 0.0
        neg_k2 = -(k**2)
        support = np.zeros(k.size)
        mask = k != 1.0
        support[mask] = 1.0 / (1.0 - k[mask] ** 2)
        weights = np.full(k.size, 2.0)
        weights[0] = 1.0
        if m % 2 == 0:
            weights[-1] = 1.0
        ops = (ik, neg_k2, support, weights)
        _OP_CACHE[m] = ops
    return ops


def integrate(samples: np.ndarray) -> float:
    """Trapezoid rule over one period; on this grid it is the plain mean
    times 2*pi and is exact for trigonometric polynomials below Nyquist."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        raise ValueError("integrate needs at least 2 samples")
    return 2.0 * np.pi * float(np.add.reduce(samples)) / samples.size


def diff1(samples: np.ndarray) -> np.ndarray:
    """Spectral first derivative (Nyquist mode zeroed)."""
    samples = np.asarray(samples, dtype=float)
    m = samples.size
    ik = operators(m)[0]
    return np.fft.irfft(np.fft.rfft(samples) * ik, m)


def diff2(samples: np.ndarray) -> np.ndarray:
    """Spectral second derivative (Nyquist mode kept, factor -k**2)."""
    samples = np.asarray(samples, dtype=float)
    m = samples.size
    neg_k2 = operators(m)[1]
    return np.fft.irfft(np.fft.rfft(samples) * neg_k2, m)


def diff2_fd(samples: np.ndarray) -> np.ndarray:
    """Periodic 3-point central second difference."""
    samples = np.asarray(samples, dtype=float)
    dtheta = 2.0 * np.pi / samples.size
    return (np.roll(samples, -1) - 2.0 * samples + np.roll(samples, 1)) / dtheta**2


def support_modes(rho_spec: np.ndarray) -> np.ndarray:
    """Mode-wise solve of p'' + p = rho: divide by (1 - k**2), pin k = 1 to
    zero.  Pinning removes the translation freedom of the embedding (the
    curve's Steiner point sits at the origin)."""
    m = 2 * (rho_spec.size - 1)
    return rho_spec * operators(m)[2]


def area_from_spectrum(rho_spec: np.ndarray, m: int) -> float:
    """Enclosed area evaluated in spectral space.

    Parseval form of 0.5 * integral(p * rho) with p the pinned support
    solve; identical to the quadrature value up to round-off.
    """
    _, _, support, weights = operators(m)
    return np.pi / m**2 * float(np.add.reduce(weights * support * np.abs(rho_spec) ** 2))


def first_harmonic(samples: np.ndarray) -> complex:
    """Raw rfft bin 1; Re gives the cos component sum, -Im the sin one."""
    return complex(np.fft.rfft(np.asarray(samples, dtype=float))[1])


def mode_amplitude(samples: np.ndarray, k: int) -> float:
    """Real amplitude of mode k, i.e. c with c*cos(k*theta + phase)."""
    samples = np.asarray(samples, dtype=float)
    m = samples.size
    spec = np.fft.rfft(samples)
    if k == 0:
        return abs(spec[0]) / m
    if m % 2 == 0 and k == m // 2:
        return abs(spec[k]) / m
    return 2.0 * abs(spec[k]) / m


def resample(samples: np.ndarray, points: int) -> np.ndarray:
    """Trigonometric interpolation onto a finer uniform grid."""
    samples = np.asarray(samples, dtype=float)
    m = samples.size
    if points == m:
        return samples.copy()
    if points < m:
        raise ValueError("resample only upsamples")
    spec = np.fft.rfft(samples)
    out = np.zeros(points // 2 + 1, dtype=complex)
    out[: spec.size] = spec
    if m % 2 == 0:
        out[m // 2] *= 0.5  # split the Nyquist bin symmetrically
    return np.fft.irfft(out, points) * (points / m)


def tail_fraction(samples: np.ndarray) -> float:
    """Fraction of non-constant spectral energy sitting above m/4.

    Values near zero mean the profile is comfortably resolved; order-one
    values mean the grid is too coarse for its highest active mode.
    """
    samples = np.asarray(samples, dtype=float)
    spec = np.fft.rfft(samples)
    power = np.abs(spec) ** 2
    total = float(power[1:].sum())
    if total == 0.0:
        return 0.0
    cut = samples.size // 4
    return float(power[cut + 1 :].sum()) / total
