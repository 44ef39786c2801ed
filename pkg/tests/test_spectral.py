import numpy as np
import pytest

from curveflow import spectral


def test_grid_is_uniform_and_periodic():
    theta = spectral.grid(16)
    assert theta[0] == 0.0
    assert np.allclose(np.diff(theta), 2 * np.pi / 16)
    assert theta[-1] < 2 * np.pi


def test_diff1_eigenfunction():
    theta = spectral.grid(64)
    d = spectral.diff1(np.sin(5 * theta))
    assert np.max(np.abs(d - 5 * np.cos(5 * theta))) < 1e-12


def test_diff1_kills_nyquist():
    m = 32
    theta = spectral.grid(m)
    nyq = np.cos((m // 2) * theta)
    assert np.max(np.abs(spectral.diff1(nyq))) < 1e-12


def test_diff2_keeps_nyquist_symmetric():
    m = 32
    theta = spectral.grid(m)
    nyq = np.cos((m // 2) * theta)
    d2 = spectral.diff2(nyq)
    assert np.max(np.abs(d2 + (m // 2) ** 2 * nyq)) < 1e-10


def test_resample_matches_dense_evaluation():
    m = 16
    theta = spectral.grid(m)
    samples = 1.0 + 0.4 * np.cos(2 * theta) - 0.1 * np.sin(5 * theta)
    dense = spectral.resample(samples, 8 * m)
    theta_dense = spectral.grid(8 * m)
    exact = 1.0 + 0.4 * np.cos(2 * theta_dense) - 0.1 * np.sin(5 * theta_dense)
    assert np.max(np.abs(dense - exact)) < 1e-13


def test_resample_rejects_downsampling():
    with pytest.raises(ValueError):
        spectral.resample(np.ones(16), 8)


def test_mode_amplitude():
    theta = spectral.grid(64)
    samples = 2.0 + 0.25 * np.cos(3 * theta) + 0.5 * np.sin(3 * theta)
    assert abs(spectral.mode_amplitude(samples, 0) - 2.0) < 1e-13
    assert abs(spectral.mode_amplitude(samples, 3) - np.hypot(0.25, 0.5)) < 1e-13
    assert spectral.mode_amplitude(samples, 7) < 1e-13


def test_tail_fraction_flags_unresolved_mode():
    theta = spectral.grid(16)
    coarse = 1.0 + 0.05 * np.cos(6 * theta)  # mode 6 above 16/4
    assert spectral.tail_fraction(coarse) > 0.9
    theta = spectral.grid(128)
    fine = 1.0 + 0.3 * np.cos(2 * theta)
    assert spectral.tail_fraction(fine) < 1e-12
    assert spectral.tail_fraction(np.ones(32)) == 0.0


def test_area_from_spectrum_matches_quadrature():
    rng = np.random.default_rng(7)
    m = 64
    theta = spectral.grid(m)
    rho = 1.0 + 0.2 * np.cos(2 * theta) + 0.1 * rng.standard_normal() * np.sin(4 * theta)
    spec = np.fft.rfft(rho)
    p = np.fft.irfft(spectral.support_modes(spec), m)
    quadrature = 0.5 * spectral.integrate(p * rho)
    assert abs(spectral.area_from_spectrum(spec, m) - quadrature) < 1e-13
