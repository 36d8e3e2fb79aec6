"""Sphere spectrum, channel potentials, and the substitution machinery."""

import math

import numpy as np
import pytest

from warpspec import (
    ConfigError,
    NonOscillatoryError,
    channel_potential,
    cusp_profile,
    decade_window,
    exp_conjugation,
    InsufficientDataError,
    inverse_liouville,
    liouville_transform,
    predicted_k_eff,
    predicted_phase_constant,
    reference_profile,
    require_oscillatory,
    resonance_coupling_threshold,
    resonance_energy,
    sphere_multiplicity,
    sphere_spectrum,
)

# frozen from scripts/oracle_multiplicity.py (rank of the monomial Laplacian)
BRUTE_FORCE_DIMS = {
    2: [1, 2, 2, 2, 2, 2, 2],
    3: [1, 3, 5, 7, 9, 11, 13],
    4: [1, 4, 9, 16, 25, 36, 49],
    5: [1, 5, 14, 30, 55, 91, 140],
}

# frozen fitted tail amplitude of the n = 3, k = 1 reference channel
K_EFF_FITTED = 2.8270638654219566


@pytest.mark.parametrize("n", sorted(BRUTE_FORCE_DIMS))
def test_sphere_multiplicity_against_brute_force(n):
    assert [sphere_multiplicity(n, j) for j in range(7)] == BRUTE_FORCE_DIMS[n]


def test_sphere_spectrum_eigenvalues_and_order():
    chans = sphere_spectrum(3, 5)
    assert [c.j for c in chans] == list(range(6))
    assert [c.lam_sphere for c in chans] == [j * (j + 1) for j in range(6)]
    assert [c.multiplicity for c in chans] == [2 * j + 1 for j in range(6)]


def test_cusp_channel_potential_is_constant():
    # f = e^r, n = 3, j = 0: q = p^2 S^2 + p S' = 1 identically
    prof = cusp_profile(3)
    q0 = channel_potential(prof, 0)
    assert q0.limit == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(q0.q - 1.0)) < 1e-12
    x = np.linspace(prof.grid[0], prof.r_max, 777)
    assert np.max(np.abs(q0.q_fn(x) - 1.0)) < 1e-12


def test_channel_differences_are_centrifugal():
    # q_j - q_0 = lam_j / f^2; compare in absolute terms since the barrier
    # term drops below the rounding floor of q ~ 1 once f^2 is huge
    prof = cusp_profile(3)
    q0 = channel_potential(prof, 0)
    for j in (1, 3):
        qj = channel_potential(prof, j)
        lam_j = j * (j + 1)
        assert np.allclose(qj.q - q0.q, lam_j / prof.f**2, rtol=1e-10, atol=1e-15)


def test_reference_channel_k_eff_fit():
    prof = reference_profile(3, 1.0, r_max=2000.0)
    q0 = channel_potential(prof, 0)
    assert q0.k_eff == pytest.approx(K_EFF_FITTED, rel=1e-9)
    assert q0.k_eff == pytest.approx(predicted_k_eff(3, 1.0), rel=0.01)
    assert q0.limit == pytest.approx(1.0, abs=1e-12)
    assert q0.remainder_slope is not None and q0.remainder_slope <= -1.05
    assert q0.phase == pytest.approx(predicted_phase_constant(3), abs=0.01)


def test_reference_shape_formula():
    # S = 1 + k sin(2r)/r and f(1) = 1; log f reproduces S under differentiation
    k = 1.3
    prof = reference_profile(3, k, r_max=120.0)
    sh = prof.shape
    assert float(sh.log_f(1.0)) == pytest.approx(0.0, abs=1e-14)
    r = np.linspace(1.5, 100.0, 4001)
    assert np.allclose(sh.s(r), 1.0 + k * np.sin(2.0 * r) / r, atol=1e-14)
    h = 1e-5
    fd = (sh.log_f(r + h) - sh.log_f(r - h)) / (2.0 * h)
    assert np.max(np.abs(fd - sh.s(r))) < 1e-9


def test_liouville_round_trip_and_isometry():
    prof = reference_profile(3, 0.9, r_max=60.0)
    rng = np.random.default_rng(5)
    h = rng.normal(size=prof.grid.shape)
    hp = rng.normal(size=prof.grid.shape)
    w, wp = liouville_transform(prof, h, hp)
    h2, hp2 = inverse_liouville(prof, w, wp)
    assert np.max(np.abs(h2 - h)) < 1e-12
    assert np.max(np.abs(hp2 - hp)) < 1e-12
    # pointwise isometry of the measure change: w^2 = h^2 f^{n-1}
    assert np.allclose(w**2, h**2 * prof.f ** (prof.n - 1), rtol=1e-12)


def test_resonance_thresholds_and_energy():
    assert resonance_coupling_threshold(3) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-15)
    assert resonance_coupling_threshold(2) == pytest.approx(4.0 / math.sqrt(5.0), rel=1e-15)
    assert resonance_energy(3) == pytest.approx(2.0, rel=1e-15)
    assert resonance_energy(2) == pytest.approx(1.25, rel=1e-15)
    # the threshold is exactly where the effective coupling crosses 2
    for n in (2, 3, 4, 7):
        k_star = resonance_coupling_threshold(n)
        assert predicted_k_eff(n, k_star) == pytest.approx(2.0, rel=1e-12)


def test_require_oscillatory():
    assert require_oscillatory(2.0, 1.0) == pytest.approx(1.0)
    assert require_oscillatory(5.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(NonOscillatoryError):
        require_oscillatory(1.0, 1.0)
    with pytest.raises(NonOscillatoryError):
        require_oscillatory(0.5, 1.0)


def test_exp_conjugation_consistency():
    prof = cusp_profile(3)
    r = prof.grid
    phi = np.exp(-0.3 * r) * np.sin(r)
    phi_p = np.exp(-0.3 * r) * (np.cos(r) - 0.3 * np.sin(r))
    conj = exp_conjugation(prof, phi, phi_p, alpha=2.0)
    assert conj.c == pytest.approx(1.0)
    assert conj.lam == pytest.approx(1.0)
    assert not conj.below_shifted_spectrum
    assert np.allclose(conj.u, np.exp(r) * phi, rtol=1e-13)
    assert np.allclose(conj.u_prime, np.exp(r) * (phi_p + phi), rtol=1e-12, atol=1e-12)
    low = exp_conjugation(prof, phi, phi_p, alpha=0.5)
    assert low.below_shifted_spectrum


def test_decade_window_guards():
    x = np.linspace(1.0, 1000.0, 5000)
    mask = decade_window(x, 50.0, 800.0)
    assert np.count_nonzero(mask) >= 50
    with pytest.raises(InsufficientDataError):
        decade_window(x, 100.0, 500.0)  # less than one decade
    with pytest.raises(InsufficientDataError):
        decade_window(x[:5], 50.0, 800.0)  # too few samples


def test_channel_rejects_out_of_range():
    prof = cusp_profile(3)
    with pytest.raises(ConfigError):
        channel_potential(prof, -1)
