import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import expm

from oracles import kicked_top_heff, kicked_top_kick, spin_matrices

from kickeff.classical import CanonicalState, hcl_energy
from kickeff.effective import (
    DriveSpec,
    EffectiveModel,
    classical_limit_check,
    delta_kick_effective,
    effective_spectrum,
    fourier_effective,
    kick_operator_at,
    kicked_top_drive,
    kicked_top_effective,
    reconstruct_floquet,
)
from kickeff.floquet import TopParams, build_floquet


def maxnorm(a):
    return float(np.max(np.abs(a)))


def test_closed_form_matches_elementwise_assembly():
    for alpha, beta, j in [(0.5, 0.1, 10), (6.0, 0.5, 3.5)]:
        m = kicked_top_effective(TopParams(alpha, beta, j))
        assert maxnorm(m.h_eff - kicked_top_heff(alpha, beta, j)) < 1e-12
        assert maxnorm(m.f_kick - kicked_top_kick(alpha, beta, j)) < 1e-12
        assert maxnorm(m.h_eff - m.h_eff.conj().T) < 1e-10
        assert maxnorm(m.f_kick - m.f_kick.conj().T) < 1e-10


def test_beta_zero_and_alpha_zero_limits():
    m = kicked_top_effective(TopParams(1.0, 0.0, 1))
    assert not np.any(m.f_kick)
    jx, jy, jz = spin_matrices(1)
    assert_allclose(m.h_eff, 0.5 * jz @ jz, atol=0)
    assert_allclose(effective_spectrum(m), [0, 0.5, 0.5], atol=1e-14)
    m = kicked_top_effective(TopParams(0.0, 0.3, 1))
    assert not np.any(m.f_kick)
    assert_allclose(effective_spectrum(m), [-0.3, 0, 0.3], atol=1e-14)


def test_delta_kick_trivial_drives():
    jx, jy, jz = spin_matrices(2)
    h0 = jz @ jz + 0.3 * jx
    h, f = delta_kick_effective(DriveSpec(h0, np.zeros_like(h0)))
    assert_allclose(h, h0, atol=1e-15)
    assert not np.any(f)
    h, f = delta_kick_effective(DriveSpec(h0, 0.7 * h0, period=2.0))
    assert_allclose(h, h0 + 0.35 * h0, atol=1e-14)
    assert maxnorm(f) < 1e-14


def test_drive_spec_validation():
    with pytest.raises(ValueError):
        DriveSpec(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        DriveSpec(np.array([[0, 1], [0, 0]]), np.eye(2))
    with pytest.raises(ValueError):
        DriveSpec(np.eye(2), np.eye(2), period=0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-8, 8), st.floats(-2, 2), st.integers(1, 40).map(lambda n: n / 2))
def test_generic_path_equals_closed_form(alpha, beta, j):
    p = TopParams(alpha, beta, j)
    h, f = delta_kick_effective(kicked_top_drive(p))
    m = kicked_top_effective(p)
    assert maxnorm(h - m.h_eff) < 1e-12 * max(1, j)
    assert maxnorm(f - m.f_kick) < 1e-12 * max(1, j)


def test_commutator_identity_by_hand():
    # [[b Jx, (a/2j) Jz^2], b Jx] = (a b^2 / j)(Jy^2 - Jz^2)
    a, b, j = 1.3, 0.4, 3
    jx, jy, jz = spin_matrices(j)
    v, h0 = b * jx, a / (2 * j) * jz @ jz
    c = v @ h0 - h0 @ v
    cc = c @ v - v @ c
    assert maxnorm(cc - a * b**2 / j * (jy @ jy - jz @ jz)) < 1e-12


@pytest.mark.parametrize("n_max", [1, 10, 1000, 10_000])
def test_fourier_series_converges(n_max):
    p = TopParams(1.0, 0.5, 5)
    d = kicked_top_drive(p)
    h, f = fourier_effective(d.h0, d.v, 1.0, n_max)
    h_ref, f_ref = delta_kick_effective(d)
    third_ref = h_ref - d.h0 - d.v
    rel = maxnorm(h - h_ref) / maxnorm(third_ref)
    tail = sum(1 / n**2 for n in range(n_max + 1, 2_000_000)) + 1 / 2_000_000
    assert abs(rel - tail / (np.pi**2 / 6)) < 1e-6
    assert rel <= 1.2 / n_max
    assert maxnorm(f - f_ref) / maxnorm(f_ref) <= 1.2 / n_max


def test_fourier_first_order_term_vanishes():
    p = TopParams(0.7, 0.3, 4)
    d = kicked_top_drive(p)
    h, _ = fourier_effective(d.h0, d.v, 1.0, 3)
    s2 = 1 + 1 / 4 + 1 / 9
    expected = d.h0 + d.v + (d.v @ d.h0 - d.h0 @ d.v) @ d.v / (4 * np.pi**2) * s2
    expected -= d.v @ (d.v @ d.h0 - d.h0 @ d.v) / (4 * np.pi**2) * s2
    assert maxnorm(h - expected) < 1e-13


def test_fourier_rejects_bad_nmax():
    with pytest.raises(ValueError):
        fourier_effective(np.eye(2), np.eye(2), 1.0, 0)


def _partial_sums(x, n=10**6):
    k = np.arange(1, n + 1, dtype=float)
    return float(np.sum(np.sin(k * x) / k)), float(np.sum(np.cos(k * x) / k**2))


@pytest.mark.parametrize("t", [0.1, 0.37, 0.5, 0.83])
def test_kick_operator_against_partial_sums(t):
    p = TopParams(1.2, 0.3, 3)
    d = kicked_top_drive(p)
    s1, s2 = _partial_sums(2 * np.pi * t)
    c = d.v @ d.h0 - d.h0 @ d.v
    oracle = d.v / np.pi * s1 - 1j / (2 * np.pi**2) * c * s2
    # sine partial sums converge like 1/n
    assert maxnorm(kick_operator_at(p, t) - oracle) < 5e-6


def test_kick_operator_midpoint_is_commutator_term():
    p = TopParams(1.2, 0.3, 3)
    d = kicked_top_drive(p)
    c = d.v @ d.h0 - d.h0 @ d.v
    assert maxnorm(kick_operator_at(p, 0.5) - (-1j / (2 * np.pi**2)) * c * (-np.pi**2 / 12)) < 1e-14


def test_kick_operator_zero_average_and_hermitian():
    p = TopParams(2.0, 0.6, 4)
    n = 20000
    ts = (np.arange(n) + 0.5) / n
    avg = sum(kick_operator_at(p, t) for t in ts) / n
    assert maxnorm(avg) < 1e-6
    f = kick_operator_at(p, 0.3)
    assert maxnorm(f - f.conj().T) < 1e-10


def test_kick_operator_accepts_drive_and_rejects_endpoints():
    p = TopParams(2.0, 0.6, 4)
    assert_allclose(kick_operator_at(kicked_top_drive(p), 0.2), kick_operator_at(p, 0.2))
    for t in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            kick_operator_at(p, t)


def test_reconstruction_exact_limits():
    for p in (TopParams(1.7, 0.0, 6), TopParams(0.0, 0.9, 6)):
        r = reconstruct_floquet(kicked_top_effective(p))
        assert maxnorm(r - build_floquet(p)) < 1e-12


def test_reconstruction_unitary_and_recorded_distances():
    dist = {}
    for beta in (0.1, 0.05):
        p = TopParams(1.0, beta, 10)
        r = reconstruct_floquet(kicked_top_effective(p))
        assert maxnorm(r.conj().T @ r - np.eye(p.dim)) < 1e-9
        dist[beta] = np.linalg.norm(build_floquet(p) - r, 2)
    # recorded by the pre-build oracle run; the residual is first order in beta
    assert dist[0.1] == pytest.approx(0.2343056595, rel=1e-8)
    assert dist[0.05] == pytest.approx(0.1173370218, rel=1e-8)


def test_effective_spectrum_against_dense_assembly():
    p = TopParams(0.5, 0.1, 10)
    oracle = np.sort(np.linalg.eigvals(kicked_top_heff(0.5, 0.1, 10)).real)
    assert np.max(np.abs(effective_spectrum(kicked_top_effective(p)) - oracle)) < 1e-10


def test_folding_consistent_with_exponentiation():
    m = kicked_top_effective(TopParams(3.0, 0.4, 6))
    eps = effective_spectrum(m)
    lam = np.linalg.eigvals(expm(-1j * m.h_eff))
    for e in np.exp(-1j * eps):
        assert np.min(np.abs(lam - e)) < 1e-10


def test_generic_model_without_params():
    jx, jy, jz = spin_matrices(1)
    m = EffectiveModel(jz, np.zeros((3, 3)))
    assert m.period == 1.0
    assert_allclose(reconstruct_floquet(m), np.diag(np.exp(-1j * np.array([1, 0, -1]))), atol=1e-15)


def test_classical_limit_poles():
    a, b = 0.8, 0.3
    north = classical_limit_check(TopParams(a, b, 1), 0.0, 0.0, [400])[0]
    assert abs(north - (a / 2 - a * b**2 / 24)) < 2e-3
    eq = classical_limit_check(TopParams(a, b, 1), np.pi / 2, 0.0, [400])[0]
    assert abs(eq - b) < 2e-3


@pytest.mark.parametrize("alpha,beta,theta,psi", [(0.2, 0.1, 1.0, 0.5), (1.0, 0.5, 2.0, 4.0)])
def test_classical_limit_converges_at_rate_one_over_j(alpha, beta, theta, psi):
    vals = classical_limit_check(TopParams(alpha, beta, 1), theta, psi, [10, 20, 40, 80])
    h = hcl_energy(CanonicalState(np.cos(theta), psi), alpha, beta)
    dev = [abs(v - h) for v in vals]
    assert all(b < a for a, b in zip(dev, dev[1:]))
    for a, b in zip(dev, dev[1:]):
        assert 0.35 <= b / a <= 0.65


def test_classical_limit_rejects_angles():
    with pytest.raises(ValueError):
        classical_limit_check(TopParams(1, 1, 1), -0.1, 0.0, [2])
