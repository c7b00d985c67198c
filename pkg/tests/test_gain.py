"""Jacobian gain estimates against dense-matrix ground truth."""

from functools import partial

import numpy as np
import pytest

from cmisr import (NfSystem, SingularGainError, ValidationError, bicubic_up,
                   bilinear_up, contraction_factors, estimate_gain,
                   estimate_mu, image, lambda_bounds, nearest_up, nf_apply)
from cmisr.resampling import downsample
from oracles import operator_matrix


def scalar_system(c):
    """NF = c * identity via a scaling observation at scale 1."""
    return NfSystem(ur=lambda x: c * np.asarray(x), sr=nearest_up(1), scale=1)


def resample_system(scale, method):
    factory = {"bilinear": bilinear_up, "bicubic": bicubic_up}[method]
    return NfSystem(ur=partial(downsample, s=scale, method="area"),
                    sr=factory(scale), scale=scale)


# ---- mu (mean Jacobian diagonal) ----

@pytest.mark.parametrize("c", [0.3, 1.0, -0.7])
def test_mu_is_exact_for_scalar_systems(c):
    sys_ = scalar_system(c)
    x = image(np.random.default_rng(0).random((6, 6, 1)))
    est = estimate_mu(sys_, x, probes=4, seed=1)
    # Rademacher probes are exact here: v.(c v)/D = c for any +-1 vector
    assert est.mu == pytest.approx(c, abs=1e-9)
    assert est.stderr == pytest.approx(0.0, abs=1e-9)
    assert est.probes == 4


def test_mu_matches_dense_trace_on_resampling():
    for method in ("bilinear", "bicubic"):
        sys_ = resample_system(2, method)
        A = operator_matrix(lambda z: nf_apply(sys_, z), 8, 8)
        mu_true = np.trace(A) / A.shape[0]
        x = image(np.random.default_rng(2).random((8, 8, 1)))
        est = estimate_mu(sys_, x, probes=256, seed=3)
        # generous 4-sigma band around the Monte Carlo error
        assert abs(est.mu - mu_true) < 4.0 * max(est.stderr, 1e-12)


def test_mu_is_deterministic_per_seed():
    sys_ = resample_system(2, "bicubic")
    x = image(np.random.default_rng(4).random((8, 8, 1)))
    a = estimate_mu(sys_, x, probes=8, seed=7)
    b = estimate_mu(sys_, x, probes=8, seed=7)
    c = estimate_mu(sys_, x, probes=8, seed=8)
    assert a.mu == b.mu and a.stderr == b.stderr
    assert a.mu != c.mu


def test_mu_single_probe_has_zero_stderr():
    sys_ = scalar_system(0.5)
    x = image(np.random.default_rng(5).random((4, 4, 1)))
    est = estimate_mu(sys_, x, probes=1, seed=0)
    assert est.stderr == 0.0


def test_mu_validation():
    sys_ = scalar_system(1.0)
    x = image(np.zeros((4, 4, 1)))
    with pytest.raises(ValidationError):
        estimate_mu(sys_, x, probes=0)
    with pytest.raises(ValidationError):
        estimate_mu(sys_, x, epsilon=0.0)


# ---- gamma (dominant gain) ----

@pytest.mark.parametrize("c", [0.4, 1.0, -0.6])
def test_gain_recovers_scalar_eigenvalue_with_sign(c):
    sys_ = scalar_system(c)
    x = image(np.random.default_rng(6).random((5, 5, 1)))
    assert estimate_gain(sys_, x, seed=0) == pytest.approx(c, abs=1e-9)


def test_gain_matches_dense_dominant_eigenvalue():
    sys_ = resample_system(2, "bicubic")
    A = operator_matrix(lambda z: nf_apply(sys_, z), 8, 8)
    beta = np.linalg.eigvals(A)
    dominant = beta[np.argmax(np.abs(beta))]
    assert abs(dominant.imag) < 1e-12  # round trip has a real spectrum
    x = image(np.random.default_rng(7).random((8, 8, 1)))
    # second eigenvalue is ~0.972 of the first, so allow ~150 power steps
    got = estimate_gain(sys_, x, iters=150, seed=1)
    assert got == pytest.approx(dominant.real, rel=1e-4)


def test_gain_zero_operator_returns_zero():
    sys_ = scalar_system(0.0)
    x = image(np.random.default_rng(8).random((4, 4, 1)))
    assert estimate_gain(sys_, x, seed=0) == 0.0


# ---- lambda interval ----

def test_lambda_bounds_formulas():
    b = lambda_bounds(mu=0.25, dt=1.0, dim=4)
    # slack 1/sqrt(4) = 0.5 around 1/(dt*mu) = 4
    assert b.lo == pytest.approx(2.0, abs=1e-12)
    assert b.hi == pytest.approx(6.0, abs=1e-12)
    assert b.midpoint == pytest.approx(4.0, abs=1e-12)
    assert not b.degenerate


def test_lambda_bounds_orders_for_negative_mu():
    b = lambda_bounds(mu=-0.5, dt=1.0, dim=4)
    assert b.lo < b.hi
    assert b.midpoint == pytest.approx(-2.0, abs=1e-12)


def test_lambda_bounds_zero_mu_is_singular():
    with pytest.raises(SingularGainError):
        lambda_bounds(mu=0.0, dt=1.0, dim=16)


def test_lambda_bounds_validation():
    with pytest.raises(ValidationError):
        lambda_bounds(mu=0.5, dt=0.0, dim=4)
    with pytest.raises(ValidationError):
        lambda_bounds(mu=0.5, dt=1.0, dim=0)


def test_degenerate_interval_flag():
    # enormous dimension squeezes the interval below resolution
    b = lambda_bounds(mu=1e9, dt=1.0, dim=10**12)
    assert b.degenerate


# ---- contraction factors ----

def test_contraction_factor_formulas():
    f = contraction_factors(lam=2.0, mu=0.25, dt=1.0, dim=16)
    assert f.spectral == pytest.approx(0.5, abs=1e-15)
    assert f.frobenius == pytest.approx(2.0, abs=1e-15)


def test_midpoint_zeroes_the_model_factor():
    rng = np.random.default_rng(9)
    for _ in range(100):
        mu = rng.uniform(0.05, 2.0) * rng.choice([-1.0, 1.0])
        dt = rng.uniform(0.1, 2.0)
        dim = int(rng.integers(1, 4096))
        mid = lambda_bounds(mu, dt, dim).midpoint
        f = contraction_factors(mid, mu, dt, dim)
        assert f.spectral <= 1e-12
        assert f.frobenius <= 1e-12 * np.sqrt(dim) * (1.0 + 1e-12)
