"""Loop-gain analysis: Jacobian probes, admissible-gain interval, contraction.

Two scalar summaries of the round-trip Jacobian J at a basepoint are
estimated matrix-free:

  mu     the mean diagonal entry tr(J)/D, via Rademacher probes
         (E[v^T J v] = tr J for v with iid +-1 entries)
  gamma  the signed dominant eigenvalue, via power iteration on
         finite-difference directional derivatives

For a scalar system J = c*I the two coincide. For resampling round trips
they differ wildly (mu ~ 1/s^2 times the kernel mass, gamma ~ 1 because
constants survive the round trip), and gamma is the one that predicts loop
stability; see the loop engine for how each is used.

lambda_bounds gives the admissible-gain interval (1 -+ 1/sqrt(D))/(dt*mu)
derived from the mean-diagonal model, whose midpoint 1/(dt*mu) zeroes the
model's contraction factor. contraction_factors reports that model's
per-step factors: spectral |1 - dt*lambda*mu| and Frobenius sqrt(D) times it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ShapeError, SingularGainError, ValidationError
from .images import image, validate_image
from .system import NfSystem, nf_apply

DEFAULT_PROBES = 8
DEFAULT_EPSILON = 1e-3
DEFAULT_POWER_ITERS = 8

GAIN_FLOOR = 1e-9  # below this magnitude the gain is treated as singular


@dataclass(frozen=True)
class MuEstimate:
    """Mean Jacobian diagonal estimate with its Monte Carlo standard error."""

    mu: float
    stderr: float
    probes: int
    epsilon: float


def _check_basepoint(sys: NfSystem, x_ref: np.ndarray) -> None:
    validate_image(x_ref)
    h, w, _ = x_ref.shape
    if h % sys.scale or w % sys.scale:
        raise ShapeError(f"basepoint {h}x{w} not divisible by scale {sys.scale}")


def estimate_mu(sys: NfSystem, x_ref: np.ndarray,
                probes: int = DEFAULT_PROBES,
                epsilon: float = DEFAULT_EPSILON,
                seed: int = 0) -> MuEstimate:
    """Estimate tr(J)/D at x_ref from `probes` Rademacher directions.

    Each probe contributes v^T (NF(x_ref + eps*v) - NF(x_ref)) / (eps * D);
    the estimate is their mean, stderr the sample std over sqrt(probes).
    Deterministic for a fixed seed.
    """
    if probes < 1:
        raise ValidationError(f"probes must be >= 1, got {probes}")
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be > 0, got {epsilon}")
    _check_basepoint(sys, x_ref)
    rng = np.random.default_rng(seed)
    base = nf_apply(sys, x_ref)
    D = x_ref.size
    vals = np.empty(probes)
    for p in range(probes):
        v = rng.integers(0, 2, size=x_ref.shape).astype(np.float64) * 2.0 - 1.0
        shifted = nf_apply(sys, image(x_ref + epsilon * v, copy=False))
        vals[p] = float(np.sum(v * (shifted - base))) / (epsilon * D)
    mu = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(probes)) if probes > 1 else 0.0
    return MuEstimate(mu=mu, stderr=stderr, probes=probes, epsilon=epsilon)


def estimate_gain(sys: NfSystem, x_ref: np.ndarray,
                  iters: int = DEFAULT_POWER_ITERS,
                  epsilon: float = DEFAULT_EPSILON,
                  seed: int = 0) -> float:
    """Signed dominant eigenvalue of J at x_ref by power iteration.

    Directions are normalized between steps; the returned value is the
    Rayleigh-style inner product v^T (J v) from the final step, which carries
    the eigenvalue's sign. Deterministic for a fixed seed.
    """
    if iters < 1:
        raise ValidationError(f"iters must be >= 1, got {iters}")
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be > 0, got {epsilon}")
    _check_basepoint(sys, x_ref)
    rng = np.random.default_rng(seed)
    base = nf_apply(sys, x_ref)
    v = rng.standard_normal(x_ref.shape)
    v /= np.linalg.norm(v)
    gamma = 0.0
    for _ in range(iters):
        shifted = nf_apply(sys, image(x_ref + epsilon * v, copy=False))
        w = (shifted - base) / epsilon
        gamma = float(np.sum(v * w))
        norm_w = float(np.linalg.norm(w))
        if norm_w <= GAIN_FLOOR:
            return 0.0
        v = w / norm_w
    return gamma


@dataclass(frozen=True)
class LambdaBounds:
    """Open admissible-gain interval from the mean-diagonal model."""

    lo: float
    hi: float
    degenerate: bool

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2.0


def lambda_bounds(mu: float, dt: float, dim: int) -> LambdaBounds:
    """Admissible lambda interval (1 -+ 1/sqrt(dim)) / (dt * mu), ordered lo < hi.

    mu == 0 means no finite gain can move the model toward the target.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if dim < 1:
        raise ValidationError(f"dim must be >= 1, got {dim}")
    if mu == 0.0:
        raise SingularGainError("mean Jacobian diagonal is zero; gain interval is empty")
    denom = dt * mu
    slack = 1.0 / np.sqrt(dim)
    a = (1.0 - slack) / denom
    b = (1.0 + slack) / denom
    lo, hi = (a, b) if a <= b else (b, a)
    return LambdaBounds(lo=lo, hi=hi, degenerate=bool(hi - lo < 1e-12))


class ContractionFactors(NamedTuple):
    frobenius: float
    spectral: float


def contraction_factors(lam: float, mu: float, dt: float, dim: int) -> ContractionFactors:
    """Model per-step factors: spectral |1 - dt*lam*mu|, Frobenius sqrt(dim) times it.

    dt > 0 and dim >= 1 are preconditions, not re-validated here.
    """
    spectral = abs(1.0 - dt * lam * mu)
    return ContractionFactors(frobenius=spectral * float(np.sqrt(dim)), spectral=spectral)
