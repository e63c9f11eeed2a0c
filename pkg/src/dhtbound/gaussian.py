"""Closed-form exponent bounds for the bivariate Gaussian example.

Under both hypotheses (X, Y) is a standard bivariate Gaussian pair, with
correlation rho0 under P and rho1 under Q.  The formulas below hold on the
region D1 = {0 <= rho1 < rho0 < 1}; inputs outside it are rejected.  Jointly
Gaussian auxiliaries are known to be optimal for these maximizations, which
is what licenses evaluating the bounds by closed form rather than numerically.

Every function broadcasts over numpy arrays and returns nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _d1(rho0, rho1) -> tuple[np.ndarray, np.ndarray]:
    rho0 = np.asarray(rho0, dtype=float)
    rho1 = np.asarray(rho1, dtype=float)
    ok = (rho1 >= 0) & (rho1 < rho0) & (rho0 < 1)
    if not np.all(ok):
        bad = np.broadcast_to(~ok, np.broadcast(rho0, rho1).shape)
        i = np.argwhere(bad)[0] if bad.ndim else ()
        r0 = np.broadcast_to(rho0, bad.shape)[tuple(i)]
        r1 = np.broadcast_to(rho1, bad.shape)[tuple(i)]
        raise ValidationError(f"(rho0, rho1) = ({r0}, {r1}) is outside region D1: 0 <= rho1 < rho0 < 1")
    return rho0, rho1


def _rate(rate) -> np.ndarray:
    rate = np.asarray(rate, dtype=float)
    if not np.all(np.isfinite(rate) & (rate >= 0)):
        raise ValidationError("rate must be finite and non-negative")
    return rate


def _sigma(sigma_sq) -> np.ndarray:
    s = np.asarray(sigma_sq, dtype=float)
    if not np.all((s > 0) & (s <= 1)):
        raise ValidationError("sigma_sq must lie in (0, 1]")
    return s


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class GaussianScenario:
    rho0: float
    rho1: float
    rate: float

    def __post_init__(self):
        _d1(self.rho0, self.rho1)
        _rate(self.rate)


def effective_rho(rho0, rho1):
    """(rho0 - rho1) / (1 - rho1), the correlation left after removing the common part."""
    rho0, rho1 = _d1(rho0, rho1)
    return _out((rho0 - rho1) / (1.0 - rho1))


def rw_gaussian(rho0, rho1, rate):
    """1/2 ln(1 / (1 - rho^2 + rho^2 e^{-2R}))."""
    rho = np.asarray(effective_rho(rho0, rho1))
    rate = _rate(rate)
    r2 = rho * rho
    return _out(-0.5 * np.log(1.0 - r2 + r2 * np.exp(-2.0 * rate)))


def sigma_hat_sq(rho0, rho1, rate):
    """Optimal conditional variance of X given U and which rate constraint binds.

    Returns ``(sigma_sq, binding)`` where ``binding`` is ``"Z"`` when the first
    argument of the max, (1 - rho1) / (e^{2R} - rho1), attains it (up to
    rounding) and ``"Y"`` otherwise.  At R = 0 both arguments equal 1.
    """
    rho0, rho1 = _d1(rho0, rho1)
    e2r = np.exp(2.0 * _rate(rate))
    a = (1.0 - rho1) / (e2r - rho1)
    b = (1.0 - rho0 * rho0) / (e2r - rho0 * rho0)
    s = np.maximum(a, b)
    # ties (rho0 = sqrt(rho1)) are labelled Z
    binding = np.where(a >= b * (1.0 - 1e-12), "Z", "Y")
    if s.ndim == 0:
        return float(s), str(binding)
    return s, binding


def exponent_from_sigma(rho0, rho1, sigma_sq):
    """Exponent achieved by a Gaussian U with Var(X | U) = sigma_sq."""
    rho = np.asarray(effective_rho(rho0, rho1))
    rho1 = np.asarray(rho1, dtype=float)
    s = _sigma(sigma_sq)
    num = rho1 * s + 1.0 - rho1
    r2 = rho * rho
    return _out(0.5 * np.log(num / (r2 * s + (1.0 - r2) * num)))


def rate_mi_sigma(rho0, rho1, sigma_sq):
    """(I(X;U|Z), I(X;U|Y)) for a Gaussian U with Var(X | U) = sigma_sq."""
    rho0, rho1 = _d1(rho0, rho1)
    s = _sigma(sigma_sq)
    i_xz = 0.5 * np.log((rho1 * s + 1.0 - rho1) / s)
    i_xy = 0.5 * np.log((rho0 * rho0 * s + 1.0 - rho0 * rho0) / s)
    return _out(i_xz), _out(i_xy)


@dataclass(frozen=True)
class GaussianBoundDetail:
    rho: float | np.ndarray
    delta: float | np.ndarray
    sigma_hat_sq: float | np.ndarray
    term_new: float | np.ndarray
    term_rw: float | np.ndarray
    value: float | np.ndarray
    active_branch: str | np.ndarray


def new_gaussian(rho0, rho1, rate) -> GaussianBoundDetail:
    """The improved bound, the minimum of the Delta term and the RW term."""
    rho0, rho1 = _d1(rho0, rho1)
    rate = _rate(rate)
    rho = (rho0 - rho1) / (1.0 - rho1)
    e2r = np.exp(2.0 * rate)
    a = (1.0 - rho) * (1.0 + rho0)
    delta = a / ((e2r - 1.0) + a)
    r2 = rho * rho
    term_new = -0.5 * np.log(1.0 - r2 + r2 * delta)
    term_rw = -0.5 * np.log(1.0 - r2 + r2 / e2r)
    value = np.minimum(term_new, term_rw)
    branch = np.where(term_new < term_rw, "new", "rw")
    s, _ = sigma_hat_sq(rho0, rho1, rate)
    if np.ndim(value) == 0:
        branch = str(branch)
    return GaussianBoundDetail(
        _out(rho), _out(delta), _out(s), _out(term_new), _out(term_rw), _out(value), branch
    )


def centralized_gaussian(rho0, rho1):
    """D(P_XY || Q_XY) for unit-variance pairs with correlations rho0 and rho1."""
    rho0 = np.asarray(rho0, dtype=float)
    rho1 = np.asarray(rho1, dtype=float)
    if not np.all((np.abs(rho0) < 1) & (np.abs(rho1) < 1)):
        raise ValidationError("correlations must satisfy |rho| < 1")
    q = 1.0 - rho1 * rho1
    return _out((1.0 - rho0 * rho1) / q - 1.0 + 0.5 * np.log(q / (1.0 - rho0 * rho0)))
