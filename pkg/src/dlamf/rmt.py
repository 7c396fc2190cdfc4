"""Deterministic equivalents of diagonally loaded SCM functionals.

In the proportional regime (N, K large, c = N/K fixed in (0, 1)) the
quadratic forms that drive loaded-filter performance concentrate around
deterministic limits that depend only on the true covariance spectrum, the
steering vector and the loading factor. This module evaluates those limits.
Everything is computed in the eigenbasis of R: with eigenvalues rho_i and
steering weights w_i = v_i^H s,

    delta solves   delta * (1 + (1/K) sum_i rho_i / (delta rho_i + lam)) = 1
    psi   = sum_i |w_i|^2 / (delta rho_i + lam)
    xi    = sum_i |w_i|^2 rho_i / (delta rho_i + lam)^2
    gamma = (delta^2 / K) sum_i rho_i^2 / (delta rho_i + lam)^2
    mu0   = xi / (1 - gamma)

psi is the limit of the loaded quadratic form s^H (Rhat + lam I)^{-1} s and
mu0 normalizes the loaded filter output power under h0. The SCNR-preservation
factor kappa = (1 - gamma) psi^2 / (q xi) with q = s^H R^{-1} s measures the
fraction of optimal output SCNR the loaded filter retains; kappa(0) = 1 - c
recovers the unloaded SCM filter and kappa is bounded above by 1 - gamma < 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .scenario import HermitianSpectrum, SteeringVector

_FP_TOL = 1e-13
_FP_MAX_ITER = 10_000
_RESIDUAL_TOL = 1e-12


def _as_entries(s):
    return s.entries if isinstance(s, SteeringVector) else np.asarray(s)


def _check_regime(N, K):
    if K <= N:
        raise ConfigError(
            f"asymptotic formulas need c = N/K < 1, got N={N} K={K}")


def delta_residual(delta, eigenvalues, lam, K):
    """Fixed-point defect delta * (1 + (1/K) tr(R (delta R + lam)^-1)) - 1."""
    rho = np.asarray(eigenvalues, dtype=float)
    return delta * (1.0 + np.sum(rho / (delta * rho + lam)) / K) - 1.0


def solve_delta(eigenvalues, lam, K):
    """Solve the delta fixed point for loading factor lam >= 0.

    lam = 0 short-circuits to the exact value 1 - N/K. Otherwise the map
    delta <- 1 / (1 + (1/K) sum_i rho_i / (delta rho_i + lam)) is iterated
    from 1 - N/K; if it stalls, bisection on the (strictly increasing)
    residual finishes the job. The result satisfies |residual| <= 1e-12 or a
    NumericalError reports the defect.
    """
    rho = np.asarray(eigenvalues, dtype=float)
    N = rho.shape[0]
    _check_regime(N, K)
    if np.any(rho <= 0):
        raise ConfigError("eigenvalues must be positive")
    if lam < 0 or not np.isfinite(lam):
        raise ConfigError(f"loading factor must be finite and >= 0, got {lam}")
    if lam == 0.0:
        return 1.0 - N / K

    delta = 1.0 - N / K
    for _ in range(_FP_MAX_ITER):
        nxt = 1.0 / (1.0 + np.sum(rho / (delta * rho + lam)) / K)
        if abs(nxt - delta) <= _FP_TOL * nxt:
            delta = nxt
            break
        delta = nxt

    if abs(delta_residual(delta, rho, lam, K)) > _RESIDUAL_TOL:
        # residual is strictly increasing in delta with a sign change on (0, 1]
        lo, hi = 1e-300, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if delta_residual(mid, rho, lam, K) < 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-16 * hi:
                break
        delta = 0.5 * (lo + hi)

    res = delta_residual(delta, rho, lam, K)
    if abs(res) > _RESIDUAL_TOL:
        raise NumericalError(
            f"delta fixed point stalled at residual {res:.3e} "
            f"(lam={lam}, N={N}, K={K})")
    return float(delta)


@dataclass(frozen=True)
class AsymptoticParams:
    """Deterministic equivalents at one loading factor."""

    lam: float
    delta: float
    psi: float
    xi: float
    gamma: float
    mu0: float
    quad_inv: float  # q = s^H R^{-1} s

    @property
    def beta_dl(self):
        """Limit of the loaded quadratic form s^H (Rhat + lam I)^{-1} s."""
        return self.psi


def deterministic_equivalents(R, s, lam, K):
    """All deterministic equivalents of the loaded filter at lam.

    R is a HermitianSpectrum, s a SteeringVector or array. lam = 0 uses the
    exact closed forms psi = q/(1-c), xi = q/(1-c)^2, gamma = c,
    mu0 = q/(1-c)^3.
    """
    if not isinstance(R, HermitianSpectrum):
        R = HermitianSpectrum.from_matrix(R)
    sv = _as_entries(s)
    rho = R.eigenvalues
    N = rho.shape[0]
    _check_regime(N, K)
    q = R.inv_quad(sv)
    if lam == 0.0:
        omc = 1.0 - N / K
        return AsymptoticParams(lam=0.0, delta=omc, psi=q / omc,
                                xi=q / omc ** 2, gamma=N / K,
                                mu0=q / omc ** 3, quad_inv=q)
    delta = solve_delta(rho, lam, K)
    w2 = np.abs(R.weights(sv)) ** 2
    den = delta * rho + lam
    psi = float(np.sum(w2 / den))
    xi = float(np.sum(w2 * rho / den ** 2))
    gamma = float(delta ** 2 * np.sum(rho ** 2 / den ** 2) / K)
    return AsymptoticParams(lam=float(lam), delta=delta, psi=psi, xi=xi,
                            gamma=gamma, mu0=xi / (1.0 - gamma), quad_inv=q)


def mu1(params, sigma_t2):
    """h1 mean-power equivalent: sigma_t^2 psi^2 + mu0.

    sigma_t2 is the Swerling I target power; a nonfluctuating target of
    amplitude b uses sigma_t2 = |b|^2 with the same formula for the mean.
    """
    if sigma_t2 < 0:
        raise ConfigError("target power must be >= 0")
    return float(sigma_t2) * params.psi ** 2 + params.mu0


def kappa(R, s, lam, K):
    """SCNR-preservation factor kappa(lam) = (1 - gamma) psi^2 / (q xi)."""
    p = deterministic_equivalents(R, s, lam, K)
    return (1.0 - p.gamma) * p.psi ** 2 / (p.quad_inv * p.xi)


def kappa_lower(R, s, lam, K):
    """Estimable surrogate (1 - gamma) psi^2 / xi = q * kappa(lam).

    Shares its maximizer with kappa, so loading-factor selection can work
    from data without knowing q.
    """
    p = deterministic_equivalents(R, s, lam, K)
    return (1.0 - p.gamma) * p.psi ** 2 / p.xi


def kappa_derivative_at_zero(R, K):
    """d kappa / d lam at lam = 0: 2 tr(R^{-1}) / (K (1 - c)).

    Strictly positive, so a little loading always beats none.
    """
    if not isinstance(R, HermitianSpectrum):
        R = HermitianSpectrum.from_matrix(R)
    N = R.dim
    _check_regime(N, K)
    return 2.0 * R.inv_trace() / (K * (1.0 - N / K))


def kappa_limit_inf(R, s):
    """lam -> infinity limit 1 / (q * s^H R s): the unadapted matched filter."""
    if not isinstance(R, HermitianSpectrum):
        R = HermitianSpectrum.from_matrix(R)
    sv = _as_entries(s)
    return 1.0 / (R.inv_quad(sv) * R.quad(sv))
