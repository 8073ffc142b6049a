"""Closed-form solutions for the undriven three-qubit phase code.

Only :func:`p0_exact` is generic in the number of syndromes; everything else
assumes the phase code (N = 3, Lambda_3 = diag(-1, -1, 1)) with the initial
state entirely in syndrome 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

# Below this separation the two transverse decay rates are treated as equal.
_DEGENERATE_GAP = 1e-12


@dataclass(frozen=True)
class RateSet:
    lam: float
    lambda_plus: float
    lambda_minus: float
    epsilon: float | None = None
    t_c: float | None = None
    t_2: float | None = None


def decay_rates(gamma: float, gamma_prime: float, n_syndromes: int = 3) -> RateSet:
    """Syndrome relaxation rate and the two transverse rates, slow one first.

    lambda_plus is evaluated as 12 g'^2 / lambda_minus, which equals the
    difference form algebraically but does not cancel catastrophically when
    gamma >> gamma_prime.
    """
    if gamma < 0 or gamma_prime < 0:
        raise ValueError("rates must be non-negative")
    lam = gamma + (n_syndromes + 1) * gamma_prime
    centre = 4 * gamma_prime + gamma / 2
    root = math.sqrt(4 * gamma_prime**2 + 4 * gamma * gamma_prime + gamma**2 / 4)
    minus = centre + root
    plus = 12 * gamma_prime**2 / minus if minus > 0 else 0.0
    if gamma > 0:
        eps = gamma_prime / gamma
        t_c = 1 / gamma
        t_2 = t_c / (12 * eps**2) if eps > 0 else math.inf
        return RateSet(lam, plus, minus, eps, t_c, t_2)
    return RateSet(lam, plus, minus)


def p0_exact(t, gamma: float, gamma_prime: float, n_syndromes: int = 3, p0_initial: float = 1.0):
    """Probability of the trivial syndrome; valid for any non-degenerate code."""
    t = np.asarray(t, dtype=float)
    lam = gamma + (n_syndromes + 1) * gamma_prime
    if lam == 0:
        return np.full_like(t, p0_initial)
    stationary = (gamma + gamma_prime) / lam
    return stationary + (p0_initial - stationary) * np.exp(-lam * t)


def _transverse(t, rates: RateSet, gamma_prime: float):
    """Normalized transverse r(t)/r(0) and (r + v)(t)/r(0) along x or y."""
    lp, lm = rates.lambda_plus, rates.lambda_minus
    gap = lm - lp
    if gap <= _DEGENERATE_GAP * max(1.0, lm):
        # Limit lambda_minus -> lambda_plus of the two-exponential forms.
        decay = np.exp(-lp * t)
        return decay * (1 + (lp - 3 * gamma_prime) * t), decay * (1 + lp * t)
    slow, fast = np.exp(-lp * t), np.exp(-lm * t)
    r = ((3 * gamma_prime - lp) * fast + (lm - 3 * gamma_prime) * slow) / gap
    rv = (lm * slow - lp * fast) / gap
    return r, rv


def bloch_exact(t, gamma: float, gamma_prime: float, r0) -> np.ndarray:
    """Syndrome-0 Bloch vector (x, y, z) at time(s) ``t``; shape (..., 3)."""
    x0, y0, z0 = (float(c) for c in r0)
    t = np.asarray(t, dtype=float)
    rates = decay_rates(gamma, gamma_prime)
    transverse, _ = _transverse(t, rates, gamma_prime)
    z = z0 * p0_exact(t, gamma, gamma_prime)
    return np.stack([x0 * transverse, y0 * transverse, z], axis=-1)


def fidelity_exact(t, gamma: float, gamma_prime: float, r0):
    x0, y0, z0 = (float(c) for c in r0)
    rates = decay_rates(gamma, gamma_prime)
    _, g = _transverse(np.asarray(t, dtype=float), rates, gamma_prime)
    return 0.5 * ((1 + z0**2) + (x0**2 + y0**2) * g)


def fidelity_no_correction(t, gamma_prime: float, r0):
    x0, y0, z0 = (float(c) for c in r0)
    t = np.asarray(t, dtype=float)
    g = 0.5 * (3 * np.exp(-2 * gamma_prime * t) - np.exp(-6 * gamma_prime * t))
    return 0.5 * ((1 + z0**2) + (x0**2 + y0**2) * g)


def short_time_coefficients(gamma_prime: float, r0) -> tuple[float, float]:
    """Linear and quadratic Taylor coefficients of the uncorrected fidelity at t = 0."""
    x0, y0, _ = (float(c) for c in r0)
    return 0.0, -3 * (x0**2 + y0**2) * gamma_prime**2


@dataclass(frozen=True)
class StrongCorrection:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    fidelity: np.ndarray


def strong_correction(t, gamma: float, epsilon: float, r0) -> StrongCorrection:
    """First-order approximations for gamma >> gamma' (epsilon = gamma'/gamma)."""
    if epsilon >= 0.1:
        warnings.warn(f"epsilon={epsilon} is outside the strong-correction regime",
                      RuntimeWarning, stacklevel=2)
    x0, y0, z0 = (float(c) for c in r0)
    t = np.asarray(t, dtype=float)
    fast = np.exp(-gamma * t)
    slow = np.exp(-12 * epsilon**2 * gamma * t)
    transverse = (1 - 3 * epsilon) * slow + 3 * epsilon * fast
    z = z0 * (1 - 3 * epsilon + 3 * epsilon * fast)
    g = (1 + 12 * epsilon**2) * slow - 12 * epsilon**2 * fast
    f = 0.5 * ((1 + z0**2) + (x0**2 + y0**2) * g)
    return StrongCorrection(x0 * transverse, y0 * transverse, z, f)
