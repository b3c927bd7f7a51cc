"""Large-sample power approximations for the two-sided WMW test.

The Shieh method uses the exact variance of W under a location-shift
alternative, which depends on the family through p2 = P(X < Y1, X < Y2) and
p3 = P(X1 < Y, X2 < Y).  The Noether method keeps the null variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import optimize
from scipy.special import lambertw, ndtr, ndtri

from .distributions import DistributionSpec, effect_size_p
from .errors import DomainError, NumericalError
from .wmw_test import null_moments

SHIEH_FAMILIES = ("normal", "shifted_exponential", "double_exponential")
HERMITE_NODES = 128
SAMPLE_SIZE_GUARD = 1e-6

_ALIASES = {
    "norm": "normal",
    "shifted_exp": "shifted_exponential",
    "shifted-exp": "shifted_exponential",
    "shifted-exponential": "shifted_exponential",
    "laplace": "double_exponential",
    "double-exponential": "double_exponential",
}


def shieh_family(name: str) -> str:
    key = _ALIASES.get(name.strip().lower(), name.strip().lower())
    if key not in SHIEH_FAMILIES:
        raise DomainError(f"Shieh family must be one of {SHIEH_FAMILIES}, got {name!r}")
    return key


@dataclass(frozen=True)
class ShiehConstants:
    theta: float
    p2: float
    p3: float
    family: str


@dataclass(frozen=True)
class AlternativeMoments:
    mu: float
    sigma: float


def _z(alpha: float, sides: str) -> float:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if sides == "two":
        return float(ndtri(1.0 - alpha / 2.0))
    if sides == "one":
        return float(ndtri(1.0 - alpha))
    raise DomainError(f"sides must be 'one' or 'two', got {sides!r}")


# Laplace location shift --------------------------------------------------


def laplace_shift_p(theta: float) -> float:
    """P(X < Y) for X ~ Laplace(0, 1), Y ~ Laplace(theta, 1), by quadrature."""
    return effect_size_p(DistributionSpec.double_exponential(0.0, 1.0),
                         DistributionSpec.double_exponential(theta, 1.0))


def laplace_shift_numeric(p: float) -> float:
    """Unit-scale Laplace shift with P(X < Y) = p, by bracketed root finding."""
    if not 0.5 <= p < 1.0:
        raise DomainError(f"p must lie in [0.5, 1), got {p}")
    if p == 0.5:
        return 0.0
    hi = 1.0
    while laplace_shift_p(hi) < p:
        hi *= 2.0
        if hi > 1e4:
            raise NumericalError(f"no bracket for Laplace shift at p={p}")
    return optimize.brentq(lambda t: laplace_shift_p(t) - p, 0.0, hi, xtol=1e-14,
                           rtol=4 * np.finfo(float).eps, maxiter=200)


def laplace_shift_lambertw(p: float) -> float:
    """Closed form theta = -W_{-1}(4(p - 1) e^{-2}) - 2."""
    if not 0.5 <= p < 1.0:
        raise DomainError(f"p must lie in [0.5, 1), got {p}")
    w = lambertw(4.0 * (p - 1.0) * math.exp(-2.0), k=-1)
    return float(-w.real - 2.0)


# Normal p2 ---------------------------------------------------------------


@lru_cache(maxsize=1)
def _hermite_rule():
    nodes, weights = hermegauss(HERMITE_NODES)
    return nodes, weights / math.sqrt(2.0 * math.pi)


def normal_p2(theta: float) -> float:
    """E[Phi(Z + theta)^2] for Z ~ N(0, 1) by Gauss-Hermite quadrature."""
    nodes, weights = _hermite_rule()
    return float(np.dot(weights, ndtr(nodes + theta) ** 2))


# Shieh -------------------------------------------------------------------


def shieh_constants(family: str, p: float) -> ShiehConstants:
    """theta, p2, p3 for a location shift with P(X < Y) = p in [0.5, 1)."""
    family = shieh_family(family)
    if not 0.5 <= p < 1.0:
        raise DomainError(f"Shieh constants need p in [0.5, 1), got {p}")
    if family == "shifted_exponential":
        e = 2.0 * (1.0 - p)  # exp(-theta)
        theta = -math.log(e)
        p2 = 1.0 - 2.0 / 3.0 * e
        p3 = 1.0 - e + e * e / 3.0
    elif family == "double_exponential":
        theta = laplace_shift_numeric(p)
        e = math.exp(-theta)
        p2 = p3 = 1.0 - (7.0 / 12.0 + theta / 2.0) * e - e * e / 12.0
    else:
        theta = math.sqrt(2.0) * float(ndtri(p))
        p2 = p3 = normal_p2(theta)
    return ShiehConstants(theta=theta, p2=p2, p3=p3, family=family)


def alternative_moments(m: int, n: int, p: float, constants: ShiehConstants) -> AlternativeMoments:
    """Mean and standard deviation of W under the alternative.

    Variance mn{p(1-p) + (n-1)(p2-p^2) + (m-1)(p3-p^2)}, with n the size of
    the Y group.
    """
    if m < 1 or n < 1:
        raise DomainError(f"group sizes must be >= 1, got m={m}, n={n}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    pp = p * p
    var = m * n * (p * (1 - p) + (n - 1) * (constants.p2 - pp) + (m - 1) * (constants.p3 - pp))
    if not var > 0:
        raise NumericalError(f"nonpositive variance {var} from constants {constants}")
    return AlternativeMoments(mu=m * n * p, sigma=math.sqrt(var))


def shieh_power(alpha: float, m: int, n: int, p: float, family: str) -> float:
    """Approximate two-sided power for a location-shift alternative.

    p < 0.5 is handled by swapping the groups and using 1 - p.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if p < 0.5:
        m, n, p = n, m, 1.0 - p
    z = _z(alpha, "two")
    consts = shieh_constants(family, p)
    mom = alternative_moments(m, n, p, consts)
    mu0, var0 = null_moments(m, n)
    s0 = math.sqrt(var0)
    return float(ndtr((mom.mu - mu0 - z * s0) / mom.sigma)
                 + ndtr((mu0 - mom.mu - z * s0) / mom.sigma))


# Noether -----------------------------------------------------------------


def noether_power(alpha: float, m: int, n: int, p: float, sides: str = "two") -> float:
    """Phi(sqrt(12 N c (1 - c)) |p - 1/2| - z) with c = m / N."""
    if m < 1 or n < 1:
        raise DomainError(f"group sizes must be >= 1, got m={m}, n={n}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    z = _z(alpha, sides)
    N = m + n
    c = m / N
    return float(ndtr(math.sqrt(12.0 * N * c * (1.0 - c)) * abs(p - 0.5) - z))


def noether_sample_size(alpha: float, target_power: float, c: float, p: float,
                        sides: str = "two") -> int:
    """Smallest total N with N >= (z_alpha + z_beta)^2 / (12 c (1-c) (p - 1/2)^2)."""
    if not 0.0 < target_power < 1.0:
        raise DomainError(f"target power must lie in (0, 1), got {target_power}")
    if not 0.0 < c < 1.0:
        raise DomainError(f"allocation fraction c must lie in (0, 1), got {c}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if abs(p - 0.5) < SAMPLE_SIZE_GUARD:
        raise NumericalError("sample size diverges as p approaches 0.5")
    za = _z(alpha, sides)
    zb = float(ndtri(target_power))
    value = (za + zb) ** 2 / (12.0 * c * (1.0 - c) * (p - 0.5) ** 2)
    return int(math.ceil(value))
