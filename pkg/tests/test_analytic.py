import math

import mpmath
import numpy as np
import pytest
from scipy import integrate
from scipy.special import ndtr, ndtri, owens_t

from wmwpower.analytic import (
    alternative_moments,
    laplace_shift_lambertw,
    laplace_shift_numeric,
    laplace_shift_p,
    noether_power,
    noether_sample_size,
    normal_p2,
    shieh_constants,
    shieh_power,
)
from wmwpower.errors import DomainError, NumericalError
from wmwpower.wmw_test import null_moments

P_GRID = [round(0.5 + 0.05 * i, 2) for i in range(10)]


def owen_p2(theta):
    # P(Z1 < h, Z2 < h) for correlation 1/2, h = theta / sqrt(2)
    h = theta / math.sqrt(2.0)
    return float(ndtr(h) - 2.0 * owens_t(h, 1.0 / math.sqrt(3.0)))


def laplace_grid_p(theta, points=20_001, half_width=40.0):
    """P(X < X' + theta) for unit Laplace X, X' by Simpson's rule between the kinks."""
    total = 0.0
    for a, b in ((-half_width, 0.0), (0.0, theta), (theta, theta + half_width)):
        y = np.linspace(a, b, points)
        pdf = 0.5 * np.exp(-np.abs(y - theta))
        cdf = np.where(y < 0, 0.5 * np.exp(np.minimum(y, 0)), 1 - 0.5 * np.exp(-np.maximum(y, 0)))
        total += integrate.simpson(pdf * cdf, x=y)
    return float(total)


# constants ---------------------------------------------------------------


def test_shifted_exponential_constants():
    c = shieh_constants("shifted_exponential", 0.8)
    assert c.theta == pytest.approx(-math.log(0.4), abs=1e-15)
    assert round(c.theta, 4) == 0.9163
    assert c.p2 == pytest.approx(1 - 2 / 3 * 0.4, abs=1e-15)
    assert c.p3 == pytest.approx(1 - 0.4 + 0.16 / 3, abs=1e-15)
    assert round(c.p2, 5) == 0.73333
    assert round(c.p3, 5) == 0.65333


def shifted_exp_pair_probs(theta):
    """Direct integration for X ~ Exp(1), Y = X' + theta."""
    below = integrate.quad(lambda x: math.exp(-x), 0, theta)[0]
    above = integrate.quad(lambda x: math.exp(-x) * math.exp(-2 * (x - theta)), theta, np.inf)[0]
    p2 = below + above
    p3 = integrate.quad(lambda y: math.exp(-(y - theta)) * (1 - math.exp(-y)) ** 2, theta, np.inf)[0]
    return p2, p3


@pytest.mark.parametrize("p", [0.55, 0.7, 0.9, 0.95])
def test_shifted_exponential_constants_by_quadrature(p):
    c = shieh_constants("shifted_exponential", p)
    p2, p3 = shifted_exp_pair_probs(c.theta)
    assert c.p2 == pytest.approx(p2, abs=1e-10)
    assert c.p3 == pytest.approx(p3, abs=1e-10)


@pytest.mark.parametrize("p", P_GRID)
def test_normal_p2_against_owens_t(p):
    c = shieh_constants("normal", p)
    assert c.theta == pytest.approx(math.sqrt(2) * float(ndtri(p)), abs=1e-15)
    assert c.p2 == c.p3
    assert c.p2 == pytest.approx(owen_p2(c.theta), abs=1e-10)


def test_normal_p2_null():
    assert normal_p2(0.0) == pytest.approx(1 / 3, abs=1e-12)


def test_normal_p2_monte_carlo():
    theta = math.sqrt(2) * float(ndtri(0.8))
    rng = np.random.default_rng(2024)
    n = 10**7
    z = rng.standard_normal(n)
    vals = ndtr(z + theta) ** 2
    se = vals.std() / math.sqrt(n)
    assert abs(vals.mean() - normal_p2(theta)) < 4 * se


@pytest.mark.parametrize("p", [0.5, 0.55, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99])
def test_laplace_shift_numeric_vs_lambertw(p):
    numeric = laplace_shift_numeric(p)
    assert numeric == pytest.approx(laplace_shift_lambertw(p), abs=1e-9)


@pytest.mark.parametrize("p", [0.6, 0.75, 0.9])
def test_laplace_shift_against_grid_integration(p):
    theta = laplace_shift_numeric(p)
    assert laplace_grid_p(theta) == pytest.approx(p, abs=1e-9)
    assert laplace_shift_p(theta) == pytest.approx(p, abs=1e-12)


def laplace_p2_mpmath(theta):
    mpmath.mp.dps = 30
    t = mpmath.mpf(theta)
    cdf = lambda x: mpmath.exp(x) / 2 if x < 0 else 1 - mpmath.exp(-x) / 2
    pdf = lambda x: mpmath.exp(-abs(x)) / 2
    # P(X < Y1, X < Y2) = E[(1 - F(X - theta))^2]
    f = lambda x: pdf(x) * (1 - cdf(x - t)) ** 2
    return float(mpmath.quad(f, [-mpmath.inf, 0, t, mpmath.inf]))


@pytest.mark.parametrize("p", [0.6, 0.8, 0.9])
def test_laplace_p2_by_quadrature(p):
    c = shieh_constants("double_exponential", p)
    assert c.p2 == c.p3
    assert c.p2 == pytest.approx(laplace_p2_mpmath(c.theta), abs=1e-12)


def test_constants_domain():
    for p in (0.4, 1.0, 0.0):
        with pytest.raises(DomainError):
            shieh_constants("normal", p)
    with pytest.raises(DomainError):
        shieh_constants("cauchy", 0.7)
    assert shieh_constants("laplace", 0.7).family == "double_exponential"


# moments -----------------------------------------------------------------


@pytest.mark.parametrize("family", ["normal", "shifted_exponential", "double_exponential"])
def test_moments_reduce_to_null(family):
    c = shieh_constants(family, 0.5)
    mom = alternative_moments(6, 6, 0.5, c)
    mu0, var0 = null_moments(6, 6)
    assert mom.mu == mu0 == 18
    assert mom.sigma**2 == pytest.approx(var0, abs=1e-9)
    assert var0 == 39


def test_moments_interchange_for_asymmetric_family():
    c = shieh_constants("shifted_exponential", 0.9)
    a = alternative_moments(12, 6, 0.9, c)
    b = alternative_moments(6, 12, 0.9, c)
    assert a.mu == b.mu
    assert a.sigma != pytest.approx(b.sigma, rel=1e-3)
    c = shieh_constants("normal", 0.9)
    assert alternative_moments(12, 6, 0.9, c).sigma == pytest.approx(
        alternative_moments(6, 12, 0.9, c).sigma, rel=1e-14)


@pytest.mark.parametrize("m,n", [(6, 6), (12, 6), (6, 12)])
def test_shifted_exponential_variance_by_simulation(m, n):
    # W under X ~ Exp(1), Y ~ Exp(1) + theta; n counts the Y group
    p = 0.8
    c = shieh_constants("shifted_exponential", p)
    rng = np.random.default_rng(m * 31 + n)
    reps = 200_000
    x = rng.exponential(size=(reps, m, 1))
    y = rng.exponential(size=(reps, 1, n)) + c.theta
    w = (y > x).sum(axis=(1, 2))
    mom = alternative_moments(m, n, p, c)
    assert w.mean() == pytest.approx(mom.mu, abs=4 * mom.sigma / math.sqrt(reps))
    # sample variance SE is about sigma^2 sqrt(2 / reps) for near-normal W
    assert w.var() == pytest.approx(mom.sigma**2, abs=5 * mom.sigma**2 * math.sqrt(2 / reps))


# Shieh power -------------------------------------------------------------


def shieh_reference(alpha, m, n, p, p2, p3):
    z = float(ndtri(1 - alpha / 2))
    mu0, s0 = m * n / 2, math.sqrt(m * n * (m + n + 1) / 12)
    mu = m * n * p
    s = math.sqrt(m * n * (p * (1 - p) + (n - 1) * (p2 - p * p) + (m - 1) * (p3 - p * p)))
    return ndtr((mu - mu0 - z * s0) / s) + ndtr((mu0 - mu - z * s0) / s)


@pytest.mark.parametrize("family", ["normal", "shifted_exponential", "double_exponential"])
@pytest.mark.parametrize("p", [0.6, 0.8, 0.9])
def test_shieh_power_matches_direct_formula(family, p):
    c = shieh_constants(family, p)
    ref = shieh_reference(0.05, 12, 6, p, c.p2, c.p3)
    assert shieh_power(0.05, 12, 6, p, family) == pytest.approx(ref, abs=1e-14)


def test_shieh_null_is_alpha():
    for fam in ("normal", "shifted_exponential", "double_exponential"):
        assert shieh_power(0.05, 6, 6, 0.5, fam) == pytest.approx(0.05, abs=1e-12)


def test_shieh_examples():
    # motivating example: p = 0.8 at 15 per group
    assert abs(shieh_power(0.05, 15, 15, 0.8, "normal") - 0.86) < 0.01
    assert shieh_power(0.05, 12, 6, 0.9, "shifted_exponential") == pytest.approx(0.9263, abs=1e-4)
    assert shieh_power(0.05, 6, 12, 0.9, "shifted_exponential") == pytest.approx(0.8613, abs=1e-4)


@pytest.mark.parametrize("family", ["normal", "double_exponential"])
@pytest.mark.parametrize("p", [0.6, 0.75, 0.9])
def test_shieh_symmetry(family, p):
    assert shieh_power(0.05, 6, 11, p, family) == pytest.approx(
        shieh_power(0.05, 11, 6, 1 - p, family), abs=1e-14)
    assert shieh_power(0.05, 8, 8, p, family) == pytest.approx(
        shieh_power(0.05, 8, 8, 1 - p, family), abs=1e-14)


@pytest.mark.parametrize("family", ["normal", "shifted_exponential", "double_exponential"])
def test_shieh_monotone(family):
    by_p = [shieh_power(0.05, 10, 10, p, family) for p in P_GRID]
    assert all(b >= a for a, b in zip(by_p, by_p[1:]))
    by_n = [shieh_power(0.05, s, s, 0.7, family) for s in range(4, 40)]
    assert all(b >= a for a, b in zip(by_n, by_n[1:]))


# Noether -----------------------------------------------------------------


def test_noether_examples():
    assert noether_power(0.05, 15, 15, 0.8) == pytest.approx(
        float(ndtr(math.sqrt(12 * 30 * 0.25) * 0.3 - 1.959963984540054)), abs=1e-12)
    assert round(noether_power(0.05, 15, 15, 0.8), 2) == 0.81
    assert noether_power(0.05, 6, 6, 0.5) == pytest.approx(0.025, abs=1e-12)
    one = noether_power(0.05, 15, 15, 0.8, sides="one")
    assert one > noether_power(0.05, 15, 15, 0.8)


def test_noether_depends_on_distance_from_half():
    for p in (0.55, 0.7, 0.9):
        assert noether_power(0.05, 9, 4, p) == noether_power(0.05, 9, 4, 1 - p)
        assert noether_power(0.05, 9, 4, p) == noether_power(0.05, 4, 9, p)


def test_noether_sample_size():
    za, zb = 1.959963984540054, float(ndtri(0.8))
    assert noether_sample_size(0.05, 0.8, 0.5, 0.9) == 17
    assert noether_sample_size(0.05, 0.8, 0.5, 0.9) == math.ceil((za + zb) ** 2 / (12 * 0.25 * 0.16))
    sizes = {c: noether_sample_size(0.05, 0.8, c, 0.75) for c in np.linspace(0.1, 0.9, 17)}
    assert min(sizes.values()) == sizes[0.5]


def test_noether_sample_size_achieves_power():
    n_total = noether_sample_size(0.05, 0.9, 0.5, 0.7)
    assert noether_power(0.05, n_total / 2, n_total / 2, 0.7) >= 0.9 - 1e-12
    assert noether_power(0.05, (n_total - 2) / 2, (n_total - 2) / 2, 0.7) < 0.9


def test_noether_guards():
    with pytest.raises(NumericalError):
        noether_sample_size(0.05, 0.8, 0.5, 0.5)
    with pytest.raises(DomainError):
        noether_sample_size(0.05, 0.8, 1.0, 0.7)
    with pytest.raises(DomainError):
        noether_power(0.05, 6, 6, 0.7, sides="three")
    with pytest.raises(DomainError):
        noether_power(1.5, 6, 6, 0.7)
