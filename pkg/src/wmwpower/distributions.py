"""Continuous distributions, the effect size P(X < Y), and alternative solvers.

A :class:`DistributionSpec` plays the role of either group distribution F or
G.  Sampling goes through inverse-CDF transforms of counter-based uniforms
(see :mod:`wmwpower.rng`), so the same spec and stream always give the same
draws on either kernel backend.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, optimize
from scipy.special import betainc, betaincinv, ndtr, ndtri

from . import _fallback as codes
from .errors import DomainError, NumericalError, ParameterError

FAMILIES = (
    "normal",
    "exponential",
    "shifted_exponential",
    "double_exponential",
    "beta",
    "weibull",
    "uniform",
    "empirical",
)

ALIASES = {
    "norm": "normal",
    "gaussian": "normal",
    "exp": "exponential",
    "shifted_exp": "shifted_exponential",
    "shifted-exp": "shifted_exponential",
    "shifted-exponential": "shifted_exponential",
    "laplace": "double_exponential",
    "double-exponential": "double_exponential",
    "dexp": "double_exponential",
}

PARAM_NAMES = {
    "normal": ("mu", "sd"),
    "exponential": ("rate",),
    "shifted_exponential": ("rate", "shift"),
    "double_exponential": ("mu", "scale"),
    "beta": ("a", "b"),
    "weibull": ("shape", "scale"),
    "uniform": ("lo", "hi"),
    "empirical": (),
}

_CODES = {
    "normal": codes.NORMAL,
    "exponential": codes.EXPONENTIAL,
    "shifted_exponential": codes.SHIFTED_EXPONENTIAL,
    "double_exponential": codes.DOUBLE_EXPONENTIAL,
    "beta": codes.BETA,
    "weibull": codes.WEIBULL,
    "uniform": codes.UNIFORM,
    "empirical": codes.EMPIRICAL,
}

P_TOL = 1e-10


def canonical_family(name: str) -> str:
    key = name.strip().lower()
    key = ALIASES.get(key, key)
    if key not in FAMILIES:
        raise ParameterError(f"unknown distribution family {name!r}")
    return key


@dataclass(frozen=True)
class DistributionSpec:
    """An immutable continuous distribution, or an empirical resampling basis.

    ``params`` follows :data:`PARAM_NAMES` for the family.  Exponential
    families are parameterized by rate.  The empirical family keeps its sorted
    observations in ``data`` and samples from them with replacement.
    """

    family: str
    params: tuple[float, ...] = ()
    data: tuple[float, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        family = canonical_family(self.family)
        object.__setattr__(self, "family", family)
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        expected = len(PARAM_NAMES[family])
        if len(params) != expected:
            raise ParameterError(
                f"{family} takes {expected} parameters {PARAM_NAMES[family]}, got {len(params)}"
            )
        if any(not math.isfinite(v) for v in params):
            raise ParameterError(f"{family} parameters must be finite: {params}")
        _validate(family, params)
        if family == "empirical":
            if self.data is None or len(self.data) < 2:
                raise ParameterError("empirical distribution needs at least 2 observations")
            data = tuple(sorted(float(v) for v in self.data))
            if any(not math.isfinite(v) for v in data):
                raise ParameterError("empirical observations must be finite")
            object.__setattr__(self, "data", data)
        elif self.data is not None:
            raise ParameterError(f"{family} does not take observation data")

    # constructors
    @classmethod
    def normal(cls, mu=0.0, sd=1.0):
        return cls("normal", (mu, sd))

    @classmethod
    def exponential(cls, rate=1.0):
        return cls("exponential", (rate,))

    @classmethod
    def shifted_exponential(cls, rate=1.0, shift=0.0):
        return cls("shifted_exponential", (rate, shift))

    @classmethod
    def double_exponential(cls, mu=0.0, scale=1.0):
        return cls("double_exponential", (mu, scale))

    laplace = double_exponential

    @classmethod
    def beta(cls, a, b):
        return cls("beta", (a, b))

    @classmethod
    def weibull(cls, shape, scale=1.0):
        return cls("weibull", (shape, scale))

    @classmethod
    def uniform(cls, lo=0.0, hi=1.0):
        return cls("uniform", (lo, hi))

    @classmethod
    def empirical(cls, observations):
        return cls("empirical", (), tuple(observations))

    @property
    def code(self) -> int:
        return _CODES[self.family]

    @property
    def kernel_params(self) -> tuple[float, ...]:
        return self.params

    @property
    def kernel_data(self):
        return None if self.data is None else np.asarray(self.data)

    @property
    def named_params(self) -> dict[str, float]:
        return dict(zip(PARAM_NAMES[self.family], self.params))

    @property
    def support(self) -> tuple[float, float]:
        fam, prm = self.family, self.params
        if fam in ("normal", "double_exponential"):
            return (-math.inf, math.inf)
        if fam in ("exponential", "weibull"):
            return (0.0, math.inf)
        if fam == "shifted_exponential":
            return (prm[1], math.inf)
        if fam == "beta":
            return (0.0, 1.0)
        if fam == "uniform":
            return prm
        return (self.data[0], self.data[-1])

    @property
    def is_continuous(self) -> bool:
        return self.family != "empirical"

    @property
    def is_symmetric(self) -> bool:
        if self.family in ("normal", "double_exponential", "uniform"):
            return True
        return self.family == "beta" and self.params[0] == self.params[1]

    def cdf(self, x):
        return cdf_value(self, x)

    def pdf(self, x):
        return pdf_value(self, x)

    def quantile(self, q):
        return quantile(self, q)

    def median(self) -> float:
        if self.family == "empirical":
            return float(np.median(self.data))
        return float(quantile(self, 0.5))

    def kinks(self) -> tuple[float, ...]:
        """Points where the density or CDF is not smooth."""
        fam, prm = self.family, self.params
        if fam == "double_exponential":
            return (prm[0],)
        lo, hi = self.support
        return tuple(v for v in (lo, hi) if math.isfinite(v))

    def sample(self, count, stream):
        return sample(self, count, stream)

    def describe(self) -> str:
        if self.family == "empirical":
            return f"empirical(n={len(self.data)})"
        inner = ", ".join(f"{k}={v:.10g}" for k, v in self.named_params.items())
        return f"{self.family}({inner})"


def _validate(family, params):
    def positive(*names_vals):
        for name, v in names_vals:
            if not v > 0:
                raise ParameterError(f"{family}: {name} must be > 0, got {v}")

    if family == "normal":
        positive(("sd", params[1]))
    elif family == "exponential":
        positive(("rate", params[0]))
    elif family == "shifted_exponential":
        positive(("rate", params[0]))
        if params[1] < 0:
            raise ParameterError(f"shifted_exponential: shift must be >= 0, got {params[1]}")
    elif family == "double_exponential":
        positive(("scale", params[1]))
    elif family == "beta":
        positive(("a", params[0]), ("b", params[1]))
    elif family == "weibull":
        positive(("shape", params[0]), ("scale", params[1]))
    elif family == "uniform":
        if not params[0] < params[1]:
            raise ParameterError(f"uniform: need lo < hi, got {params}")


def load_empirical(path) -> DistributionSpec:
    """Read observations from a text file, one real number per line.

    Blank lines and ``#`` comments are skipped.  Any other unparsable line
    aborts with its line number.
    """
    values = []
    bad = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            bad.append(lineno)
            continue
        if not math.isfinite(v):
            bad.append(lineno)
            continue
        values.append(v)
    if bad:
        shown = ", ".join(str(b) for b in bad[:10])
        raise ParameterError(f"{path}: cannot parse a real number on line(s) {shown}")
    return DistributionSpec.empirical(values)


def cdf_value(spec: DistributionSpec, x):
    """F(x) for the distribution; the empirical family gives its step CDF."""
    x = np.asarray(x, dtype=np.float64)
    fam, prm = spec.family, spec.params
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if fam == "normal":
            out = ndtr((x - prm[0]) / prm[1])
        elif fam in ("exponential", "shifted_exponential"):
            shift = prm[1] if fam == "shifted_exponential" else 0.0
            t = np.maximum(x - shift, 0.0)
            out = -np.expm1(-prm[0] * t)
        elif fam == "double_exponential":
            z = (x - prm[0]) / prm[1]
            out = np.where(z <= 0, 0.5 * np.exp(np.minimum(z, 0.0)),
                           1.0 - 0.5 * np.exp(-np.maximum(z, 0.0)))
        elif fam == "beta":
            out = betainc(prm[0], prm[1], np.clip(x, 0.0, 1.0))
        elif fam == "weibull":
            t = np.maximum(x, 0.0) / prm[1]
            out = -np.expm1(-(t ** prm[0]))
        elif fam == "uniform":
            out = np.clip((x - prm[0]) / (prm[1] - prm[0]), 0.0, 1.0)
        else:
            data = np.asarray(spec.data)
            out = np.searchsorted(data, x, side="right") / data.size
    return out[()] if np.ndim(out) == 0 else out


def pdf_value(spec: DistributionSpec, x):
    """Density of a continuous family (zero outside the support)."""
    if not spec.is_continuous:
        raise ParameterError("empirical distributions have no density")
    x = np.asarray(x, dtype=np.float64)
    fam, prm = spec.family, spec.params
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if fam == "normal":
            z = (x - prm[0]) / prm[1]
            out = np.exp(-0.5 * z * z) / (prm[1] * math.sqrt(2 * math.pi))
        elif fam in ("exponential", "shifted_exponential"):
            shift = prm[1] if fam == "shifted_exponential" else 0.0
            t = x - shift
            out = np.where(t >= 0, prm[0] * np.exp(-prm[0] * np.maximum(t, 0.0)), 0.0)
        elif fam == "double_exponential":
            out = np.exp(-np.abs(x - prm[0]) / prm[1]) / (2 * prm[1])
        elif fam == "beta":
            a, b = prm
            inside = (x > 0) & (x < 1)
            xc = np.clip(x, 1e-300, 1 - 1e-16)
            logpdf = ((a - 1) * np.log(xc) + (b - 1) * np.log1p(-xc)
                      - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)))
            out = np.where(inside, np.exp(logpdf), 0.0)
        elif fam == "weibull":
            k, lam = prm
            t = np.maximum(x, 0.0) / lam
            out = np.where(x > 0, (k / lam) * t ** (k - 1) * np.exp(-(t ** k)), 0.0)
        else:
            lo, hi = prm
            out = np.where((x >= lo) & (x <= hi), 1.0 / (hi - lo), 0.0)
    return out[()] if np.ndim(out) == 0 else out


def quantile(spec: DistributionSpec, q):
    """Inverse CDF.  For the empirical family, the smallest x with F(x) >= q."""
    q = np.asarray(q, dtype=np.float64)
    if np.any((q < 0) | (q > 1)):
        raise DomainError("quantile levels must lie in [0, 1]")
    fam, prm = spec.family, spec.params
    with np.errstate(divide="ignore", invalid="ignore"):
        if fam == "normal":
            out = prm[0] + prm[1] * ndtri(q)
        elif fam in ("exponential", "shifted_exponential"):
            shift = prm[1] if fam == "shifted_exponential" else 0.0
            out = shift - np.log1p(-q) / prm[0]
        elif fam == "double_exponential":
            z = np.where(q < 0.5, np.log(2 * q), -np.log(2 - 2 * q))
            out = prm[0] + prm[1] * z
        elif fam == "beta":
            out = betaincinv(prm[0], prm[1], q)
        elif fam == "weibull":
            out = prm[1] * (-np.log1p(-q)) ** (1 / prm[0])
        elif fam == "uniform":
            out = prm[0] + (prm[1] - prm[0]) * q
        else:
            data = np.asarray(spec.data)
            idx = np.clip(np.ceil(q * data.size).astype(np.int64) - 1, 0, data.size - 1)
            out = data[idx]
    return out[()] if np.ndim(out) == 0 else out


def sample(spec: DistributionSpec, count: int, stream) -> np.ndarray:
    """``count`` independent draws from ``spec`` using ``stream``'s next uniforms."""
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    u = stream.uniform(count)
    return np.asarray(stream.backend.transform(spec.code, spec.params, spec.kernel_data, u))


# effect size ------------------------------------------------------------


def effect_size_p(f: DistributionSpec, g: DistributionSpec) -> float:
    """p = P(X < Y) for independent X ~ f and Y ~ g."""
    if f.family == "exponential" and g.family == "exponential":
        mu, lam = f.params[0], g.params[0]
        return mu / (lam + mu)
    if f.family == "normal" and g.family == "normal":
        (mx, sx), (my, sy) = f.params, g.params
        return float(ndtr((my - mx) / math.hypot(sx, sy)))
    if not g.is_continuous and not f.is_continuous:
        xs = np.asarray(f.data)
        ys = np.asarray(g.data)
        below = np.searchsorted(xs, ys, side="left")
        return float(below.sum() / (xs.size * ys.size))
    if not g.is_continuous:
        return float(np.mean(cdf_value(f, np.asarray(g.data))))
    if not f.is_continuous:
        return float(1.0 - np.mean(cdf_value(g, np.asarray(f.data))))
    return _integrate_p(f, g)


def _integrate_p(f, g):
    """Adaptive quadrature of the integral of g(y) F(y) over the support of g."""
    lo, hi = g.support
    f_lo, f_hi = f.support
    # below F's support the integrand vanishes; above it, F = 1
    tail_mass = 0.0
    if f_lo > lo:
        lo = f_lo
    if f_hi < hi:
        tail_mass = 1.0 - float(cdf_value(g, f_hi))
        hi = f_hi
    if not lo < hi:
        return min(1.0, max(0.0, tail_mass))
    cuts = {f.median(), g.median(), *f.kinks(), *g.kinks()}
    interior = sorted(c for c in cuts if lo < c < hi)
    edges = [lo, *interior, hi]

    def integrand(y):
        return float(pdf_value(g, y) * cdf_value(f, y))

    total = tail_mass
    worst = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
            except integrate.IntegrationWarning as exc:
                raise NumericalError(
                    f"P(X<Y) quadrature did not converge on [{a}, {b}] for "
                    f"{f.describe()} vs {g.describe()}: {exc}"
                ) from None
        total += val
        worst = max(worst, err)
    if worst > 1e-10:
        raise NumericalError(
            f"P(X<Y) quadrature error estimate {worst:.3g} exceeds 1e-10 for "
            f"{f.describe()} vs {g.describe()}"
        )
    return min(1.0, max(0.0, total))


# alternative solvers ----------------------------------------------------


@dataclass(frozen=True)
class EffectSizeSolution:
    """The alternative G implied by (F, p, k), with the p it actually achieves."""

    g: DistributionSpec
    achieved_p: float
    k: float


SOLVABLE = ("exponential", "normal", "double_exponential")


def solve_alternative(f: DistributionSpec, p: float, k: float | None = None) -> EffectSizeSolution:
    """Find G in F's family with P(X < Y) = p and sd(Y) = k * sd(X).

    ``k`` applies to the normal and double-exponential families and defaults
    to 1; the exponential family is fully determined by ``p`` and ignores it.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"effect size p must lie in (0, 1), got {p}")
    if f.family not in SOLVABLE:
        raise ParameterError(
            f"cannot solve for G from p with family {f.family!r}; supported: {', '.join(SOLVABLE)}"
        )
    if f.family == "exponential":
        g = DistributionSpec.exponential(f.params[0] * (1.0 - p) / p)
        return EffectSizeSolution(g, effect_size_p(f, g), 1.0)

    k = 1.0 if k is None else float(k)
    if not k > 0:
        raise ParameterError(f"standard deviation ratio k must be > 0, got {k}")
    if f.family == "normal":
        mx, sx = f.params
        sy = k * sx
        g = DistributionSpec.normal(mx + float(ndtri(p)) * math.hypot(sx, sy), sy)
        return EffectSizeSolution(g, effect_size_p(f, g), k)

    mx, sx = f.params
    sy = k * sx
    mu_y = _solve_laplace_location(f, p, sy)
    g = DistributionSpec.double_exponential(mu_y, sy)
    achieved = effect_size_p(f, g)
    if abs(achieved - p) > P_TOL:
        raise NumericalError(
            f"Laplace solver reached p={achieved!r}, off target {p} by more than {P_TOL}"
        )
    return EffectSizeSolution(g, achieved, k)


def _solve_laplace_location(f, p, sy):
    mx = f.params[0]

    def gap(mu_y):
        return effect_size_p(f, DistributionSpec.double_exponential(mu_y, sy)) - p

    if p == 0.5 and sy == f.params[1]:
        return mx
    half = 20.0 * sy
    lo, hi = mx - half, mx + half
    g_lo, g_hi = gap(lo), gap(hi)
    for _ in range(60):
        if g_lo <= 0.0 <= g_hi:
            break
        half *= 2.0
        lo, hi = mx - half, mx + half
        g_lo, g_hi = gap(lo), gap(hi)
    else:
        raise NumericalError(f"no root bracket for Laplace location at p={p}, sd ratio {sy}")
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    return optimize.brentq(gap, lo, hi, xtol=1e-13 * max(1.0, sy), rtol=4 * np.finfo(float).eps,
                           maxiter=200)
