"""Monte Carlo ("exact") power of the two-sided WMW test.

Replicate ``r`` draws its m + n observations from counter-based stream
``(seed, r)``, so the rejection count Q is a plain sum over replicates and is
identical for any number of workers or chunking.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from scipy.special import ndtri

from . import _backend
from .distributions import DistributionSpec, effect_size_p, solve_alternative
from .errors import DomainError, ParameterError, TieError
from .rng import check_seed
from .wmw_test import EXACT_LIMIT, METHODS, rejection_table, resolve_method

DEFAULT_SEED = 20190417
MIN_REPLICATES = 100
CHUNK = 8192


@dataclass(frozen=True)
class StudyDesign:
    m: int
    n: int
    alpha: float = 0.05
    test_method: str = "auto"
    exact_limit: int = EXACT_LIMIT

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n or self.m < 2 or self.n < 2:
            raise ParameterError(f"group sizes must be integers >= 2, got m={self.m}, n={self.n}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.test_method not in METHODS:
            raise ParameterError(f"test method must be one of {METHODS}, got {self.test_method!r}")

    @property
    def resolved_method(self) -> str:
        return resolve_method(self.test_method, self.m, self.n, self.exact_limit)


@dataclass(frozen=True)
class PowerEstimate:
    p_hat: float
    q: int
    s: int
    se_bound: float
    wald_ci_99: tuple[float, float]
    effect_size_p: float
    odds: float
    seed: int
    design: StudyDesign
    f: DistributionSpec | None = field(default=None, repr=False)
    g: DistributionSpec | None = field(default=None, repr=False)
    backend: str = ""


def default_replicates(m: int, n: int) -> int:
    """100,000 datasets when both groups are below 20, else 10,000."""
    if m < 1 or n < 1:
        raise DomainError(f"group sizes must be >= 1, got m={m}, n={n}")
    return 100_000 if m < 20 and n < 20 else 10_000


def wald_ci(q: int, s: int, level: float = 0.99) -> tuple[float, float]:
    """Wald interval p_hat +/- z sqrt(p_hat (1 - p_hat) / s), clipped to [0, 1]."""
    if s < 1 or not 0 <= q <= s:
        raise DomainError(f"need 0 <= q <= s and s >= 1, got q={q}, s={s}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must lie in (0, 1), got {level}")
    p_hat = q / s
    half = float(ndtri((1.0 + level) / 2.0)) * math.sqrt(p_hat * (1.0 - p_hat) / s)
    return max(0.0, p_hat - half), min(1.0, p_hat + half)


def odds(p: float) -> float:
    return math.inf if p >= 1.0 else p / (1.0 - p)


def _chunks(s, size):
    return [(lo, min(lo + size, s)) for lo in range(0, s, size)]


def count_rejections(f, g, design, s, seed, workers=1, backend=None):
    """Q for replicates 0..s-1; raises TieError if any replicate has a cross-group tie."""
    be = backend if backend is not None else _backend.active
    reject = rejection_table(design.m, design.n, design.alpha, design.test_method,
                             design.exact_limit)
    args = (design.m, design.n, f.code, f.params, f.kernel_data,
            g.code, g.params, g.kernel_data, reject)

    def run(span):
        return be.count_rejections(seed, span[0], span[1], *args)

    spans = _chunks(s, CHUNK)
    if workers <= 1 or len(spans) == 1:
        results = [run(sp) for sp in spans]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, spans))
    ties = [t for _, t in results if t >= 0]
    if ties:
        raise TieError(
            f"replicate {min(ties)} produced a cross-group tie ({f.describe()} vs "
            f"{g.describe()}); ties are outside the continuous-data test"
        )
    return sum(q for q, _ in results)


def empirical_power(f: DistributionSpec, g: DistributionSpec, design: StudyDesign,
                    s: int | None = None, seed: int = DEFAULT_SEED, workers: int = 1,
                    backend=None) -> PowerEstimate:
    """Fraction of s simulated datasets (X ~ f, Y ~ g) on which the test rejects."""
    s = default_replicates(design.m, design.n) if s is None else int(s)
    if s < MIN_REPLICATES:
        raise ParameterError(f"need at least {MIN_REPLICATES} replicates, got {s}")
    seed = check_seed(seed)
    be = backend if backend is not None else _backend.active
    q = count_rejections(f, g, design, s, seed, workers=workers, backend=be)
    p = effect_size_p(f, g)
    return PowerEstimate(
        p_hat=q / s,
        q=q,
        s=s,
        se_bound=1.0 / math.sqrt(4.0 * s),
        wald_ci_99=wald_ci(q, s, 0.99),
        effect_size_p=p,
        odds=odds(p),
        seed=seed,
        design=design,
        f=f,
        g=g,
        backend=be.NAME,
    )


def empirical_power_from_p(f: DistributionSpec, p: float, k: float | None, design: StudyDesign,
                           s: int | None = None, seed: int = DEFAULT_SEED, workers: int = 1,
                           backend=None) -> PowerEstimate:
    """Solve for G from (F, p, k), then estimate power against it."""
    solution = solve_alternative(f, p, k)
    return empirical_power(f, solution.g, design, s=s, seed=seed, workers=workers,
                           backend=backend)
