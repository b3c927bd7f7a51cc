"""Command-line interface.

Usage:
    wmwpower power-p --family normal --p 0.8 --m 15 --n 15
    wmwpower power-d --f "normal(0,1)" --g "normal(1.1902,1)" --m 15 --n 15
    wmwpower shieh --family shifted-exp --p 0.9 --m 12 --n 6
    wmwpower noether --p 0.9 --m 6 --n 6
    wmwpower sweep --preset table1 --format csv

Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import functools
import json
import re
import sys

import click

from . import _backend, analytic
from .distributions import (
    PARAM_NAMES,
    DistributionSpec,
    canonical_family,
    load_empirical,
    solve_alternative,
)
from .engine import DEFAULT_SEED, StudyDesign, empirical_power
from .errors import DomainError, ParameterError, WMWPowerError
from .report import METHODS, PRESETS, SweepRequest, percent_display, preset, run_sweep, to_csv, to_json

EXIT_NUMERICAL = 3

PROB = click.FloatRange(0.0, 1.0, min_open=True, max_open=True)
SIZE = click.IntRange(min=2)


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ParameterError, DomainError) as exc:
            raise click.UsageError(str(exc)) from None
        except WMWPowerError as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)

    return wrapper


def _common_design(func):
    func = click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
                        help="Threads used for the Monte Carlo loop.")(func)
    func = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=DEFAULT_SEED,
                        show_default=True)(func)
    func = click.option("--reps", type=click.IntRange(min=100), default=None,
                        help="Simulated datasets (default 100000 if m,n<20, else 10000).")(func)
    func = click.option("--alpha", type=PROB, default=0.05, show_default=True)(func)
    func = click.option("--n", "n", type=SIZE, required=True, help="Size of the Y (G) group.")(func)
    func = click.option("--m", "m", type=SIZE, required=True, help="Size of the X (F) group.")(func)
    return func


def _format_option(func):
    return click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]),
                        default="text", show_default=True)(func)


def _emit(fmt, record: dict, text_lines: list[tuple[str, str]]):
    if fmt == "json":
        click.echo(json.dumps(record, indent=2))
    elif fmt == "csv":
        keys = list(record)
        click.echo(",".join(keys))
        click.echo(",".join("" if record[k] is None else str(record[k]) for k in keys))
    else:
        width = max(len(k) for k, _ in text_lines)
        for k, v in text_lines:
            click.echo(f"{k.ljust(width)}  {v}")


def _estimate_record(est):
    return {
        "power": est.p_hat,
        "q": est.q,
        "s": est.s,
        "ci99_lo": est.wald_ci_99[0],
        "ci99_hi": est.wald_ci_99[1],
        "se_bound": est.se_bound,
        "p": est.effect_size_p,
        "odds": est.odds,
        "f": est.f.describe(),
        "g": est.g.describe(),
        "m": est.design.m,
        "n": est.design.n,
        "alpha": est.design.alpha,
        "test": est.design.resolved_method,
        "seed": est.seed,
        "backend": est.backend,
    }


def _estimate_lines(est):
    lo, hi = est.wald_ci_99
    return [
        ("empirical power", f"{est.p_hat:.4f} ({percent_display(est.p_hat)}%)"),
        ("99% Wald CI", f"({lo:.4f}, {hi:.4f})"),
        ("SE bound", f"{est.se_bound:.4f}"),
        ("replicates", f"{est.s} (rejections {est.q})"),
        ("F", est.f.describe()),
        ("G", est.g.describe()),
        ("effect size p", f"{est.effect_size_p:.4f}"),
        ("odds", f"{est.odds:.4f}"),
        ("design", f"m={est.design.m}, n={est.design.n}, alpha={est.design.alpha}, "
                   f"{est.design.resolved_method} test"),
        ("seed", f"{est.seed} ({est.backend} backend)"),
    ]


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def cli():
    """Power of the two-sided Wilcoxon Mann-Whitney rank-sum test."""


@cli.command("power-p")
@click.option("--family", required=True,
              type=click.Choice(["normal", "exp", "exponential", "laplace", "double-exponential"]),
              help="Family of F, shared by G.")
@click.option("--mu", type=float, default=0.0, show_default=True, help="Location of F (normal, Laplace).")
@click.option("--sd", type=float, default=None, help="Standard deviation of F (normal).")
@click.option("--scale", type=float, default=None, help="Scale of F (Laplace).")
@click.option("--rate", type=float, default=None, help="Rate of F (exponential).")
@click.option("--p", "p", type=PROB, required=True, help="Effect size P(X<Y).")
@click.option("--k", "k", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="sd(Y)/sd(X); normal and Laplace only (default 1).")
@_common_design
@_format_option
@_handle_errors
def power_p(family, mu, sd, scale, rate, p, k, m, n, alpha, reps, seed, workers, fmt):
    """Empirical power from F and the effect size p (G is solved for)."""
    fam = canonical_family(family)
    if fam == "exponential":
        if sd is not None or scale is not None or k is not None:
            raise click.UsageError("exponential F takes --rate only (no --sd, --scale or --k)")
        f = DistributionSpec.exponential(1.0 if rate is None else rate)
    elif fam == "normal":
        if rate is not None or scale is not None:
            raise click.UsageError("normal F takes --mu and --sd")
        f = DistributionSpec.normal(mu, 1.0 if sd is None else sd)
    else:
        if rate is not None or sd is not None:
            raise click.UsageError("Laplace F takes --mu and --scale")
        f = DistributionSpec.double_exponential(mu, 1.0 if scale is None else scale)
    solution = solve_alternative(f, p, k)
    est = empirical_power(f, solution.g, StudyDesign(m, n, alpha), s=reps, seed=seed,
                          workers=workers)
    record = _estimate_record(est)
    record.update(k=solution.k, g_params=solution.g.named_params, requested_p=p)
    _emit(fmt, record, _estimate_lines(est))


_SPEC_RE = re.compile(r"^\s*([A-Za-z_-]+)\s*(?:\((.*)\))?\s*$")


def parse_distribution(text: str, data_path=None) -> DistributionSpec:
    """Parse 'normal(0,1)', 'exp(rate=2)', 'weibull(2, 1)' or 'empirical'."""
    match = _SPEC_RE.match(text)
    if not match:
        raise ParameterError(f"cannot parse distribution {text!r}")
    fam = canonical_family(match.group(1))
    body = (match.group(2) or "").strip()
    if fam == "empirical":
        path = body or data_path
        if not path:
            raise ParameterError("empirical distribution needs a data file (empirical(PATH) or --data)")
        return load_empirical(path)
    names = PARAM_NAMES[fam]
    values = {}
    if body:
        for i, part in enumerate(p.strip() for p in body.split(",")):
            if "=" in part:
                key, val = (s.strip() for s in part.split("=", 1))
                if key not in names:
                    raise ParameterError(f"{fam} has no parameter {key!r}; expected {names}")
            else:
                if i >= len(names):
                    raise ParameterError(f"too many parameters for {fam}; expected {names}")
                key, val = names[i], part
            try:
                values[key] = float(val)
            except ValueError:
                raise ParameterError(f"parameter {key} of {fam} is not a number: {val!r}") from None
    missing = [nm for nm in names if nm not in values]
    if missing:
        raise ParameterError(f"{fam} needs parameters {names}; missing {missing}")
    return DistributionSpec(fam, tuple(values[nm] for nm in names))


@cli.command("power-d")
@click.option("--f", "f_text", required=True, help="Distribution of X, e.g. 'normal(0,1)' or 'empirical'.")
@click.option("--g", "g_text", required=True, help="Distribution of Y, e.g. 'weibull(2,1)'.")
@click.option("--data", "data", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Observations (one per line) for an 'empirical' F or G.")
@click.option("--f-data", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--g-data", type=click.Path(exists=True, dir_okay=False), default=None)
@_common_design
@_format_option
@_handle_errors
def power_d(f_text, g_text, data, f_data, g_data, m, n, alpha, reps, seed, workers, fmt):
    """Empirical power for fully specified F and G; also reports p and odds."""
    f = parse_distribution(f_text, f_data or data)
    g = parse_distribution(g_text, g_data or data)
    est = empirical_power(f, g, StudyDesign(m, n, alpha), s=reps, seed=seed, workers=workers)
    _emit(fmt, _estimate_record(est), _estimate_lines(est))


@cli.command("shieh")
@click.option("--family", required=True,
              type=click.Choice(["normal", "shifted-exp", "shifted_exponential", "laplace",
                                 "double-exponential"]))
@click.option("--p", "p", type=PROB, required=True)
@click.option("--m", "m", type=SIZE, required=True, help="Size of the X group.")
@click.option("--n", "n", type=SIZE, required=True, help="Size of the Y group.")
@click.option("--alpha", type=PROB, default=0.05, show_default=True)
@_format_option
@_handle_errors
def shieh(family, p, m, n, alpha, fmt):
    """Approximate power under a location shift, using the alternative variance of W."""
    fam = analytic.shieh_family(family)
    power = analytic.shieh_power(alpha, m, n, p, fam)
    consts = analytic.shieh_constants(fam, max(p, 1.0 - p))
    record = {"power": power, "family": fam, "p": p, "m": m, "n": n, "alpha": alpha,
              "theta": consts.theta, "p2": consts.p2, "p3": consts.p3}
    _emit(fmt, record, [
        ("Shieh power", f"{power:.4f} ({percent_display(power)}%)"),
        ("family", fam),
        ("theta", f"{consts.theta:.6f}"),
        ("p2", f"{consts.p2:.6f}"),
        ("p3", f"{consts.p3:.6f}"),
        ("design", f"m={m}, n={n}, alpha={alpha}, p={p}"),
    ])


@cli.command("noether")
@click.option("--p", "p", type=PROB, required=True)
@click.option("--m", "m", type=SIZE, default=None, help="Size of the X group (power mode).")
@click.option("--n", "n", type=SIZE, default=None, help="Size of the Y group (power mode).")
@click.option("--alpha", type=PROB, default=0.05, show_default=True)
@click.option("--sides", type=click.Choice(["one", "two"]), default="two", show_default=True)
@click.option("--target-power", type=PROB, default=None,
              help="Solve for the total sample size N instead of power.")
@click.option("--c", "c", type=PROB, default=0.5, show_default=True,
              help="Allocation fraction m/N for sample-size mode.")
@_format_option
@_handle_errors
def noether(p, m, n, alpha, sides, target_power, c, fmt):
    """Noether approximate power, or total sample size for a target power."""
    if target_power is not None:
        total = analytic.noether_sample_size(alpha, target_power, c, p, sides)
        record = {"N": total, "target_power": target_power, "c": c, "p": p,
                  "alpha": alpha, "sides": sides}
        _emit(fmt, record, [("total N", str(total)),
                            ("design", f"c={c}, p={p}, alpha={alpha}, {sides}-sided, "
                                       f"target power {target_power}")])
        return
    if m is None or n is None:
        raise click.UsageError("give --m and --n, or --target-power for sample size")
    power = analytic.noether_power(alpha, m, n, p, sides)
    record = {"power": power, "p": p, "m": m, "n": n, "alpha": alpha, "sides": sides}
    _emit(fmt, record, [("Noether power", f"{power:.4f} ({percent_display(power)}%)"),
                        ("design", f"m={m}, n={n}, alpha={alpha}, p={p}, {sides}-sided")])


def _parse_design(text):
    match = re.fullmatch(r"\s*(\d+)\s*[x,]\s*(\d+)\s*", text)
    if not match:
        raise click.BadParameter(f"expected MxN, got {text!r}", param_hint="--design")
    return int(match.group(1)), int(match.group(2))


@cli.command("sweep")
@click.option("--preset", "preset_name", type=click.Choice(PRESETS), default=None)
@click.option("--design", "designs", multiple=True, help="Group sizes MxN (repeatable).")
@click.option("--size", "sizes", multiple=True, type=SIZE, help="Equal group sizes m=n (repeatable).")
@click.option("--p", "p_grid", multiple=True, type=PROB, help="Effect sizes (default 0.50..0.95 by 0.05).")
@click.option("--k", "k_grid", multiple=True, type=click.FloatRange(min=0.0, min_open=True))
@click.option("--method", "methods", multiple=True, type=click.Choice(METHODS))
@click.option("--methods", "methods_csv", default=None, help="Comma-separated methods.")
@click.option("--family", "families", multiple=True,
              type=click.Choice(["normal", "exp", "exponential", "laplace", "double-exponential"]))
@click.option("--alpha", type=PROB, default=0.05, show_default=True)
@click.option("--reps", type=click.IntRange(min=100), default=None)
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=DEFAULT_SEED, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False, writable=True), default=None)
@_handle_errors
def sweep(preset_name, designs, sizes, p_grid, k_grid, methods, methods_csv, families, alpha,
          reps, seed, workers, fmt, output):
    """Tabulate power over a grid of designs, effect sizes and methods."""
    if methods_csv is not None:
        extra = [s.strip() for s in methods_csv.split(",") if s.strip()]
        bad = [s for s in extra if s not in METHODS]
        if bad:
            raise click.BadParameter(f"unknown method(s) {bad}", param_hint="--methods")
        if not extra:
            raise click.UsageError("method list is empty")
        methods = tuple(methods) + tuple(extra)
    if preset_name is not None:
        if designs or sizes or p_grid or k_grid or methods or families:
            raise click.UsageError("--preset cannot be combined with grid options")
        request = preset(preset_name, seed=seed, reps=reps, alpha=alpha)
    else:
        pairs = [_parse_design(d) for d in designs] + [(s, s) for s in sizes]
        if not pairs:
            raise click.UsageError("give --preset, or at least one --design/--size")
        if not methods:
            raise click.UsageError("method list is empty; pass --method")
        kwargs = {}
        if p_grid:
            kwargs["p_grid"] = tuple(p_grid)
        if k_grid:
            kwargs["k_grid"] = tuple(k_grid)
        if families:
            kwargs["families"] = tuple(families)
        request = SweepRequest(designs=pairs, methods=tuple(dict.fromkeys(methods)), alpha=alpha,
                               reps=reps, seed=seed, **kwargs)
    rows = run_sweep(request, workers=workers)
    text = to_csv(rows) if fmt == "csv" else to_json(rows)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    failed = [r for r in rows if r["status"] != "ok"]
    if failed:
        click.echo(f"Error: {len(failed)} of {len(rows)} rows failed", err=True)
        sys.exit(EXIT_NUMERICAL)


@cli.command("backend")
def backend():
    """Show which kernel backend is active."""
    click.echo(_backend.active.NAME)


def main(argv=None):
    cli.main(args=argv, prog_name="wmwpower")


if __name__ == "__main__":
    main()
