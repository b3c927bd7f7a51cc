"""Sweeps over designs, effect sizes and methods, plus tabular output.

Rows carry full-precision values; whole-percent rounding happens only in
:func:`percent_display`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .distributions import DistributionSpec, canonical_family
from .engine import DEFAULT_SEED, StudyDesign, default_replicates, empirical_power_from_p
from .errors import ParameterError, WMWPowerError

COLUMNS = ("m", "n", "alpha", "p", "k", "family", "method", "power",
           "ci_lo", "ci_hi", "s", "seed", "status")
METHODS = ("empirical", "shieh", "noether")
DEFAULT_P_GRID = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))

# family used by each method for a requested family name
_EMPIRICAL_FAMILY = {
    "normal": "normal",
    "exponential": "exponential",
    "shifted_exponential": "exponential",
    "double_exponential": "double_exponential",
}
_SHIEH_FAMILY = {
    "normal": "normal",
    "exponential": "shifted_exponential",
    "shifted_exponential": "shifted_exponential",
    "double_exponential": "double_exponential",
}
_BASE = {
    "normal": DistributionSpec.normal(0.0, 1.0),
    "exponential": DistributionSpec.exponential(1.0),
    "double_exponential": DistributionSpec.double_exponential(0.0, 1.0),
}


def round_half_up_percent(value: float) -> int:
    return int(math.floor(100.0 * value + 0.5))


def percent_display(value: float) -> str:
    """Whole percent, rounded half up; values in [0.995, 1) show as '>99'."""
    if 0.995 <= value < 1.0:
        return ">99"
    return str(round_half_up_percent(value))


@dataclass(frozen=True)
class Cell:
    """One row of a sweep: a design, an effect size and a method/family."""

    m: int
    n: int
    p: float
    method: str
    family: str
    k: float = 1.0
    alpha: float = 0.05
    s: int | None = None


@dataclass
class SweepRequest:
    designs: list[tuple[int, int]]
    p_grid: tuple[float, ...] = DEFAULT_P_GRID
    k_grid: tuple[float, ...] = (1.0,)
    methods: tuple[str, ...] = METHODS
    families: tuple[str, ...] = ("normal", "exponential", "double_exponential")
    alpha: float = 0.05
    reps: int | None = None
    seed: int = DEFAULT_SEED
    cells: list[Cell] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.cells is not None:
            return
        if not self.designs:
            raise ParameterError("sweep needs at least one (m, n) design")
        if not self.p_grid or not self.k_grid:
            raise ParameterError("p and k grids must be nonempty")
        if not self.methods:
            raise ParameterError("sweep needs at least one method")
        if not self.families:
            raise ParameterError("sweep needs at least one family")
        for mth in self.methods:
            if mth not in METHODS:
                raise ParameterError(f"unknown method {mth!r}; choose from {METHODS}")
        for p in self.p_grid:
            if not 0.0 < p < 1.0:
                raise ParameterError(f"p values must lie in (0, 1), got {p}")
        self.families = tuple(canonical_family(f) for f in self.families)
        for fam in self.families:
            if fam not in _EMPIRICAL_FAMILY:
                raise ParameterError(f"sweeps support normal, exponential and double_exponential, got {fam}")

    def expand(self) -> list[Cell]:
        if self.cells is not None:
            return list(self.cells)
        cells = []
        for m, n in self.designs:
            for mth in self.methods:
                fams = ("any",) if mth == "noether" else self.families
                seen = set()
                for fam in fams:
                    if mth == "empirical":
                        fam = _EMPIRICAL_FAMILY[fam]
                    elif mth == "shieh":
                        fam = _SHIEH_FAMILY[fam]
                    if fam in seen:
                        continue
                    seen.add(fam)
                    ks = self.k_grid if mth == "empirical" and fam != "exponential" else (1.0,)
                    for k in ks:
                        for p in self.p_grid:
                            cells.append(Cell(m, n, float(p), mth, fam, float(k), self.alpha, self.reps))
        return cells


def evaluate(cell: Cell, seed: int = DEFAULT_SEED, workers: int = 1) -> dict:
    row = {
        "m": cell.m, "n": cell.n, "alpha": cell.alpha, "p": cell.p, "k": cell.k,
        "family": cell.family, "method": cell.method, "power": None,
        "ci_lo": None, "ci_hi": None, "s": None, "seed": None, "status": "ok",
    }
    try:
        if cell.method == "noether":
            row["power"] = analytic.noether_power(cell.alpha, cell.m, cell.n, cell.p, "two")
        elif cell.method == "shieh":
            row["power"] = analytic.shieh_power(cell.alpha, cell.m, cell.n, cell.p, cell.family)
        else:
            design = StudyDesign(cell.m, cell.n, cell.alpha)
            s = cell.s if cell.s is not None else default_replicates(cell.m, cell.n)
            est = empirical_power_from_p(_BASE[cell.family], cell.p, cell.k, design,
                                         s=s, seed=seed, workers=workers)
            row.update(power=est.p_hat, ci_lo=est.wald_ci_99[0], ci_hi=est.wald_ci_99[1],
                       s=est.s, seed=est.seed)
    except WMWPowerError as exc:
        row["status"] = f"error: {exc}"
    return row


def run_sweep(request: SweepRequest, workers: int = 1) -> list[dict]:
    return [evaluate(c, seed=request.seed, workers=workers) for c in request.expand()]


# presets -------------------------------------------------------------------

TABLE1_P = (0.5, 0.7, 0.75, 0.8, 0.85, 0.9)


def table1_cells(alpha: float = 0.05, reps: int | None = None) -> list[Cell]:
    """Cells of the reference power table, in its row order.

    The unequal-size blocks are labeled like "n=6, m=12".  The table's
    Shieh rows read that as 12 X and 6 Y observations, its empirical rows as
    6 X and 12 Y; the cells below follow each reading.
    """
    cells = []

    def row(m, n, method, family):
        for p in TABLE1_P:
            cells.append(Cell(m, n, p, method, family, 1.0, alpha, reps))

    for size in (6, 15):
        row(size, size, "noether", "any")
        for fam in ("normal", "exponential", "double_exponential"):
            row(size, size, "empirical", fam)
        for fam in ("normal", "shifted_exponential", "double_exponential"):
            row(size, size, "shieh", fam)
    # block labeled n=6, m=12
    row(6, 12, "empirical", "exponential")
    row(12, 6, "shieh", "shifted_exponential")
    # block labeled n=12, m=6
    row(12, 6, "empirical", "exponential")
    row(6, 12, "shieh", "shifted_exponential")
    return cells


def preset(name: str, seed: int = DEFAULT_SEED, reps: int | None = None,
           alpha: float = 0.05) -> SweepRequest:
    name = name.lower()
    if name == "table1":
        return SweepRequest(designs=[], seed=seed, alpha=alpha, reps=reps,
                            cells=table1_cells(alpha, reps))
    if name == "fig1a":
        return SweepRequest(designs=[(s, s) for s in range(6, 16)],
                            p_grid=(0.8, 0.85, 0.9, 0.95), methods=("empirical",),
                            families=("normal",), seed=seed, reps=reps, alpha=alpha)
    if name == "fig1":
        return SweepRequest(designs=[(6, 6), (15, 15), (50, 50)], seed=seed, reps=reps,
                            alpha=alpha)
    if name == "fig2":
        return SweepRequest(designs=[(6, 6), (15, 15)], k_grid=(1.0, 2.0, 3.0, 4.0),
                            methods=("empirical",), families=("normal",), seed=seed,
                            reps=reps, alpha=alpha)
    raise ParameterError(f"unknown preset {name!r}; choose from table1, fig1a, fig1, fig2")


PRESETS = ("table1", "fig1a", "fig1", "fig2")


# output --------------------------------------------------------------------


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([_csv_value(r[c]) for c in COLUMNS])
    return buf.getvalue()


def to_json(rows: list[dict]) -> str:
    return json.dumps([{c: r[c] for c in COLUMNS} for r in rows], indent=2) + "\n"


_INT_COLS = {"m", "n", "s", "seed"}
_FLOAT_COLS = {"alpha", "p", "k", "power", "ci_lo", "ci_hi"}


def parse_csv(text: str) -> list[dict]:
    """Inverse of :func:`to_csv`."""
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        row = {}
        for c in COLUMNS:
            v = rec[c]
            if v == "":
                row[c] = None
            elif c in _INT_COLS:
                row[c] = int(v)
            elif c in _FLOAT_COLS:
                row[c] = float(v)
            else:
                row[c] = v
        rows.append(row)
    return rows


def as_float_array(rows, column):
    return np.array([np.nan if r[column] is None else r[column] for r in rows])
