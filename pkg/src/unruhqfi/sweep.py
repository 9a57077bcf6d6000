"""Grid sweeps of the QFI, frozen-region detection and CSV / PGM export."""

from __future__ import annotations

import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NotTwoDimensional, OutOfRange, QfiError, SweepDegraded
from .params import MU_MAX, R_MAX, EstimationTarget, ModelParams
from .qfi import qfi_for_params

logger = logging.getLogger(__name__)

AXIS_BOUNDS = {
    "mu": (0.0, MU_MAX),
    "r": (0.0, R_MAX),
    "gamma": (0.0, 1.0),
    "gamma_a": (0.0, 1.0),
    "gamma_b": (0.0, 1.0),
}
MAX_FAILURE_FRACTION = 0.10
FLATNESS_FLOOR = 1e-9
DEFAULT_TAU = 0.05
DEFAULT_MIN_CELLS = 16
PGM_MAXVAL = 65535
CSV_HEADER = "axis1,axis2,wrt,scenario,f_total,f_cl,f_qu,f_mix"
# Pool start-up is not worth it below this many cells.
_PARALLEL_MIN_CELLS = 512


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if self.name not in AXIS_BOUNDS:
            raise ValueError(f"unknown axis {self.name!r}; expected one of {sorted(AXIS_BOUNDS)}")
        if self.count < 2:
            raise ValueError(f"axis {self.name}: count must be >= 2")
        if not self.start < self.stop:
            raise ValueError(f"axis {self.name}: need start < stop")
        lo, hi = AXIS_BOUNDS[self.name]
        if self.start < lo or self.stop > hi:
            raise OutOfRange(f"axis {self.name}: [{self.start}, {self.stop}] outside [{lo}, {hi}]")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """Parse ``name:min:max:count``; bounds accept ``pi/4``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise ValueError(f"axis spec {text!r} is not name:min:max:count")
        name, lo, hi, count = parts
        return cls(name.strip(), parse_number(lo), parse_number(hi), int(count))


def parse_number(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    key = str(text).strip().lower().replace(" ", "")
    if key in ("pi/4", "π/4"):
        return math.pi / 4
    return float(key)


@dataclass(frozen=True)
class GridSpec:
    axis1: Axis
    fixed: ModelParams
    wrt: EstimationTarget = EstimationTarget.R
    axis2: Axis | None = None

    def __post_init__(self):
        object.__setattr__(self, "wrt", EstimationTarget.parse(self.wrt))
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ValueError("axis1 and axis2 must differ")

    @property
    def scenario(self):
        return self.fixed.scenario

    @property
    def shape(self) -> tuple[int, ...]:
        if self.axis2 is None:
            return (self.axis1.count,)
        return (self.axis1.count, self.axis2.count)

    def params_at(self, i: int, j: int | None = None) -> ModelParams:
        p = self.fixed.with_value(self.axis1.name, float(self.axis1.values[i]))
        if self.axis2 is not None:
            p = p.with_value(self.axis2.name, float(self.axis2.values[j]))
        return p


@dataclass
class SweepResult:
    spec: GridSpec
    values: np.ndarray
    components: dict[str, np.ndarray] | None = None
    failures: list[tuple[tuple[int, ...], str]] = field(default_factory=list)


@dataclass(frozen=True)
class FrozenRegion:
    """Inclusive cell box ``[i0, i1] x [j0, j1]``."""

    i0: int
    i1: int
    j0: int
    j1: int
    mean_f: float
    flatness: float

    @property
    def area(self) -> int:
        return (self.i1 - self.i0 + 1) * (self.j1 - self.j0 + 1)


def flatness(values) -> float:
    """Relative peak-to-peak spread ``(max - min) / max(mean, 1e-9)``."""
    v = np.asarray(values, dtype=float)
    return float((v.max() - v.min()) / max(float(v.mean()), FLATNESS_FLOOR))


def _evaluate_row(spec: GridSpec, i: int, components: bool):
    """Evaluate every cell in row ``i``; returns (totals, comps, failures)."""
    ncol = 1 if spec.axis2 is None else spec.axis2.count
    totals = np.empty(ncol)
    comps = np.full((3, ncol), np.nan) if components else None
    failures = []
    for j in range(ncol):
        cell = (i,) if spec.axis2 is None else (i, j)
        try:
            res = qfi_for_params(spec.params_at(i, j if spec.axis2 is not None else None), spec.wrt)
        except QfiError as exc:
            totals[j] = np.nan
            failures.append((cell, f"{type(exc).__name__}: {exc}"))
            continue
        totals[j] = res.total
        if components:
            comps[:, j] = (res.f_cl, res.f_qu, res.f_mix)
        if res.fallback:
            failures.append((cell, res.note))
    return totals, comps, failures


def _evaluate_rows(args):
    spec, rows, components = args
    return [_evaluate_row(spec, i, components) for i in rows]


def resolve_workers(requested: int | None = None) -> int:
    """Worker count, capped by the ``QFI_THREADS`` environment variable."""
    workers = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("QFI_THREADS")
    if cap:
        try:
            cap_value = int(cap)
        except ValueError:
            raise ValueError(f"QFI_THREADS must be a positive integer, got {cap!r}") from None
        if cap_value < 1:
            raise ValueError(f"QFI_THREADS must be a positive integer, got {cap!r}")
        workers = min(workers, cap_value)
    return max(1, int(workers))


def run_sweep(spec: GridSpec, components: bool = True, workers: int | None = 1) -> SweepResult:
    """Evaluate the QFI on every node of the grid.

    Cells are independent; with ``workers > 1`` rows are farmed out to a
    process pool and reassembled by index, so the result does not depend on
    scheduling. Cells that fall back to the SLD total are kept and listed
    in ``failures``.

    Raises:
        SweepDegraded: more than 10% of the cells failed.
    """
    nrow = spec.axis1.count
    workers = resolve_workers(workers)
    ncells = int(np.prod(spec.shape))
    if workers > 1 and ncells >= _PARALLEL_MIN_CELLS:
        chunks = [list(range(k, nrow, workers)) for k in range(workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(_evaluate_rows, [(spec, c, components) for c in chunks]))
        rows: list = [None] * nrow
        for chunk, part in zip(chunks, parts):
            for i, row in zip(chunk, part):
                rows[i] = row
    else:
        rows = [_evaluate_row(spec, i, components) for i in range(nrow)]

    values = np.vstack([r[0] for r in rows]).reshape(spec.shape)
    comps = None
    if components:
        stacked = np.stack([r[1] for r in rows], axis=1).reshape((3,) + spec.shape)
        comps = dict(zip(("f_cl", "f_qu", "f_mix"), stacked))
    failures = [f for r in rows for f in r[2]]
    if len(failures) > MAX_FAILURE_FRACTION * ncells:
        raise SweepDegraded(f"{len(failures)} of {ncells} cells failed")
    if failures:
        logger.info("%d cells fell back or failed", len(failures))
    return SweepResult(spec, values, comps, failures)


def detect_frozen_regions(
    res: SweepResult | np.ndarray,
    tau: float = DEFAULT_TAU,
    min_cells: int = DEFAULT_MIN_CELLS,
) -> list[FrozenRegion]:
    """Greedy search for flat, non-overlapping rectangles of the QFI field.

    Seeds are visited in row-major order. From an unclaimed seed the box
    first grows down its column, then widens to the right one column at a
    time, each step only while every cell is unclaimed and the box's
    flatness stays within ``tau``. Boxes of at least ``min_cells`` cells are
    claimed. A 1-D sweep is treated as a single column.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    field_ = np.asarray(res.values if isinstance(res, SweepResult) else res, dtype=float)
    if field_.ndim == 1:
        field_ = field_[:, None]
    nrow, ncol = field_.shape
    claimed = np.zeros(field_.shape, dtype=bool)
    regions = []

    def ok(lo, hi, total, count):
        return (hi - lo) / max(total / count, FLATNESS_FLOOR) <= tau

    for i0 in range(nrow):
        for j0 in range(ncol):
            if claimed[i0, j0] or not np.isfinite(field_[i0, j0]):
                continue
            lo = hi = total = field_[i0, j0]
            count = 1
            i1 = i0
            while i1 + 1 < nrow and not claimed[i1 + 1, j0]:
                v = field_[i1 + 1, j0]
                if not np.isfinite(v) or not ok(min(lo, v), max(hi, v), total + v, count + 1):
                    break
                lo, hi, total, count = min(lo, v), max(hi, v), total + v, count + 1
                i1 += 1
            j1 = j0
            while j1 + 1 < ncol:
                col = field_[i0:i1 + 1, j1 + 1]
                if claimed[i0:i1 + 1, j1 + 1].any() or not np.all(np.isfinite(col)):
                    break
                nlo, nhi = min(lo, col.min()), max(hi, col.max())
                ntotal, ncount = total + col.sum(), count + col.size
                if not ok(nlo, nhi, ntotal, ncount):
                    break
                lo, hi, total, count = nlo, nhi, ntotal, ncount
                j1 += 1
            if count >= min_cells:
                claimed[i0:i1 + 1, j0:j1 + 1] = True
                box = field_[i0:i1 + 1, j0:j1 + 1]
                regions.append(FrozenRegion(i0, i1, j0, j1, float(box.mean()), flatness(box)))
    regions.sort(key=lambda reg: (-reg.area, reg.i0, reg.j0))
    return regions


def format_number(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else format(float(x), ".17g")


def csv_text(res: SweepResult) -> str:
    spec = res.spec
    a1 = spec.axis1.values
    a2 = spec.axis2.values if spec.axis2 is not None else None
    lines = [CSV_HEADER]
    for idx in np.ndindex(*spec.shape):
        i = idx[0]
        x2 = format_number(a2[idx[1]]) if a2 is not None else ""
        comps = ("", "", "")
        if res.components is not None:
            comps = tuple(format_number(res.components[k][idx]) for k in ("f_cl", "f_qu", "f_mix"))
        lines.append(",".join((format_number(a1[i]), x2, spec.wrt.value, spec.scenario.value, format_number(res.values[idx])) + comps))
    return "\n".join(lines) + "\n"


def _write(destination, text: str) -> None:
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", newline="\n", encoding="ascii") as fh:
            fh.write(text)
    else:
        destination.write(text)


def export_csv(res: SweepResult, destination) -> None:
    """Write one row per cell (axis1-major) to a path or text stream."""
    _write(destination, csv_text(res))


def pgm_text(values, vmax: float | None = None) -> str:
    field_ = np.asarray(values, dtype=float)
    if field_.ndim != 2:
        raise NotTwoDimensional(f"heatmap needs a 2-D field, got shape {field_.shape}")
    if vmax is None:
        vmax = float(np.nanmax(field_)) if field_.size else 0.0
    height, width = field_.shape
    if vmax > 0:
        scaled = np.floor(PGM_MAXVAL * np.nan_to_num(field_, nan=0.0) / vmax + 0.5)
    else:
        scaled = np.zeros_like(field_)
    pixels = np.clip(scaled, 0, PGM_MAXVAL).astype(int)
    buf = io.StringIO()
    buf.write(f"P2\n{width} {height}\n{PGM_MAXVAL}\n")
    for row in pixels[::-1]:
        buf.write(" ".join(str(p) for p in row))
        buf.write("\n")
    return buf.getvalue()


def export_heatmap(res: SweepResult, destination, normalization: str | float = "global-max") -> None:
    """Write an ASCII PGM; the top image row is the largest axis1 value.

    ``normalization`` is ``"global-max"`` or a fixed positive ``vmax``.
    """
    if res.spec.axis2 is None:
        raise NotTwoDimensional("heatmap export needs a 2-D sweep")
    vmax = None if normalization == "global-max" else float(normalization)
    if vmax is not None and vmax <= 0:
        raise ValueError("fixed vmax must be positive")
    _write(destination, pgm_text(res.values, vmax))
