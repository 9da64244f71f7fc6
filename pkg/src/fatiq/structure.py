"""Weakest-link size effects and structure-level survival.

A structure is a finite partition into cells, each carrying a measure
(volume under the flaw-distribution measure) and a unitary severity.
Survival of the whole is the product of per-cell survivals, which the
exponential form turns into a cell sum; the shipped convention fixes the
scale function as scale_n(s) = kappa_ref * s^(-alpha) and the intensity
g(h) = h^m / lambda_ref, absorbing the free normalisation constants.  All
observable outputs depend only on the composite g(n / scale_n(s)), so any
other convention rescales internals without changing results.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .health import SeededRng, _as_generator

__all__ = [
    "CellPartition",
    "FailureDensity",
    "SizeEffectModel",
    "StructureConstant",
    "compute_q",
    "failure_density",
    "g_eval",
    "load_partition_csv",
    "poisson_microscopic_sample",
    "save_partition_csv",
    "survival_elastic",
    "survival_from_power_sum",
    "survival_structure_general",
]


@dataclass(frozen=True)
class SizeEffectModel:
    """Reference-specimen calibration: (m, alpha, kappa_ref, lambda_ref)."""

    m: float
    alpha: float
    kappa_ref: float
    lambda_ref: float

    def __post_init__(self):
        for name in ("m", "alpha", "kappa_ref", "lambda_ref"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class StructureConstant:
    """The load-independent constant of the elastic survival formula,
    exp(-q * (sum of P_i^alpha)^m)."""

    q: float
    m: float
    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.q) or self.q <= 0.0:
            raise DomainError(f"structure constant must be positive, got {self.q!r}")


@dataclass(frozen=True)
class CellPartition:
    """Finite cell partition: per-cell measures, unitary severities and,
    optionally, midpoint positions for map output."""

    measures: np.ndarray
    severities: np.ndarray
    positions: np.ndarray | None = None

    def __post_init__(self):
        measures = np.asarray(self.measures, dtype=float)
        severities = np.asarray(self.severities, dtype=float)
        if measures.ndim != 1 or measures.shape != severities.shape:
            raise DomainError("measures and severities must be matching 1-d arrays")
        if measures.size == 0:
            raise DomainError("partition must contain at least one cell")
        if np.any(measures <= 0.0) or np.any(~np.isfinite(measures)):
            raise DomainError("cell measures must be positive and finite")
        if np.any(severities < 0.0) or np.any(~np.isfinite(severities)):
            raise DomainError("cell severities must be nonnegative and finite")
        object.__setattr__(self, "measures", measures)
        object.__setattr__(self, "severities", severities)
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=float)
            if pos.shape != (measures.size, 3):
                raise DomainError("positions must have shape (n_cells, 3)")
            object.__setattr__(self, "positions", pos)

    @property
    def n_cells(self) -> int:
        return int(self.measures.size)

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.measures))


@dataclass(frozen=True)
class FailureDensity:
    """Per-cell probability masses of the failure location."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0.0):
            raise DomainError("failure-point weights must be nonnegative")
        if abs(float(np.sum(w)) - 1.0) > 1e-9:
            raise DomainError(f"failure-point weights sum to {np.sum(w)!r}, not 1")
        object.__setattr__(self, "weights", w)


def g_eval(model: SizeEffectModel, h):
    """Flaw intensity g(h) = h^m / lambda_ref under the shipped convention."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0.0):
        raise DomainError("health argument must be >= 0")
    out = h**model.m / model.lambda_ref
    return float(out) if out.ndim == 0 else out


def survival_structure_general(cells: CellPartition, h, g: Callable) -> float:
    """Survival of the structure for per-cell damage arguments h_k:
    exp(-sum_k measure_k * g(h_k)).

    Works with any increasing intensity g with g(0) = 0; exact weakest-link
    factorisation, so splitting cells at constant field changes nothing.
    """
    h = np.asarray(h, dtype=float)
    if h.shape != cells.measures.shape:
        raise DomainError("need one damage argument per cell")
    if np.any(h < 0.0):
        raise DomainError("damage arguments must be >= 0")
    gh = np.asarray(g(h), dtype=float)
    if gh.shape != h.shape:
        gh = np.array([float(g(v)) for v in h])
    return float(np.exp(-np.dot(cells.measures, gh)))


def compute_q(cells: CellPartition, model: SizeEffectModel) -> StructureConstant:
    """Structure constant by midpoint quadrature:
    q = (1/lambda_ref) * sum_k measure_k * (s_k^alpha / kappa_ref)^m."""
    s = cells.severities
    terms = np.zeros_like(s)
    pos = s > 0.0
    terms[pos] = np.exp(
        model.m * (model.alpha * np.log(s[pos]) - math.log(model.kappa_ref))
    )
    q = float(np.dot(cells.measures, terms)) / model.lambda_ref
    return StructureConstant(q=q, m=model.m, alpha=model.alpha)


def survival_from_power_sum(qc: StructureConstant, power_sum):
    """Survival exp(-q * power_sum^m) for power_sum = sum of P_i^alpha."""
    scalar = np.ndim(power_sum) == 0
    ps = np.atleast_1d(np.asarray(power_sum, dtype=float))
    if np.any(ps < 0.0):
        raise DomainError("load power sum must be >= 0")
    out = np.ones_like(ps)
    pos = ps > 0.0
    out[pos] = np.exp(-np.exp(math.log(qc.q) + qc.m * np.log(ps[pos])))
    return float(out[0]) if scalar else out


def survival_elastic(qc: StructureConstant, loads) -> float:
    """Survival after the cycles of a finite load sequence (MN each)."""
    loads = np.asarray(loads, dtype=float)
    if np.any(loads <= 0.0):
        raise DomainError("loads must be positive")
    return float(survival_from_power_sum(qc, np.sum(loads**qc.alpha)))


def failure_density(cells: CellPartition, m: float, alpha: float) -> FailureDensity:
    """Failure-point masses: weight_k proportional to measure_k * s_k^(alpha*m).

    Invariant under rescaling of the severity field, since the scale
    cancels in the normalisation.
    """
    s = cells.severities
    if not np.any(s > 0.0):
        raise DomainError("severity field is identically zero")
    smax = float(np.max(s))
    w = cells.measures * (s / smax) ** (alpha * m)
    w = w / np.sum(w)
    return FailureDensity(weights=w)


def poisson_microscopic_sample(
    cells: CellPartition,
    g: Callable,
    h_max: float,
    rng: SeededRng | np.random.Generator,
    size: int | None = None,
    g_inv: Callable | None = None,
):
    """Per-cell initial healths from the microscopic flaw model.

    Flaws form a Poisson point process on (cell, health) with intensity
    measure * dg; the health of a cell is the minimum flaw health in it
    (infinity when no flaw landed).  The truncation h_max must satisfy
    exp(-total_measure * g(h_max)) < 1e-6 so that the truncated process
    is indistinguishable from the full one at the 1e-6 level.

    Returns an array of per-cell healths, shape (n_cells,) or
    (size, n_cells).  Pass g_inv to avoid the numerical inversion of g.
    """
    g_top = float(g(h_max))
    if cells.total_measure * g_top < math.log(1e6):
        raise DomainError(
            "h_max too small: exp(-total_measure * g(h_max)) = "
            f"{math.exp(-cells.total_measure * g_top):.3g} >= 1e-6"
        )
    if g_inv is None:
        g_inv = _bisect_inverse(g, h_max)
    gen = _as_generator(rng)
    reps = 1 if size is None else int(size)
    counts = gen.poisson(cells.measures * g_top, size=(reps, cells.n_cells)).reshape(-1)
    total = int(np.sum(counts))
    flaw_h = np.asarray(g_inv(gen.random(total) * g_top), dtype=float)
    flat = np.full(counts.size, np.inf)
    nonzero = counts > 0
    if total:
        starts = np.cumsum(counts) - counts
        flat[nonzero] = np.minimum.reduceat(flaw_h, starts[nonzero])
    out = flat.reshape(reps, cells.n_cells)
    return out[0] if size is None else out


def _bisect_inverse(g: Callable, h_max: float, tol: float = 1e-12):
    """Numerical inverse of an increasing g on [0, h_max]."""

    def inv(values):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        lo = np.zeros_like(values)
        hi = np.full_like(values, h_max)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = np.asarray(g(mid), dtype=float) < values
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.max(hi - lo) < tol * h_max:
                break
        return 0.5 * (lo + hi)

    return inv


def save_partition_csv(cells: CellPartition, path) -> None:
    """Write a partition as CSV (cell_id, measure_m3, severity_unitary)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", "measure_m3", "severity_unitary"])
        for i in range(cells.n_cells):
            writer.writerow([i, f"{cells.measures[i]:.17g}", f"{cells.severities[i]:.17g}"])


def load_partition_csv(path) -> CellPartition:
    """Read a partition written by save_partition_csv."""
    measures, severities = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"measure_m3", "severity_unitary"} <= set(reader.fieldnames):
            raise DomainError(f"{path}: expected columns cell_id,measure_m3,severity_unitary")
        for row in reader:
            measures.append(float(row["measure_m3"]))
            severities.append(float(row["severity_unitary"]))
    return CellPartition(measures=np.array(measures), severities=np.array(severities))
