"""Closed-form Weibull-Basquin specimen model.

S-N quantile curves, Miner damage accumulation, theoretical number of
cycles to failure (NCF) and survival probabilities under constant and
variable cycle severity.  Cycle counts are treated as continuous: all
closed forms are real-valued, and crossing times report both the real
value and its integer ceiling.

Conventions: severities in MPa, cycle counts dimensionless, kappa in
cycles*MPa^alpha.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .errors import DomainError, SequenceExhausted

__all__ = [
    "DetailCategory",
    "MinerNcf",
    "SeveritySequence",
    "ShapeFunction",
    "SurvivalCurve",
    "WeibullBasquinParams",
    "kappa_from_detail",
    "load_severity_csv",
    "miner_damage",
    "miner_damage_prefix",
    "miner_ncf",
    "scale_n",
    "severity_power_prefix",
    "shape_u",
    "shape_u_inv",
    "sn_quantile",
    "survival_constant",
    "survival_from_damage",
    "survival_generic",
    "survival_variable",
    "weibull_shape",
]


def _require_positive_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class DetailCategory:
    """Anchor point of an S-N curve: a proportion p of specimens fail at
    n_p cycles under constant severity s_p."""

    p: float
    n_p: float
    s_p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"reference probability must lie in (0, 1), got {self.p}")
        _require_positive_finite("n_p", self.n_p)
        _require_positive_finite("s_p", self.s_p)


@dataclass(frozen=True)
class WeibullBasquinParams:
    """The triple (m, alpha, kappa) that fixes every closed form.

    m is the Weibull modulus (shape of the NCF distribution), alpha the
    Basquin exponent (negative inverse slope of the log-log S-N line) and
    kappa the scale constant in cycles*MPa^alpha.
    """

    m: float
    alpha: float
    kappa: float

    def __post_init__(self):
        _require_positive_finite("m", self.m)
        _require_positive_finite("alpha", self.alpha)
        _require_positive_finite("kappa", self.kappa)

    @classmethod
    def from_detail(cls, m: float, alpha: float, detail: DetailCategory) -> "WeibullBasquinParams":
        return cls(m=m, alpha=alpha, kappa=kappa_from_detail(m, alpha, detail))


@dataclass(frozen=True)
class SeveritySequence:
    """Run-length encoded loading history: ordered (severity, count) blocks.

    Block encoding keeps million-cycle histories cheap: the damage of a
    block is one multiplication instead of `count` additions.
    """

    blocks: tuple[tuple[float, int], ...]

    def __post_init__(self):
        norm = []
        for severity, count in self.blocks:
            severity = float(severity)
            if not math.isfinite(severity) or severity <= 0.0:
                raise DomainError(f"block severity must be positive, got {severity!r}")
            if count != int(count) or int(count) < 1:
                raise DomainError(f"block count must be an integer >= 1, got {count!r}")
            norm.append((severity, int(count)))
        object.__setattr__(self, "blocks", tuple(norm))

    @property
    def total_cycles(self) -> int:
        return sum(count for _, count in self.blocks)

    def repeated(self, times: int) -> "SeveritySequence":
        if times < 1:
            raise DomainError(f"repetition count must be >= 1, got {times}")
        return SeveritySequence(self.blocks * times)

    def severities(self) -> np.ndarray:
        return np.array([s for s, _ in self.blocks])

    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.blocks])


class MinerNcf(NamedTuple):
    """Miner crossing time: real value under the continuous relaxation and
    the integer cycle count (ceiling)."""

    n_real: float
    n_cycles: int


@dataclass(frozen=True)
class SurvivalCurve:
    """Monotone nonincreasing map from cycle count to survival probability."""

    n: np.ndarray
    prob: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        prob = np.asarray(self.prob, dtype=float)
        if n.ndim != 1 or n.shape != prob.shape:
            raise DomainError("survival curve needs matching 1-d n and prob arrays")
        if np.any(np.diff(n) <= 0.0):
            raise DomainError("cycle grid must be strictly increasing")
        if prob.size and (prob[0] > 1.0 + 1e-12 or np.any(prob < -1e-15)):
            raise DomainError("survival probabilities must lie in [0, 1]")
        if np.any(np.diff(prob) > 1e-12):
            raise DomainError("survival probabilities must be nonincreasing")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "prob", prob)
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=float))


@dataclass(frozen=True)
class ShapeFunction:
    """Abstract shape pair (u, u_inv) of the NCF distribution.

    u maps normalized health to a survival probability, decreasing from
    u(0)=1; u_inv is its inverse.  The Weibull pair is the shipped
    instance, but any valid pair plugs into `survival_generic`.
    """

    u: Callable[[float], float]
    u_inv: Callable[[float], float]


def kappa_from_detail(m: float, alpha: float, detail: DetailCategory) -> float:
    """Scale constant kappa = (-ln(1-p))^(-1/m) * n_p * s_p^alpha."""
    m = _require_positive_finite("m", m)
    alpha = _require_positive_finite("alpha", alpha)
    try:
        kappa = (-math.log1p(-detail.p)) ** (-1.0 / m) * detail.n_p * detail.s_p**alpha
    except OverflowError:
        kappa = math.inf
    if not math.isfinite(kappa) or kappa <= 0.0:
        raise DomainError(
            f"kappa overflowed for alpha={alpha}, s_p={detail.s_p}; result {kappa!r}"
        )
    return kappa


def scale_n(params: WeibullBasquinParams, s):
    """Scale function of the NCF law: kappa * s^(-alpha), decreasing in s."""
    s = np.asarray(s, dtype=float)
    if np.any(~np.isfinite(s)) or np.any(s <= 0.0):
        raise DomainError("severity must be positive and finite")
    out = params.kappa * s ** (-params.alpha)
    return float(out) if out.ndim == 0 else out


def shape_u(m: float, h):
    """Weibull shape function u(h) = exp(-h^m)."""
    _require_positive_finite("m", m)
    h = np.asarray(h, dtype=float)
    if np.any(h < 0.0):
        raise DomainError("normalized health must be >= 0")
    out = np.exp(-(h**m))
    return float(out) if out.ndim == 0 else out


def shape_u_inv(m: float, q):
    """Inverse shape function: the h with exp(-h^m) = q, for q in (0, 1]."""
    _require_positive_finite("m", m)
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0.0) or np.any(q > 1.0):
        raise DomainError("probability must lie in (0, 1]")
    out = (-np.log(q)) ** (1.0 / m)
    return float(out) if out.ndim == 0 else out


def weibull_shape(m: float) -> ShapeFunction:
    """The Weibull (u, u_inv) pair with modulus m."""
    return ShapeFunction(u=lambda h: shape_u(m, h), u_inv=lambda q: shape_u_inv(m, q))


def sn_quantile(params: WeibullBasquinParams, p: float, s):
    """S-N curve: quantile of order p of the NCF under constant severity s.

    N_p(s) = (-ln(1-p))^(1/m) * scale_n(s).
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"reference probability must lie in (0, 1), got {p}")
    return (-math.log1p(-p)) ** (1.0 / params.m) * scale_n(params, s)


def severity_power_prefix(seq: SeveritySequence, alpha: float, n):
    """Sum of s_i^alpha over the first n cycles of the sequence.

    Accepts scalar or array n (cycle counts, 0 <= n <= total).  Partial
    blocks contribute proportionally, consistent with the continuous
    relaxation of cycle counts.
    """
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0.0) or np.any(n_arr > seq.total_cycles):
        raise DomainError(
            f"cycle count must lie in [0, {seq.total_cycles}] for this sequence"
        )
    if not seq.blocks:
        out = np.zeros_like(n_arr)
        return float(out) if out.ndim == 0 else out
    powers = seq.severities() ** alpha
    counts = seq.counts().astype(float)
    ends = np.cumsum(counts)
    starts = ends - counts
    cum = np.concatenate(([0.0], np.cumsum(powers * counts)))
    block = np.searchsorted(ends, n_arr, side="left")
    block = np.minimum(block, len(powers) - 1)
    out = cum[block] + (n_arr - starts[block]) * powers[block]
    return float(out) if out.ndim == 0 else out


def miner_damage(params: WeibullBasquinParams, p: float, seq: SeveritySequence) -> float:
    """Miner cumulative damage of the full sequence: sum of count/N_p(s)."""
    return miner_damage_prefix(params, p, seq, seq.total_cycles)


def miner_damage_prefix(params: WeibullBasquinParams, p: float, seq: SeveritySequence, n):
    """Miner damage accumulated over the first n cycles."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"reference probability must lie in (0, 1), got {p}")
    n_p_unit = (-math.log1p(-p)) ** (1.0 / params.m) * params.kappa
    return severity_power_prefix(seq, params.alpha, n) / n_p_unit


def miner_ncf(params: WeibullBasquinParams, p: float, seq: SeveritySequence) -> MinerNcf:
    """First cycle count at which Miner damage reaches 1.

    Returns the real crossing time of the piecewise-linear damage and its
    integer ceiling.  Raises SequenceExhausted (carrying the final damage)
    if the sequence ends below damage 1.
    """
    total = miner_damage(params, p, seq)
    if total < 1.0:
        raise SequenceExhausted(
            f"sequence ends at damage {total:.6g} < 1", final_damage=total
        )
    if not 0.0 < p < 1.0:
        raise DomainError(f"reference probability must lie in (0, 1), got {p}")
    n_p_unit = (-math.log1p(-p)) ** (1.0 / params.m) * params.kappa
    rates = seq.severities() ** params.alpha / n_p_unit
    counts = seq.counts().astype(float)
    cum = np.concatenate(([0.0], np.cumsum(rates * counts)))
    b = int(np.searchsorted(cum[1:], 1.0, side="left"))
    n_before = float(np.sum(counts[:b]))
    n_real = n_before + (1.0 - cum[b]) / rates[b]
    return MinerNcf(n_real=n_real, n_cycles=int(math.ceil(n_real - 1e-12)))


def survival_constant(params: WeibullBasquinParams, s: float, n):
    """Survival probability under constant severity: exp(-(n/scale_n)^m)."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0.0):
        raise DomainError("cycle count must be >= 0")
    out = np.exp(-((n_arr / scale_n(params, s)) ** params.m))
    return float(out) if out.ndim == 0 else out


def survival_variable(params: WeibullBasquinParams, seq: SeveritySequence, n):
    """Survival probability after n cycles of a variable-severity sequence.

    exp(-( sum_{i<=n} s_i^alpha / kappa )^m); equal to
    survival_from_damage(m, p, miner_damage_prefix(..)) for every p.
    """
    scalar = np.ndim(n) == 0
    psum = np.atleast_1d(np.asarray(severity_power_prefix(seq, params.alpha, n), dtype=float))
    out = np.ones_like(psum)
    pos = psum > 0.0
    # exponent assembled in log space to survive extreme alpha*ln(s)
    out[pos] = np.exp(-np.exp(params.m * (np.log(psum[pos]) - math.log(params.kappa))))
    return float(out[0]) if scalar else out


def survival_from_damage(m: float, p: float, damage):
    """Survival probability expressed through Miner damage: (1-p)^(D^m)."""
    _require_positive_finite("m", m)
    if not 0.0 < p < 1.0:
        raise DomainError(f"reference probability must lie in (0, 1), got {p}")
    damage = np.asarray(damage, dtype=float)
    if np.any(damage < 0.0):
        raise DomainError("damage must be >= 0")
    out = np.exp(damage**m * math.log1p(-p))
    return float(out) if out.ndim == 0 else out


def survival_generic(shape: ShapeFunction, p: float, damage: float) -> float:
    """Survival probability u(u_inv(1-p) * D) for an arbitrary shape pair."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"reference probability must lie in (0, 1), got {p}")
    return shape.u(shape.u_inv(1.0 - p) * damage)


def load_severity_csv(path) -> SeveritySequence:
    """Read a severity sequence from CSV with columns severity_mpa,count."""
    blocks: list[tuple[float, int]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"severity_mpa", "count"} <= set(reader.fieldnames):
            raise DomainError(f"{path}: expected columns severity_mpa,count")
        for row in reader:
            blocks.append((float(row["severity_mpa"]), int(float(row["count"]))))
    if not blocks:
        raise DomainError(f"{path}: no severity blocks found")
    return SeveritySequence(tuple(blocks))


def blocks_from_cycles(severities: Iterable[float]) -> SeveritySequence:
    """Build a run-length encoded sequence from an explicit cycle list."""
    blocks: list[tuple[float, int]] = []
    for s in severities:
        if blocks and blocks[-1][0] == float(s):
            blocks[-1] = (blocks[-1][0], blocks[-1][1] + 1)
        else:
            blocks.append((float(s), 1))
    return SeveritySequence(tuple(blocks))
