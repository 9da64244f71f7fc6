"""Stochastic simulator of specimen health and cycles to failure.

The latent state of a specimen is an initial health drawn once per
realisation; it then decreases deterministically by 1/scale_n(s) at each
cycle of severity s, and the specimen fails when the health reaches zero.
Simulated NCFs are the crossing times of that process, kept real-valued
under the continuous relaxation of cycle counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SequenceExhausted
from .specimen import SeveritySequence, WeibullBasquinParams, scale_n

__all__ = [
    "HealthTrajectory",
    "SeededRng",
    "empirical_survival",
    "health_trajectory",
    "quantile_nearest_rank",
    "random_damage",
    "sample_initial_health",
    "simulate_ncf_constant",
    "simulate_ncf_sequence",
]


@dataclass(frozen=True)
class SeededRng:
    """Reproducible random stream identified by (master_seed, stream_id).

    Streams are mixed through numpy's SeedSequence, seeded with the pair
    itself, so identical pairs reproduce identical draws bit for bit.
    Derived stream r of a master offsets the stream id by r, giving
    statistically independent streams for parallel replications.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence((int(self.master_seed), int(self.stream_id)))
        )

    def stream(self, r: int) -> "SeededRng":
        return SeededRng(self.master_seed, self.stream_id + int(r))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, SeededRng):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError(f"expected SeededRng or numpy Generator, got {type(rng)!r}")


@dataclass(frozen=True)
class HealthTrajectory:
    """Sampled health path: checkpoint cycles and the health at each."""

    initial_health: float
    cycles: np.ndarray
    health: np.ndarray

    def __post_init__(self):
        if self.initial_health <= 0.0:
            raise DomainError("initial health must be positive")
        if np.any(np.diff(self.health) >= 0.0):
            raise DomainError("health must be strictly decreasing")


def sample_initial_health(m: float, rng, size: int | None = None):
    """Draw initial health by inverse transform: h = (-ln U)^(1/m).

    The survival function of the draw is the Weibull shape u(h) =
    exp(-h^m), i.e. a standard Weibull with shape m.
    """
    if m <= 0.0:
        raise DomainError(f"m must be positive, got {m}")
    gen = _as_generator(rng)
    u = gen.random(size)
    out = (-np.log1p(-u)) ** (1.0 / m)
    return float(out) if size is None else out


def simulate_ncf_constant(params: WeibullBasquinParams, s: float, rng, size: int | None = None):
    """Simulated NCF under constant severity: scale_n(s) times a fresh
    initial-health draw."""
    return scale_n(params, s) * sample_initial_health(params.m, rng, size)


def simulate_ncf_sequence(params: WeibullBasquinParams, seq: SeveritySequence, rng, size: int | None = None):
    """Simulated NCF under a variable-severity sequence.

    Draws an initial health and returns the real crossing time of the
    running sum of 1/scale_n(s_i) against it; with constant severity this
    coincides with simulate_ncf_constant under the same stream.

    Raises SequenceExhausted, carrying the residual health, if any draw
    survives the whole sequence.
    """
    h0 = sample_initial_health(params.m, rng, size)
    h_arr = np.atleast_1d(np.asarray(h0, dtype=float))
    rates = seq.severities() ** params.alpha / params.kappa
    counts = seq.counts().astype(float)
    cum = np.concatenate(([0.0], np.cumsum(rates * counts)))
    if np.any(h_arr > cum[-1]):
        worst = h_arr[h_arr > cum[-1]]
        raise SequenceExhausted(
            f"{worst.size} draw(s) outlive the sequence (total decrement {cum[-1]:.6g})",
            residual_health=float(np.max(worst)) - cum[-1],
        )
    starts = np.concatenate(([0.0], np.cumsum(counts)))[:-1]
    block = np.searchsorted(cum[1:], h_arr, side="left")
    block = np.minimum(block, len(rates) - 1)
    ncf = starts[block] + (h_arr - cum[block]) / rates[block]
    return float(ncf[0]) if size is None else ncf


def random_damage(params: WeibullBasquinParams, seq: SeveritySequence, initial_health: float, n):
    """Random cumulative damage after n cycles given the initial health:
    (1/h0) * sum of 1/scale_n(s_i)."""
    if initial_health <= 0.0:
        raise DomainError("initial health must be positive")
    from .specimen import severity_power_prefix

    return severity_power_prefix(seq, params.alpha, n) / params.kappa / initial_health


def health_trajectory(
    params: WeibullBasquinParams,
    seq: SeveritySequence,
    initial_health: float,
    max_points: int = 1000,
) -> HealthTrajectory:
    """Health path under the sequence, sampled at evenly spaced cycles.

    At most max_points checkpoints are stored regardless of sequence
    length, so ten-million-cycle histories stay cheap.  The path ends at
    the failure cycle when the sequence kills the specimen, otherwise at
    the end of the sequence.
    """
    if initial_health <= 0.0:
        raise DomainError("initial health must be positive")
    rates = seq.severities() ** params.alpha / params.kappa
    counts = seq.counts().astype(float)
    cum = np.concatenate(([0.0], np.cumsum(rates * counts)))
    fails = initial_health <= cum[-1]
    if fails:
        starts = np.concatenate(([0.0], np.cumsum(counts)))[:-1]
        b = int(np.searchsorted(cum[1:], initial_health, side="left"))
        n_end = starts[b] + (initial_health - cum[b]) / rates[b]
    else:
        n_end = float(seq.total_cycles)
    grid = np.unique(np.floor(np.linspace(0.0, n_end, min(max_points, max(2, int(n_end) + 1)))))
    if fails:
        # keep the exact (real-valued) failure cycle as the last checkpoint
        grid = np.unique(np.append(grid[grid < n_end], n_end))
    from .specimen import severity_power_prefix

    decrement = severity_power_prefix(seq, params.alpha, grid) / params.kappa
    return HealthTrajectory(
        initial_health=float(initial_health),
        cycles=grid,
        health=initial_health - np.asarray(decrement, dtype=float),
    )


def quantile_nearest_rank(values: np.ndarray, p: float) -> float:
    """Nearest-rank quantile of order p: the ceil(p*R)-th order statistic."""
    if not 0.0 < p <= 1.0:
        raise DomainError(f"quantile order must lie in (0, 1], got {p}")
    v = np.sort(np.asarray(values, dtype=float))
    rank = max(1, int(math.ceil(p * v.size)))
    return float(v[rank - 1])


def empirical_survival(values: np.ndarray, n_grid: np.ndarray) -> np.ndarray:
    """Fraction of samples strictly exceeding each grid point."""
    v = np.sort(np.asarray(values, dtype=float))
    return 1.0 - np.searchsorted(v, np.asarray(n_grid, dtype=float), side="right") / v.size
