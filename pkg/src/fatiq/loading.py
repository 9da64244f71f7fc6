"""Load models and Monte Carlo survival estimation for the structure.

Cycle loads are either a deterministic constant or i.i.d. draws of a
positive variable P whose alpha-th power is Gamma distributed (rate
theta, shape a).  The Gamma choice keeps partial sums of P_i^alpha Gamma
distributed, so a whole survival curve needs one draw per grid interval
per replication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridTooShort
from .health import SeededRng, _as_generator
from .specimen import SurvivalCurve
from .structure import StructureConstant, survival_from_power_sum

__all__ = [
    "ConstantLoad",
    "EquivLoad",
    "GammaPowerLoad",
    "McConfig",
    "equiv_load",
    "gamma_fit",
    "load_pdf",
    "mc_survival",
    "ncf_quantile_det",
    "ncf_quantile_sto",
    "sample_load_sums",
]

BISECT_LO = 1e-3
BISECT_HI = 1e6
BISECT_MAX_ITER = 200


@dataclass(frozen=True)
class ConstantLoad:
    """Every cycle applies the same load p (MN)."""

    p: float

    def __post_init__(self):
        if not math.isfinite(self.p) or self.p <= 0.0:
            raise DomainError(f"load must be positive, got {self.p!r}")


@dataclass(frozen=True)
class GammaPowerLoad:
    """i.i.d. loads with P^alpha Gamma distributed (rate theta, shape a)."""

    theta: float
    a: float
    alpha: float

    def __post_init__(self):
        for name in ("theta", "a", "alpha"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise DomainError(f"{name} must be positive, got {v!r}")

    def mean(self) -> float:
        return self.theta ** (-1.0 / self.alpha) * math.exp(
            math.lgamma(self.a + 1.0 / self.alpha) - math.lgamma(self.a)
        )

    def cv(self) -> float:
        return _cv_of_shape(self.a, self.alpha)


LoadModel = ConstantLoad | GammaPowerLoad


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo plan: replication count, cycle grid, master seed."""

    replications: int
    n_grid: np.ndarray
    master_seed: int = 0

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError("replication count must be >= 1")
        grid = np.asarray(self.n_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 1 or np.any(grid <= 0.0):
            raise DomainError("cycle grid must be a 1-d array of positive counts")
        if np.any(np.diff(grid) <= 0.0):
            raise DomainError("cycle grid must be strictly increasing")
        object.__setattr__(self, "n_grid", grid)

    @classmethod
    def log_grid(
        cls,
        replications: int,
        n_min: float = 1e3,
        n_max: float = 1e9,
        points: int = 200,
        master_seed: int = 0,
    ) -> "McConfig":
        grid = np.unique(np.round(np.geomspace(n_min, n_max, points)))
        return cls(replications=replications, n_grid=grid, master_seed=master_seed)


@dataclass(frozen=True)
class EquivLoad:
    """Constant load matching the p-quantile NCF of a random load."""

    p_eq: float
    ratio: float
    p: float
    c: float


def _cv_of_shape(a: float, alpha: float) -> float:
    r = math.lgamma(a + 2.0 / alpha) + math.lgamma(a) - 2.0 * math.lgamma(a + 1.0 / alpha)
    return math.sqrt(math.expm1(r))


def gamma_fit(p_mean: float, c: float, alpha: float) -> LoadModel:
    """Fit the load model with mean p_mean and coefficient of variation c.

    c = 0 degenerates to the constant load.  Otherwise the shape a solves
    the coefficient-of-variation equation (monotone decreasing in a, so a
    plain bisection suffices) and the rate follows from the mean; the
    recovered moments round-trip to 1e-8 relative.
    """
    if p_mean <= 0.0 or not math.isfinite(p_mean):
        raise DomainError(f"mean load must be positive, got {p_mean!r}")
    if c < 0.0:
        raise DomainError(f"coefficient of variation must be >= 0, got {c}")
    if c == 0.0:
        return ConstantLoad(p=p_mean)
    if alpha <= 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    lo, hi = BISECT_LO, BISECT_HI
    if not _cv_of_shape(hi, alpha) < c < _cv_of_shape(lo, alpha):
        raise DomainError(
            f"coefficient of variation {c} is outside the reachable range "
            f"({_cv_of_shape(hi, alpha):.3g}, {_cv_of_shape(lo, alpha):.3g}) for alpha={alpha}"
        )
    for _ in range(BISECT_MAX_ITER):
        mid = math.sqrt(lo * hi)
        if _cv_of_shape(mid, alpha) > c:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-14:
            break
    a = math.sqrt(lo * hi)
    theta = math.exp(alpha * (math.lgamma(a + 1.0 / alpha) - math.lgamma(a) - math.log(p_mean)))
    model = GammaPowerLoad(theta=theta, a=a, alpha=alpha)
    if abs(model.mean() / p_mean - 1.0) > 1e-8 or abs(model.cv() / c - 1.0) > 1e-8:
        raise DomainError(
            f"gamma fit failed to round-trip: mean {model.mean():.12g}, cv {model.cv():.12g}"
        )
    return model


def load_pdf(model: GammaPowerLoad, p):
    """Density of the load P when P^alpha is Gamma(rate theta, shape a)."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0):
        raise DomainError("loads must be positive")
    a, th, al = model.a, model.theta, model.alpha
    log_pdf = (
        a * math.log(th)
        - math.lgamma(a)
        + (a * al - 1.0) * np.log(p)
        - th * p**al
        + math.log(al)
    )
    out = np.exp(log_pdf)
    return float(out) if out.ndim == 0 else out


def sample_load_sums(model: LoadModel, n_grid, rng=None, size: int | None = None, alpha: float | None = None):
    """Cumulative sums of P_i^alpha at each grid cycle count.

    For the Gamma model the increment over (n1, n2] is one
    Gamma(rate theta, shape (n2-n1)a) draw; the deterministic model gives
    n * p^alpha exactly (pass alpha, no rng consumed).  Returns shape
    (len(grid),) or (size, len(grid)).
    """
    grid = np.asarray(n_grid, dtype=float)
    if np.any(np.diff(grid) <= 0.0) or np.any(grid <= 0.0):
        raise DomainError("cycle grid must be positive and strictly increasing")
    if isinstance(model, ConstantLoad):
        if alpha is None:
            raise DomainError("constant load sums need the exponent alpha")
        sums = constant_power_sums(model.p, alpha, grid)
        return sums if size is None else np.tile(sums, (int(size), 1))
    gen = _as_generator(rng)
    shapes = np.diff(np.concatenate(([0.0], grid))) * model.a
    reps = 1 if size is None else int(size)
    incr = gen.gamma(shape=shapes, scale=1.0 / model.theta, size=(reps, grid.size))
    sums = np.cumsum(incr, axis=1)
    return sums[0] if size is None else sums


def constant_power_sums(p: float, alpha: float, n_grid) -> np.ndarray:
    """Deterministic cumulative power sums: n * p^alpha."""
    return np.asarray(n_grid, dtype=float) * p**alpha


def mc_survival(qc: StructureConstant, model: LoadModel, cfg: McConfig) -> SurvivalCurve:
    """Estimated survival curve of the structure under the load model.

    Averages the conditional survival exp(-q * (sum P_i^alpha)^m) over the
    replications; deterministic given the seed (fixed draw and reduction
    order), with the per-point standard error attached.  The constant-load
    model short-circuits to the closed form with zero variance.
    """
    grid = cfg.n_grid
    if isinstance(model, ConstantLoad):
        prob = survival_from_power_sum(qc, constant_power_sums(model.p, qc.alpha, grid))
        return SurvivalCurve(n=grid, prob=np.asarray(prob), stderr=np.zeros_like(grid))
    if model.alpha != qc.alpha:
        raise DomainError(
            f"load model alpha {model.alpha} differs from structure alpha {qc.alpha}"
        )
    rng = SeededRng(cfg.master_seed)
    sums = sample_load_sums(model, grid, rng, size=cfg.replications)
    surv = survival_from_power_sum(qc, sums)
    # compensated column sums in fixed replication order keep the average
    # reproducible bit for bit
    mean = np.array([math.fsum(col) for col in surv.T]) / cfg.replications
    stderr = np.std(surv, axis=0, ddof=1) / math.sqrt(cfg.replications)
    return SurvivalCurve(n=grid, prob=mean, stderr=stderr)


def ncf_quantile_det(qc: StructureConstant, p_load: float, p: float) -> float:
    """Quantile of order p of the NCF under constant load, in closed form:
    n = (-ln(1-p))^(1/m) / (q^(1/m) * p_load^alpha)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"reference probability must lie in (0, 1), got {p}")
    if p_load <= 0.0:
        raise DomainError(f"load must be positive, got {p_load}")
    return (-math.log1p(-p)) ** (1.0 / qc.m) / (qc.q ** (1.0 / qc.m) * p_load**qc.alpha)


def ncf_quantile_sto(curve: SurvivalCurve, p: float) -> float:
    """Quantile of order p read off a survival curve.

    Interpolates linearly in ln n between the bracketing grid points; the
    p = 0 edge returns the first grid point by convention.  Raises
    GridTooShort (carrying the last survival value) when the curve never
    drops to 1-p.
    """
    if not 0.0 <= p < 1.0:
        raise DomainError(f"quantile order must lie in [0, 1), got {p}")
    if p == 0.0:
        return float(curve.n[0])
    target = 1.0 - p
    below = np.nonzero(curve.prob <= target)[0]
    if below.size == 0:
        raise GridTooShort(
            f"survival stays above {target:.6g} on the whole grid "
            f"(last value {curve.prob[-1]:.6g})",
            last_value=float(curve.prob[-1]),
        )
    i = int(below[0])
    if i == 0:
        return float(curve.n[0])
    s_hi, s_lo = curve.prob[i - 1], curve.prob[i]
    if s_hi <= s_lo:
        return float(curve.n[i])
    t = (s_hi - target) / (s_hi - s_lo)
    return float(math.exp(math.log(curve.n[i - 1]) + t * (math.log(curve.n[i]) - math.log(curve.n[i - 1]))))


def equiv_load(
    qc: StructureConstant, p_mean: float, c: float, p: float, cfg: McConfig
) -> EquivLoad:
    """Deterministic equivalent load: the constant load whose p-quantile
    NCF matches the random load's, by closed-form inversion of the
    constant-load survival."""
    model = gamma_fit(p_mean, c, qc.alpha)
    curve = mc_survival(qc, model, cfg)
    n_sto = ncf_quantile_sto(curve, p)
    p_eq = (
        (-math.log1p(-p)) ** (1.0 / qc.m) / (qc.q ** (1.0 / qc.m) * n_sto)
    ) ** (1.0 / qc.alpha)
    return EquivLoad(p_eq=p_eq, ratio=p_eq / p_mean, p=p, c=c)
