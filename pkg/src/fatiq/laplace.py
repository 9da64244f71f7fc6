"""Hot-point (Laplace) approximation of the structural severity integral.

For large exponents k, the integral of severity^k over the beam is
dominated by the neighbourhoods of the two local maxima of the severity
field: the support corner of the web, where the shear stress peaks, and a
point on the top flange between midspan and the support, where bending
and shear trade off.  Expanding the log-severity to its first nonvanishing
derivatives there turns the integral into products of one-dimensional
exponential and Gaussian factors with explicit volume terms, compared
here against a midpoint-rule quadrature on the reference grid.

Derivatives of the log-severity are taken by finite differences (1e-3 m
steps in x and y, 1e-4 m in z), one-sided inward where the hot point sits
on a domain boundary; the field's inner max over load positions makes
symbolic differentiation brittle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, HotPointStructureError
from .ibeam import BeamGeometry, BeamGrid, quarter_severity_grid, severity_field

__all__ = [
    "HotPoint",
    "LaplaceContribution",
    "LaplaceRow",
    "laplace_i1",
    "laplace_i2",
    "locate_hot_points",
    "phi1",
    "phi2",
    "quadrature_iprime",
    "table1",
]

logger = logging.getLogger(__name__)

FD_STEP_X = 1e-3
FD_STEP_Y = 1e-3
FD_STEP_Z = 1e-4


def phi1(u):
    """Truncated exponential mass: integral of e^(-v) over [0, u] = 1 - e^(-u)."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0):
        raise DomainError("phi1 argument must be >= 0")
    out = -np.expm1(-u)
    return float(out) if out.ndim == 0 else out


def phi2(u):
    """Truncated Gaussian mass: integral of e^(-v^2/2) over [0, u].

    Evaluated through the error function, sqrt(pi/2) * erf(u / sqrt(2));
    saturates at sqrt(pi/2).
    """
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u < 0.0):
        raise DomainError("phi2 argument must be >= 0")
    out = math.sqrt(math.pi / 2.0) * np.array([math.erf(v / math.sqrt(2.0)) for v in u])
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class HotPoint:
    """A local maximum of the severity field with the log-severity
    derivatives and characteristic lengths used by the expansion."""

    x: float
    y: float
    z: float
    severity: float
    derivatives: dict
    delta_x: float
    delta_y: float
    delta_z: float


class LaplaceContribution(NamedTuple):
    value: float
    v_web: float
    v_flange: float


@dataclass(frozen=True)
class LaplaceRow:
    """One row of the approximation-quality table at exponent k."""

    k: float
    i1: float
    i2: float
    v1_web: float
    v1_flange: float
    v2_web: float
    v2_flange: float
    i_quadrature: float
    ratio: float
    fraction_i1: float
    web_fraction_1: float
    web_fraction_2: float

    def __post_init__(self):
        for name in ("v1_web", "v1_flange", "v2_web", "v2_flange"):
            if getattr(self, name) <= 0.0:
                raise DomainError(f"{name} must be positive")
        for name in ("fraction_i1", "web_fraction_1", "web_fraction_2"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1]")


def _log_severity(geom: BeamGeometry, x: float, y: float, z: float) -> float:
    return math.log(float(severity_field(geom, x, y, z)))


def _d1_inward(f0: float, f1: float, f2: float, step: float) -> float:
    # second-order one-sided derivative in the +step direction
    return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step)


def _golden_max(func, lo: float, hi: float, tol: float) -> float:
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - ratio * (hi - lo)
    d = lo + ratio * (hi - lo)
    fc, fd = func(c), func(d)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - ratio * (hi - lo)
            fc = func(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + ratio * (hi - lo)
            fd = func(d)
    return 0.5 * (lo + hi)


def top_edge_argmax(geom: BeamGeometry, n: int = 2001) -> float:
    """Grid argmax of the severity along the top flange edge (y = h/2,
    z = 0) over half the span."""
    xs = np.linspace(0.0, geom.length / 2.0, n)
    vals = severity_field(geom, xs, geom.h / 2.0, 0.0)
    return float(xs[int(np.argmax(vals))])


def _scan_extra_maxima(geom: BeamGeometry, x2: float) -> None:
    """Warn if the sampled z = 0 quarter-plane shows a local maximum away
    from the two expected hot points."""
    xs = np.linspace(0.0, geom.length / 2.0, 161)
    ys = np.linspace(0.0, geom.h / 2.0, 81)
    vals = severity_field(geom, xs[:, None], ys[None, :], 0.0)
    padded = np.full((vals.shape[0] + 2, vals.shape[1] + 2), -np.inf)
    padded[1:-1, 1:-1] = vals
    interior = vals
    is_max = (
        (interior > padded[:-2, 1:-1])
        & (interior > padded[2:, 1:-1])
        & (interior > padded[1:-1, :-2])
        & (interior > padded[1:-1, 2:])
    )
    dx_tol = 2.0 * (xs[1] - xs[0])
    dy_tol = 2.0 * (ys[1] - ys[0])
    for i, j in zip(*np.nonzero(is_max)):
        near_1 = xs[i] <= dx_tol and ys[j] <= dy_tol
        near_2 = abs(xs[i] - x2) <= dx_tol and abs(ys[j] - geom.h / 2.0) <= dy_tol
        if not (near_1 or near_2):
            logger.warning(
                "unexpected local severity maximum near (x=%.3f, y=%.3f, z=0)",
                xs[i],
                ys[j],
            )


def locate_hot_points(geom: BeamGeometry) -> tuple[HotPoint, HotPoint]:
    """Locate the two severity maxima and their expansion data.

    The first hot point is the corner (0, 0, 0); the second lies on the
    top flange edge at (x2, h/2, 0) with 0 < x2 < L/2 and is found by a
    grid scan refined by golden-section search to 1e-4 m.  Raises
    HotPointStructureError when the derivative signs do not show the
    expected corner/ridge structure.
    """
    big_l, h2 = geom.length, geom.h / 2.0

    def lphi(x, y, z):
        return _log_severity(geom, x, y, z)

    dx, dy, dz = FD_STEP_X, FD_STEP_Y, FD_STEP_Z

    # corner hot point: one-sided in x and z, central in y
    f0 = lphi(0.0, 0.0, 0.0)
    d_x = _d1_inward(f0, lphi(dx, 0.0, 0.0), lphi(2 * dx, 0.0, 0.0), dx)
    d_yy = (lphi(0.0, dy, 0.0) - 2.0 * f0 + lphi(0.0, -dy, 0.0)) / dy**2
    d_z = _d1_inward(f0, lphi(0.0, 0.0, dz), lphi(0.0, 0.0, 2 * dz), dz)
    if not (d_x < 0.0 and d_yy < 0.0 and d_z < 0.0):
        raise HotPointStructureError(
            f"geometry violates the corner hot-point structure: "
            f"d_x={d_x:.3g}, d_yy={d_yy:.3g}, d_z={d_z:.3g}"
        )
    hp1 = HotPoint(
        x=0.0,
        y=0.0,
        z=0.0,
        severity=float(severity_field(geom, 0.0, 0.0, 0.0)),
        derivatives={"dx": d_x, "dyy": d_yy, "dz": d_z},
        delta_x=1.0 / -d_x,
        delta_y=1.0 / math.sqrt(-d_yy),
        delta_z=1.0 / -d_z,
    )

    x2_coarse = top_edge_argmax(geom)
    pace = (big_l / 2.0) / 2000.0
    x2 = _golden_max(
        lambda x: float(severity_field(geom, x, h2, 0.0)),
        max(0.0, x2_coarse - 2 * pace),
        min(big_l / 2.0, x2_coarse + 2 * pace),
        tol=1e-6,
    )
    if not 0.0 < x2 < big_l / 2.0 - pace:
        raise HotPointStructureError(f"edge hot point not interior: x2={x2:.4f}")
    g0 = lphi(x2, h2, 0.0)
    d_xx = (lphi(x2 + dx, h2, 0.0) - 2.0 * g0 + lphi(x2 - dx, h2, 0.0)) / dx**2
    d_y = (3.0 * g0 - 4.0 * lphi(x2, h2 - dy, 0.0) + lphi(x2, h2 - 2 * dy, 0.0)) / (2.0 * dy)
    d_z2 = _d1_inward(g0, lphi(x2, h2, dz), lphi(x2, h2, 2 * dz), dz)
    if not (d_xx < 0.0 and d_y > 0.0 and d_z2 < 0.0):
        raise HotPointStructureError(
            f"geometry violates the edge hot-point structure: "
            f"d_xx={d_xx:.3g}, d_y={d_y:.3g}, d_z={d_z2:.3g}"
        )
    hp2 = HotPoint(
        x=x2,
        y=h2,
        z=0.0,
        severity=float(severity_field(geom, x2, h2, 0.0)),
        derivatives={"dxx": d_xx, "dy": d_y, "dz": d_z2},
        delta_x=1.0 / math.sqrt(-d_xx),
        delta_y=1.0 / d_y,
        delta_z=1.0 / -d_z2,
    )

    _scan_extra_maxima(geom, x2)
    return hp1, hp2


def laplace_i1(geom: BeamGeometry, k: float, hp: HotPoint) -> LaplaceContribution:
    """Corner hot-point contribution: exponential decay in x and z,
    Gaussian in y, cut off at the quarter-domain boundaries."""
    if k <= 0.0:
        raise DomainError("exponent k must be positive")
    sk = math.sqrt(k)
    lx = hp.delta_x / k
    ly = hp.delta_y / sk
    lz = hp.delta_z / k
    x_factor = lx * phi1((geom.length / 2.0) / lx)
    y_web = ly * phi2(geom.web_half_height / ly)
    y_flange = ly * (phi2((geom.h / 2.0) / ly) - phi2(geom.web_half_height / ly))
    z_web = lz * phi1((geom.f / 2.0) / lz)
    z_flange = lz * phi1((geom.b / 2.0) / lz)
    v_web = x_factor * y_web * z_web
    v_flange = x_factor * y_flange * z_flange
    return LaplaceContribution(
        value=hp.severity**k * (v_web + v_flange), v_web=v_web, v_flange=v_flange
    )


def laplace_i2(geom: BeamGeometry, k: float, hp: HotPoint) -> LaplaceContribution:
    """Flange-edge hot-point contribution: Gaussian in x on both sides,
    exponential decay downward in y and in z."""
    if k <= 0.0:
        raise DomainError("exponent k must be positive")
    sk = math.sqrt(k)
    lx = hp.delta_x / sk
    ly = hp.delta_y / k
    lz = hp.delta_z / k
    x_factor = lx * (phi2(hp.x / lx) + phi2((geom.length / 2.0 - hp.x) / lx))
    y_web = ly * (phi1((geom.h / 2.0) / ly) - phi1(geom.e / ly))
    y_flange = ly * phi1(geom.e / ly)
    z_web = lz * phi1((geom.f / 2.0) / lz)
    z_flange = lz * phi1((geom.b / 2.0) / lz)
    v_web = x_factor * y_web * z_web
    v_flange = x_factor * y_flange * z_flange
    return LaplaceContribution(
        value=hp.severity**k * (v_web + v_flange), v_web=v_web, v_flange=v_flange
    )


@lru_cache(maxsize=4)
def _quarter_cells(geom: BeamGeometry, grid: BeamGrid):
    return quarter_severity_grid(geom, grid)


def quadrature_iprime(geom: BeamGeometry, grid: BeamGrid, k: float) -> float:
    """Reference value of the quarter-domain integral of severity^k by the
    midpoint rule on the given grid."""
    if k <= 0.0:
        raise DomainError("exponent k must be positive")
    cells = _quarter_cells(geom, grid)
    return float(np.dot(cells.measures, cells.severities**k))


def table1(
    geom: BeamGeometry, grid: BeamGrid, ks: Sequence[float]
) -> list[LaplaceRow]:
    """Approximation-quality rows: for each exponent k, the ratio of the
    two-hot-point sum to the quadrature reference, the share of the corner
    contribution, and the web share of each volume term."""
    hp1, hp2 = locate_hot_points(geom)
    rows = []
    for k in ks:
        c1 = laplace_i1(geom, k, hp1)
        c2 = laplace_i2(geom, k, hp2)
        iq = quadrature_iprime(geom, grid, k)
        rows.append(
            LaplaceRow(
                k=float(k),
                i1=c1.value,
                i2=c2.value,
                v1_web=c1.v_web,
                v1_flange=c1.v_flange,
                v2_web=c2.v_web,
                v2_flange=c2.v_flange,
                i_quadrature=iq,
                ratio=(c1.value + c2.value) / iq,
                fraction_i1=c1.value / (c1.value + c2.value),
                web_fraction_1=c1.v_web / (c1.v_web + c1.v_flange),
                web_fraction_2=c2.v_web / (c2.v_web + c2.v_flange),
            )
        )
    return rows
