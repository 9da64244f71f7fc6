"""I-beam severity field: section constants, stress components, the inner
load-position maximisation, symmetries and the reference discretisation.

The frozen moment of inertia 0.032431177375 m^4 was computed beforehand in
exact rational arithmetic from the same section formula.
"""

import math

import numpy as np
import pytest

from fatiq import (
    BeamGeometry,
    BeamGrid,
    DomainError,
    UnitStress,
    beam_volume,
    bending_moment_u,
    moment_inertia,
    quarter_severity_grid,
    severity_field,
    severity_grid,
    shear_u,
    stress_u,
    unitary_severity,
    von_mises_u,
)

GEOM = BeamGeometry(b=0.65, f=0.012, h=1.315, e=0.06, length=20.0)
GRID = BeamGrid()


def vm_oracle(s: UnitStress) -> float:
    """Independent von Mises evaluation: sqrt(3 J2) from the principal
    stresses of the full tensor."""
    tensor = np.array(
        [
            [s.sxx, s.sxy, s.sxz],
            [s.sxy, 0.0, 0.0],
            [s.sxz, 0.0, 0.0],
        ]
    )
    principal = np.linalg.eigvalsh(tensor)
    s1, s2, s3 = principal
    return math.sqrt(0.5 * ((s1 - s2) ** 2 + (s2 - s3) ** 2 + (s3 - s1) ** 2))


class TestSection:
    def test_moment_of_inertia_frozen(self):
        assert moment_inertia(GEOM) == pytest.approx(0.032431177375, rel=1e-12)

    def test_against_section_quadrature(self):
        # independent oracle: integrate y^2 over the web and the two
        # flanges; the section formula carries b e^3/12 for the flange
        # self-term (half the exact value), so it sits exactly b e^3/12
        # below the integral
        b, f, h, e = GEOM.b, GEOM.f, GEOM.h, GEOM.e
        web = f * ((h / 2 - e) ** 3 - (-(h / 2 - e)) ** 3) / 3.0
        ys = np.linspace(h / 2 - e, h / 2, 20001)
        flanges = 2.0 * b * np.trapezoid(ys**2, ys)
        exact_integral = web + flanges
        assert moment_inertia(GEOM) == pytest.approx(exact_integral - b * e**3 / 12.0, rel=1e-9)

    def test_length_scaling(self):
        s = 2.5
        scaled = BeamGeometry(b=s * GEOM.b, f=s * GEOM.f, h=s * GEOM.h, e=s * GEOM.e, length=s * GEOM.length)
        assert moment_inertia(scaled) == pytest.approx(s**4 * moment_inertia(GEOM), rel=1e-12)

    def test_volume(self):
        assert beam_volume(GEOM) == pytest.approx(1.8468, rel=1e-12)

    def test_geometry_invariants(self):
        with pytest.raises(DomainError):
            BeamGeometry(b=0.65, f=0.7, h=1.315, e=0.06, length=20.0)
        with pytest.raises(DomainError):
            BeamGeometry(b=0.65, f=0.012, h=1.315, e=0.7, length=20.0)


class TestMomentAndShear:
    def test_midspan_value(self):
        assert bending_moment_u(GEOM, 10.0, 10.0) == pytest.approx(5.0, rel=1e-15)

    def test_supports(self):
        for a in (0.0, 3.7, 20.0):
            assert bending_moment_u(GEOM, 0.0, a) == 0.0
            assert bending_moment_u(GEOM, 20.0, a) == 0.0

    def test_continuity_and_symmetry(self):
        for x, a in ((4.2, 4.2), (13.0, 13.0)):
            left = bending_moment_u(GEOM, x, np.nextafter(a, 0.0))
            assert bending_moment_u(GEOM, x, a) == pytest.approx(left, rel=1e-9)
        assert bending_moment_u(GEOM, 6.0, 9.0) == pytest.approx(
            bending_moment_u(GEOM, 14.0, 11.0), rel=1e-12
        )

    def test_moment_maximised_at_load_position(self):
        # brute force over load positions
        for x in (2.0, 7.5, 10.0, 16.0):
            grid = np.linspace(0.0, 20.0, 8001)
            best = max(bending_moment_u(GEOM, x, a) for a in grid)
            assert bending_moment_u(GEOM, x, x) >= best - 1e-9

    def test_shear_branches(self):
        assert shear_u(GEOM, 5.0, 2.0) == pytest.approx(2.0 / 20.0, rel=1e-15)
        assert shear_u(GEOM, 0.0, 3.0) == pytest.approx(-(20.0 - 3.0) / 20.0, rel=1e-15)

    def test_unit_jump_across_load(self):
        x = 7.3
        below = abs(shear_u(GEOM, x, np.nextafter(x, 0.0)))
        at = abs(shear_u(GEOM, x, x))
        assert below + at == pytest.approx(1.0, abs=1e-9)
        assert abs(shear_u(GEOM, x, x)) <= 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            bending_moment_u(GEOM, -0.1, 5.0)
        with pytest.raises(DomainError):
            shear_u(GEOM, 5.0, 20.5)


class TestStress:
    def test_bending_spot_value(self):
        # frozen: (h/2) * M(5,5) / I_z with M(5,5) = 3.75
        s = stress_u(GEOM, 5.0, GEOM.h / 2.0, 0.0, 5.0)
        assert s.sxx == pytest.approx(76.026379538741610, rel=1e-12)

    def test_odd_in_y(self):
        up = stress_u(GEOM, 5.0, 0.4, 0.002, 7.0)
        down = stress_u(GEOM, 5.0, -0.4, 0.002, 7.0)
        assert up.sxx == pytest.approx(-down.sxx, rel=1e-12)

    def test_neutral_axis(self):
        assert stress_u(GEOM, 5.0, 0.0, 0.0, 5.0).sxx == 0.0

    def test_flange_shear_vanishes_at_edge(self):
        s = stress_u(GEOM, 5.0, GEOM.h / 2.0, GEOM.b / 2.0, 7.0)
        assert s.sxz == 0.0

    def test_outside_section(self):
        with pytest.raises(DomainError):
            stress_u(GEOM, 5.0, GEOM.h, 0.0, 5.0)
        with pytest.raises(DomainError):
            stress_u(GEOM, 5.0, 0.0, GEOM.f, 5.0)  # web point, z beyond web


class TestVonMises:
    def test_pure_axial(self):
        assert von_mises_u(UnitStress(1.0, 0.0, 0.0)) == 1.0

    def test_pure_shear_pair(self):
        got = von_mises_u(UnitStress(0.0, 1.0, 1.0))
        assert got == pytest.approx(math.sqrt(6.0), rel=1e-14)
        assert got == pytest.approx(vm_oracle(UnitStress(0.0, 1.0, 1.0)), rel=1e-12)

    def test_reduces_to_axial_without_shear(self):
        assert von_mises_u(UnitStress(-2.5, 0.0, 0.0)) == pytest.approx(2.5, rel=1e-14)

    @pytest.mark.parametrize(
        "components", [(3.0, 0.7, -0.4), (76.0, 12.0, 3.0), (0.0, -5.0, 2.0), (1.0, 1.0, 1.0)]
    )
    def test_matches_principal_stress_oracle(self, components):
        s = UnitStress(*components)
        assert von_mises_u(s) == pytest.approx(vm_oracle(s), rel=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            von_mises_u(UnitStress(math.nan, 0.0, 0.0))


def sample_points(n=60, seed=0):
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        x = rng.uniform(0.0, GEOM.length)
        y = rng.uniform(-GEOM.h / 2.0, GEOM.h / 2.0)
        z_lim = GEOM.b / 2.0 if abs(y) >= GEOM.web_half_height else GEOM.f / 2.0
        pts.append((x, y, rng.uniform(-z_lim, z_lim)))
    return pts


class TestUnitarySeverity:
    def test_three_reflection_symmetries(self):
        for x, y, z in sample_points(40):
            base = severity_field(GEOM, x, y, z)
            assert severity_field(GEOM, GEOM.length - x, y, z) == pytest.approx(base, rel=1e-12)
            assert severity_field(GEOM, x, -y, z) == pytest.approx(base, rel=1e-12)
            assert severity_field(GEOM, x, y, -z) == pytest.approx(base, rel=1e-12)

    def test_candidate_max_equals_vectorised_field(self):
        for x, y, z in sample_points(25, seed=1):
            assert unitary_severity(GEOM, x, y, z) == pytest.approx(
                severity_field(GEOM, x, y, z), rel=1e-12
            )

    def test_load_grid_self_convergence(self):
        for x, y, z in sample_points(12, seed=2):
            coarse = unitary_severity(GEOM, x, y, z, n_a=2001)
            fine = unitary_severity(GEOM, x, y, z, n_a=4001)
            assert abs(fine - coarse) / coarse < 1e-4

    def test_top_edge_peak_strictly_interior(self):
        xs = np.linspace(0.0, GEOM.length / 2.0, 4001)
        vals = severity_field(GEOM, xs, GEOM.h / 2.0, 0.0)
        peak = int(np.argmax(vals))
        assert 0 < xs[peak] < GEOM.length / 2.0
        assert vals[peak] > vals[0] and vals[peak] > vals[-1]

    def test_maximal_at_z_zero(self):
        for x in (0.5, 4.0, 9.5):
            for y in (0.0, 0.3, GEOM.h / 2.0):
                z_lim = GEOM.b / 2.0 if abs(y) >= GEOM.web_half_height else GEOM.f / 2.0
                zs = np.linspace(-z_lim, z_lim, 41)
                vals = severity_field(GEOM, x, y, zs)
                assert np.argmax(vals) in (20,)  # the z = 0 sample

    def test_component_dominance(self):
        # thresholds read off the field itself: bending carries >85% of the
        # equivalent stress at midspan top, <10% near the support corner
        s_mid = stress_u(GEOM, 10.0, GEOM.h / 2.0, 0.0, 10.0)
        ratio_mid = abs(s_mid.sxx) / severity_field(GEOM, 10.0, GEOM.h / 2.0, 0.0)
        assert ratio_mid > 0.85
        s_corner = stress_u(GEOM, 0.25, 0.01, 0.0, 0.25)
        ratio_corner = abs(s_corner.sxx) / severity_field(GEOM, 0.25, 0.01, 0.0)
        assert ratio_corner < 0.1

    def test_outside_section(self):
        with pytest.raises(DomainError):
            unitary_severity(GEOM, 5.0, GEOM.h, 0.0)


class TestSeverityGrid:
    def test_cell_count(self):
        cells = severity_grid(GEOM, GRID)
        nx = max(1, round(GEOM.length / 2.0 / GRID.dx))
        nyw = max(1, round(GEOM.web_half_height / GRID.dy))
        nyf = max(1, round(GEOM.e / GRID.dy))
        nzw = max(1, round(GEOM.f / 2.0 / GRID.dz_web))
        nzf = max(1, round(GEOM.b / 2.0 / GRID.dz_flange))
        assert cells.n_cells == 2 * nx * (4 * nyw * nzw + 4 * nyf * nzf)

    def test_volume_exact(self):
        cells = severity_grid(GEOM, GRID)
        assert abs(cells.total_measure / beam_volume(GEOM) - 1.0) < 1e-10

    def test_quarter_symmetry_times_eight(self):
        quarter = quarter_severity_grid(GEOM, GRID)
        full = severity_grid(GEOM, GRID)
        k = 4.5
        i_quarter = 8.0 * float(np.dot(quarter.measures, quarter.severities**k))
        i_full = float(np.dot(full.measures, full.severities**k))
        assert abs(i_quarter / i_full - 1.0) < 1e-6

    def test_field_finite_and_positive(self):
        cells = quarter_severity_grid(GEOM, GRID)
        assert np.all(np.isfinite(cells.severities))
        assert np.all(cells.severities > 0.0)

    def test_positions_inside_section(self):
        cells = severity_grid(GEOM, GRID)
        x, y, z = cells.positions.T
        assert np.all((x > 0) & (x < GEOM.length))
        assert np.all(np.abs(y) < GEOM.h / 2.0)
        in_flange = np.abs(y) > GEOM.web_half_height
        assert np.all(np.abs(z[in_flange]) < GEOM.b / 2.0)
        assert np.all(np.abs(z[~in_flange]) < GEOM.f / 2.0)

    def test_threads_do_not_change_cells(self, monkeypatch):
        base = quarter_severity_grid(GEOM, GRID)
        monkeypatch.setenv("FATIQ_THREADS", "3")
        threaded = quarter_severity_grid(GEOM, GRID)
        assert np.array_equal(base.severities, threaded.severities)
        assert np.array_equal(base.positions, threaded.positions)
