"""Weakest-link structure model: cell sums, failure density and the
Poisson microscopic construction."""

import math

import numpy as np
import pytest

from fatiq import (
    CellPartition,
    DomainError,
    SeededRng,
    SizeEffectModel,
    StructureConstant,
    compute_q,
    failure_density,
    g_eval,
    poisson_microscopic_sample,
    survival_elastic,
    survival_from_power_sum,
    survival_structure_general,
)
from fatiq.structure import load_partition_csv, save_partition_csv

MODEL = SizeEffectModel(m=1.5, alpha=3.0, kappa_ref=1.1589897288973240e14, lambda_ref=3e-5)

Z99 = 2.5758293035489004


def two_cells(measures=(0.5, 0.5), severities=(1.0, 2.0)):
    return CellPartition(measures=np.array(measures), severities=np.array(severities))


class TestGEval:
    def test_endpoints(self):
        assert g_eval(MODEL, 0.0) == 0.0
        assert g_eval(MODEL, 1.0) == pytest.approx(1.0 / MODEL.lambda_ref, rel=1e-15)

    def test_composite_identity(self):
        # g(n / scale_n(s)) = (n s^alpha / kappa_ref)^m / lambda_ref
        n, s = 3.7e5, 240.0
        h = n / (MODEL.kappa_ref * s**-MODEL.alpha)
        expected = (n * s**MODEL.alpha / MODEL.kappa_ref) ** MODEL.m / MODEL.lambda_ref
        assert g_eval(MODEL, h) == pytest.approx(expected, rel=1e-12)

    def test_increasing(self):
        hs = np.linspace(0.0, 5.0, 50)
        assert np.all(np.diff(g_eval(MODEL, hs)) > 0.0)


class TestSurvivalGeneral:
    def g(self, h):
        return g_eval(MODEL, h)

    def test_zero_damage(self):
        cells = two_cells()
        assert survival_structure_general(cells, np.zeros(2), self.g) == 1.0

    def test_single_cell_reduces_to_specimen_form(self):
        cells = CellPartition(measures=np.array([2e-4]), severities=np.array([1.0]))
        h = 0.37
        expected = math.exp(-2e-4 * g_eval(MODEL, h))
        assert survival_structure_general(cells, np.array([h]), self.g) == pytest.approx(expected, rel=1e-14)

    def test_split_invariance(self):
        whole = CellPartition(measures=np.array([1e-3]), severities=np.array([1.0]))
        halves = CellPartition(measures=np.array([5e-4, 5e-4]), severities=np.array([1.0, 1.0]))
        h = 0.8
        a = survival_structure_general(whole, np.array([h]), self.g)
        b = survival_structure_general(halves, np.array([h, h]), self.g)
        assert a == pytest.approx(b, rel=1e-15)

    def test_normalisation_freedom(self):
        # replacing (scale_n, g) by (c*scale_n, g(c*h)) leaves survival unchanged
        cells = two_cells(measures=(2e-4, 7e-4), severities=(1.0, 1.0))
        h = np.array([0.31, 0.62])
        base = survival_structure_general(cells, h, self.g)
        for c in (0.1, 10.0):
            scaled = survival_structure_general(cells, h / c, lambda v: self.g(c * v))
            assert scaled == pytest.approx(base, rel=1e-12)


class TestComputeQ:
    def test_uniform_field(self):
        volume, s = 1.8468, 130.0
        cells = CellPartition(measures=np.full(64, volume / 64), severities=np.full(64, s))
        qc = compute_q(cells, MODEL)
        expected = (volume / MODEL.lambda_ref) * (s**MODEL.alpha / MODEL.kappa_ref) ** MODEL.m
        assert qc.q == pytest.approx(expected, rel=1e-12)

    def test_refinement_stability(self):
        sev = np.array([10.0, 20.0, 15.0])
        meas = np.array([0.2, 0.3, 0.5])
        coarse = CellPartition(measures=meas, severities=sev)
        fine = CellPartition(measures=np.repeat(meas / 2, 2), severities=np.repeat(sev, 2))
        assert compute_q(fine, MODEL).q == pytest.approx(compute_q(coarse, MODEL).q, rel=1e-14)

    def test_empty_partition_rejected(self):
        with pytest.raises(DomainError):
            CellPartition(measures=np.array([]), severities=np.array([]))


class TestSurvivalElastic:
    QC = StructureConstant(q=8.5e-8, m=1.5, alpha=3.0)

    def test_no_cycles(self):
        assert survival_elastic(self.QC, np.array([])) == 1.0

    def test_constant_load_closed_form(self):
        loads = np.full(1000, 0.25)
        expected = math.exp(-self.QC.q * (1000 * 0.25**3.0) ** 1.5)
        assert survival_elastic(self.QC, loads) == pytest.approx(expected, rel=1e-12)

    def test_nonincreasing_under_append(self):
        loads = [0.2, 0.3, 0.25, 0.4]
        values = [survival_elastic(self.QC, np.array(loads[:k])) for k in range(len(loads) + 1)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_matches_structure_general(self):
        # h_k = sum(P_i^alpha) * s_k^alpha / kappa_ref on the same partition
        cells = two_cells(measures=(0.9, 0.9468), severities=(95.0, 120.0))
        model = MODEL
        qc = compute_q(cells, model)
        loads = np.array([0.22, 0.31, 0.27])
        psum = float(np.sum(loads**model.alpha))
        h = psum * cells.severities**model.alpha / model.kappa_ref
        direct = survival_structure_general(cells, h, lambda v: g_eval(model, v))
        assert survival_elastic(qc, loads) == pytest.approx(direct, rel=1e-10)


class TestFailureDensity:
    def test_uniform_field_weights_by_measure(self):
        cells = two_cells(measures=(0.25, 0.75), severities=(3.0, 3.0))
        w = failure_density(cells, MODEL.m, MODEL.alpha).weights
        assert np.allclose(w, [0.25, 0.75], rtol=1e-14)

    def test_hand_computed_two_cell(self):
        # equal measures, severities (1, 2), alpha*m = 3: masses (1/9, 8/9)
        cells = two_cells()
        w = failure_density(cells, m=1.0, alpha=3.0).weights
        assert np.allclose(w, [1.0 / 9.0, 8.0 / 9.0], rtol=1e-13)

    def test_sums_to_one(self):
        rng = np.random.default_rng(5)
        cells = CellPartition(measures=rng.random(100) + 0.1, severities=rng.random(100) * 50)
        w = failure_density(cells, MODEL.m, MODEL.alpha).weights
        assert float(np.sum(w)) == pytest.approx(1.0, abs=1e-12)

    def test_field_rescale_invariance(self):
        rng = np.random.default_rng(6)
        sev = rng.random(30) * 80 + 1
        meas = rng.random(30) + 0.5
        base = failure_density(CellPartition(measures=meas, severities=sev), 1.5, 3.0).weights
        for c in (1e-3, 7.0, 1e4):
            scaled = failure_density(CellPartition(measures=meas, severities=c * sev), 1.5, 3.0).weights
            assert np.allclose(scaled, base, rtol=1e-12)

    def test_zero_field_rejected(self):
        cells = two_cells(severities=(0.0, 0.0))
        with pytest.raises(DomainError):
            failure_density(cells, 1.5, 3.0)


class TestPoissonModel:
    CELLS = CellPartition(
        measures=np.geomspace(1e-5, 4e-4, 10), severities=np.ones(10)
    )

    def g(self, h):
        return g_eval(MODEL, h)

    def g_inv(self, v):
        return (np.asarray(v) * MODEL.lambda_ref) ** (1.0 / MODEL.m)

    def h_max(self, cells=None):
        # exp(-lambda(E) g(h_max)) < 1e-6
        total = (cells or self.CELLS).total_measure
        return float(self.g_inv(math.log(1e7) / total))

    def test_truncation_precondition(self):
        with pytest.raises(DomainError):
            poisson_microscopic_sample(self.CELLS, self.g, 1e-6, SeededRng(1), g_inv=self.g_inv)

    def test_survival_matches_closed_form(self):
        reps = 2 * 10**4
        h_max = self.h_max()
        healths = poisson_microscopic_sample(
            self.CELLS, self.g, h_max, SeededRng(431), size=reps, g_inv=self.g_inv
        )
        k = 7  # one designated cell plus the union below
        lam = self.CELLS.measures[k]
        for lam_f, sample in ((lam, healths[:, k]), (self.CELLS.total_measure, healths.min(axis=1))):
            hs = np.linspace(0.05, 0.8, 12) * h_max
            exact = np.exp(-lam_f * np.asarray(self.g(hs)))
            emp = np.array([np.mean(sample > h) for h in hs])
            band = Z99 * np.sqrt(exact * (1.0 - exact) / reps) + 1.0 / reps
            assert np.all(np.abs(emp - exact) <= band)

    def test_min_stability_per_draw(self):
        healths = poisson_microscopic_sample(
            self.CELLS, self.g, self.h_max(), SeededRng(32), size=500, g_inv=self.g_inv
        )
        union = np.minimum.reduce([healths[:, i] for i in range(5)])
        assert np.array_equal(union, healths[:, :5].min(axis=1))

    def test_equal_measure_cells_share_law(self):
        cells = CellPartition(measures=np.array([2e-4, 2e-4]), severities=np.ones(2))
        reps = 10**4
        healths = poisson_microscopic_sample(
            cells, self.g, self.h_max(cells), SeededRng(33), size=reps, g_inv=self.g_inv
        )
        cap = np.minimum(healths, 1e9)
        d = _ks_two_sample(cap[:, 0], cap[:, 1])
        threshold = 1.6276 * math.sqrt(2.0 / reps)  # asymptotic 1% level
        assert d < threshold

    def test_numeric_inverse_agrees(self):
        h_max = self.h_max()
        a = poisson_microscopic_sample(self.CELLS, self.g, h_max, SeededRng(34), size=50, g_inv=self.g_inv)
        b = poisson_microscopic_sample(self.CELLS, self.g, h_max, SeededRng(34), size=50)
        finite = np.isfinite(a)
        assert np.array_equal(finite, np.isfinite(b))
        assert np.allclose(a[finite], b[finite], rtol=1e-10, atol=1e-12 * h_max)

    def test_no_flaw_gives_infinite_health(self):
        tiny = CellPartition(measures=np.array([1e-9, 1.0]), severities=np.ones(2))
        healths = poisson_microscopic_sample(
            tiny, self.g, self.h_max(), SeededRng(35), size=200, g_inv=self.g_inv
        )
        assert np.any(np.isinf(healths[:, 0]))


def _ks_two_sample(a, b):
    data = np.sort(np.concatenate([a, b]))
    cdf_a = np.searchsorted(np.sort(a), data, side="right") / a.size
    cdf_b = np.searchsorted(np.sort(b), data, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


class TestPartitionIO:
    def test_round_trip(self, tmp_path):
        cells = two_cells(measures=(0.125, 0.5), severities=(10.0, 0.0))
        path = tmp_path / "cells.csv"
        save_partition_csv(cells, path)
        back = load_partition_csv(path)
        assert np.array_equal(back.measures, cells.measures)
        assert np.array_equal(back.severities, cells.severities)
