#!/usr/bin/env python3
"""
Tests for aggregation sampling, aggregation reduction and effective sample sizes
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from riskagg.cones import ConeSpec
from riskagg.distributions import DiscreteDist, EllipticalDist, SampleStream
from riskagg.errors import DomainError, DrawCapExceededError
from riskagg.regions import (
    ConeEllipticalRegion,
    RegionKind,
    RiskRegion,
    ScenarioMaskRegion,
    WholeSpaceRegion,
    orthant_nonrisk_probability,
    portfolio_loss,
)
from riskagg.scenario_set import ScenarioSet
from riskagg.scenarios import (
    NonRiskRepresentation,
    aggregate_discrete,
    aggregation_reduction,
    aggregation_sampling,
    effective_size_stats,
    effective_size_variance,
)


class HalfLine(RiskRegion):
    """Risk iff the first coordinate is at least the threshold"""
    kind = RegionKind.MONOTONIC

    def __init__(self, threshold, dim=1):
        self.threshold = threshold
        self.dim = dim
        self.beta = 0.5

    def contains_many(self, Y):
        return self._as_points(Y)[:, 0] >= self.threshold

    def describe(self):
        return {'threshold': self.threshold}


class NoRisk(HalfLine):
    def contains_many(self, Y):
        return np.zeros(self._as_points(Y).shape[0], dtype=bool)


class SignSplit(NonRiskRepresentation):
    """Two representatives: means of the draws with negative and nonnegative first coordinate"""

    def __init__(self, dim):
        self.groups = {False: [], True: []}

    def add(self, y):
        self.groups[bool(y[0] >= 0.0)].append(y)

    @property
    def count(self):
        return sum(len(g) for g in self.groups.values())

    def points(self):
        kept = [g for g in self.groups.values() if g]
        return np.array([np.mean(g, axis=0) for g in kept]), np.array([float(len(g)) for g in kept])


def orthant_region(d=2, beta=0.95):
    return ConeEllipticalRegion(np.eye(d), np.zeros(d), ConeSpec.nonneg_orthant(d), beta)


class TestAggregationSampling:

    def test_whole_space_takes_extra_draw(self):
        stream = SampleStream(EllipticalDist.standard_normal(2), seed=1)
        report = aggregation_sampling(stream, WholeSpaceRegion(2), 5)
        assert report.scenario_set.n == 6
        assert report.effective_sample_size == 6
        assert report.n_risk == 5
        assert report.n_agg == 1
        assert report.extra_draw
        assert_allclose(report.scenario_set.probs, np.full(6, 1 / 6))

    def test_probabilities_and_membership(self):
        region = orthant_region()
        stream = SampleStream(EllipticalDist.standard_normal(2), seed=12)
        report = aggregation_sampling(stream, region, 50)
        scens = report.scenario_set

        assert scens.n == 51
        assert report.n_risk == 50
        assert report.n_agg > 0 and not report.extra_draw
        assert report.effective_sample_size == 50 + report.n_agg
        assert_allclose(scens.probs[:-1], 1.0 / (report.n_agg + 50))
        assert scens.probs[-1] == pytest.approx(report.n_agg / (report.n_agg + 50))
        assert abs(scens.probs.sum() - 1.0) <= 1e-12
        assert region.contains_many(scens.points[:-1]).all()
        # the non-risk set is convex, so the conditional mean stays in it
        assert not region.contains(scens.points[-1])
        assert stream.counter == report.draws_consumed >= report.effective_sample_size

    def test_deterministic(self):
        dist = EllipticalDist.equicorrelated_normal(3, 0.3)
        region = ConeEllipticalRegion.from_dist(dist, ConeSpec.nonneg_orthant(3), 0.9)
        first = aggregation_sampling(SampleStream(dist, seed=77), region, 40)
        second = aggregation_sampling(SampleStream(dist, seed=77), region, 40)
        assert_array_equal(first.scenario_set.points, second.scenario_set.points)
        assert_array_equal(first.scenario_set.probs, second.scenario_set.probs)
        assert first.to_json_dict() == second.to_json_dict()

    def test_discrete_parent_keeps_risk_scenarios(self):
        rng = np.random.default_rng(6)
        parent = ScenarioSet.equiprobable(rng.standard_normal((40, 2)))
        grid = [np.array([1.0, 0.0]), np.array([0.5, 0.5])]
        region = ScenarioMaskRegion.from_oracle(parent, portfolio_loss, grid, 0.9)
        report = aggregation_sampling(SampleStream(DiscreteDist(parent), seed=2), region, 30)
        assert region.contains_many(report.scenario_set.points[:-1]).all()

    def test_target_must_be_positive(self):
        stream = SampleStream(EllipticalDist.standard_normal(2), seed=1)
        with pytest.raises(DomainError):
            aggregation_sampling(stream, WholeSpaceRegion(2), 0)

    def test_draw_cap(self):
        stream = SampleStream(EllipticalDist.standard_normal(1), seed=1)
        with pytest.raises(DrawCapExceededError) as info:
            aggregation_sampling(stream, NoRisk(0.0), 3, draw_cap=1000)
        assert info.value.draws == 1000
        assert info.value.n_risk == 0

    def test_pluggable_representation(self):
        region = orthant_region()
        dist = EllipticalDist.standard_normal(2)
        default = aggregation_sampling(SampleStream(dist, seed=31), region, 40)
        split = aggregation_sampling(SampleStream(dist, seed=31), region, 40, representation=SignSplit(2))

        assert split.n_agg == default.n_agg
        assert split.scenario_set.n == 42
        assert abs(split.scenario_set.probs.sum() - 1.0) <= 1e-12
        assert_array_equal(split.scenario_set.points[:40], default.scenario_set.points[:40])
        tail_points, tail_probs = split.scenario_set.points[40:], split.scenario_set.probs[40:]
        assert tail_probs.sum() == pytest.approx(default.scenario_set.probs[-1], abs=1e-14)
        assert_allclose(tail_probs @ tail_points / tail_probs.sum(), default.scenario_set.points[-1], atol=1e-12)
        assert_allclose(split.scenario_set.mean(), default.scenario_set.mean(), atol=1e-12)

    def test_representation_must_start_empty(self):
        summary = SignSplit(2)
        summary.add(np.zeros(2))
        with pytest.raises(DomainError):
            aggregation_sampling(SampleStream(EllipticalDist.standard_normal(2), seed=1),
                                 orthant_region(), 5, representation=summary)

    def test_consumed_draws_include_extra_draw(self):
        stream = SampleStream(EllipticalDist.standard_normal(2), seed=4)
        report = aggregation_sampling(stream, WholeSpaceRegion(2), 5)
        # a whole-space run uses the minimum block, then one extra draw
        assert report.draws_consumed == stream.counter == 16 + 1
        assert report.effective_sample_size == 6

    def test_effective_size_law(self):
        d, beta, n, runs = 2, 0.95, 100, 200
        q = orthant_nonrisk_probability(d, beta)
        region = orthant_region(d, beta)
        dist = EllipticalDist.standard_normal(d)
        sizes = np.array([
            aggregation_sampling(SampleStream.derived(dist, 3, r), region, n).effective_sample_size
            for r in range(runs)
        ])
        mean, _ = effective_size_stats(n, q)
        se = np.sqrt(effective_size_variance(n, q) / runs)
        assert abs(sizes.mean() - mean) <= 4 * se

    @pytest.mark.slow
    def test_effective_size_law_large(self):
        d, beta, n, runs = 2, 0.95, 500, 500
        q = orthant_nonrisk_probability(d, beta)
        region = orthant_region(d, beta)
        dist = EllipticalDist.standard_normal(d)
        sizes = np.array([
            aggregation_sampling(SampleStream.derived(dist, 5, r), region, n).effective_sample_size
            for r in range(runs)
        ], dtype=float)

        mean, _ = effective_size_stats(n, q)
        var = effective_size_variance(n, q)
        assert abs(sizes.mean() - mean) <= 3 * np.sqrt(var / runs)

        centered = sizes - sizes.mean()
        var_se = np.sqrt((np.mean(centered ** 4) - np.mean(centered ** 2) ** 2) / runs)
        assert abs(sizes.var(ddof=1) - var) <= 3 * var_se


class TestAggregateDiscrete:

    def test_example(self):
        scens = ScenarioSet([[0.0], [2.0], [4.0], [10.0]], [0.25, 0.25, 0.25, 0.25])
        out = aggregate_discrete(scens, [False, False, True, True])
        assert_allclose(out.points[:, 0], [4.0, 10.0, 1.0])
        assert_allclose(out.probs, [0.25, 0.25, 0.5])

    def test_all_true_is_identity(self):
        scens = ScenarioSet.equiprobable([1.0, 2.0])
        assert aggregate_discrete(scens, [True, True]) is scens

    def test_zero_mass_outside_is_dropped(self):
        scens = ScenarioSet([[0.0], [1.0], [2.0]], [0.0, 0.5, 0.5])
        out = aggregate_discrete(scens, [False, True, True])
        assert out.n == 2
        assert_allclose(out.points[:, 0], [1.0, 2.0])

    def test_mask_length(self):
        with pytest.raises(DomainError):
            aggregate_discrete(ScenarioSet.equiprobable([1.0, 2.0]), [True])

    def test_mean_preserved(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            n, d = int(rng.integers(2, 30)), int(rng.integers(1, 5))
            scens = ScenarioSet(rng.standard_normal((n, d)), rng.dirichlet(np.ones(n)))
            mask = rng.uniform(size=n) < 0.5
            out = aggregate_discrete(scens, mask)
            assert_allclose(out.mean(), scens.mean(), atol=1e-12)
            assert abs(out.probs.sum() - 1.0) <= 1e-12

    def test_commutes_with_coordinate_permutation(self):
        rng = np.random.default_rng(10)
        scens = ScenarioSet.equiprobable(rng.standard_normal((12, 3)))
        mask = rng.uniform(size=12) < 0.4
        perm = [2, 0, 1]
        permuted = ScenarioSet(scens.points[:, perm], scens.probs)
        assert_allclose(aggregate_discrete(permuted, mask).points,
                        aggregate_discrete(scens, mask).points[:, perm])


class TestAggregationReduction:

    def test_example(self):
        sample = ScenarioSet.equiprobable([-3.0, -1.0, 1.0, 3.0])
        out = aggregation_reduction(sample, HalfLine(0.0))
        rows = sorted(zip(out.points[:, 0], out.probs))
        assert_allclose(rows, [(-2.0, 0.5), (1.0, 0.25), (3.0, 0.25)])

    def test_all_risk_returns_input(self):
        sample = ScenarioSet.equiprobable([1.0, 2.0, 3.0])
        assert aggregation_reduction(sample, HalfLine(0.0)) is sample

    def test_requires_equiprobable(self):
        sample = ScenarioSet([[0.0], [1.0]], [0.3, 0.7])
        with pytest.raises(DomainError):
            aggregation_reduction(sample, HalfLine(0.0))

    def test_expected_aggregated_count(self):
        d, beta, n, runs = 2, 0.95, 1000, 200
        q = orthant_nonrisk_probability(d, beta)
        region = orthant_region(d, beta)
        dist = EllipticalDist.standard_normal(d)
        counts = []
        for r in range(runs):
            sample = ScenarioSet.equiprobable(SampleStream.derived(dist, 4, r).sample(n))
            reduced = aggregation_reduction(sample, region)
            aggregated = n - (reduced.n - 1)
            assert reduced.probs[-1] == pytest.approx(aggregated / n)
            counts.append(aggregated)
        _, expected = effective_size_stats(n, q)
        se = np.sqrt(n * q * (1 - q) / runs)
        assert abs(np.mean(counts) - expected) <= 4 * se


class TestEffectiveSizeStats:

    def test_examples(self):
        assert effective_size_stats(100, 0.5) == pytest.approx((200.0, 50.0))
        assert effective_size_stats(10, 0.0) == (10.0, 0.0)
        assert effective_size_stats(50, 0.9) == pytest.approx((500.0, 45.0))

    def test_variance(self):
        assert effective_size_variance(100, 0.5) == pytest.approx(200.0)
        assert effective_size_variance(100, 0.0) == 0.0

    @pytest.mark.parametrize("q", [1.0, -0.1, 1.5])
    def test_invalid_q(self, q):
        with pytest.raises(DomainError):
            effective_size_stats(10, q)
