"""Temporal weights, categorical mixes, apportionment, and sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facsim.distributions import (Categorical, InferenceType,
                                  JobMixDistribution, TemporalWeights,
                                  derive_seed, largest_remainder, make_rng,
                                  normalize, sample_job)
from facsim.errors import AllZeroWeights, NegativeWeight, UnknownProfileKey
from facsim.profiles import WorkloadType
from facsim.timegrid import SECONDS_PER_DAY, TimeGrid

from oracles import apportion

positive_weights = st.lists(st.floats(0.0, 1e6, allow_nan=False), min_size=1,
                            max_size=24).filter(lambda w: sum(w) > 1e-9)


class TestNormalize:
    def test_uniform(self):
        assert normalize([1, 1, 1, 1]).tolist() == [0.25, 0.25, 0.25, 0.25]

    def test_single_mass(self):
        assert normalize([2, 0, 0]).tolist() == [1, 0, 0]

    def test_all_zero(self):
        with pytest.raises(AllZeroWeights):
            normalize([0, 0])

    def test_negative(self):
        with pytest.raises(NegativeWeight):
            normalize([1, -1])

    def test_empty(self):
        with pytest.raises(AllZeroWeights):
            normalize([])

    @given(positive_weights)
    def test_property_sums_to_one_and_idempotent(self, w):
        p = normalize(w)
        assert float(p.sum()) == pytest.approx(1.0, abs=1e-12)
        assert normalize(p) == pytest.approx(p, rel=1e-12)

    @given(positive_weights)
    def test_property_proportions_preserved(self, w):
        p = normalize(w)
        total = sum(w)
        for wi, pi in zip(w, p):
            assert pi == pytest.approx(wi / total, rel=1e-9, abs=1e-15)


class TestLargestRemainder:
    def test_two_service_pool_split(self):
        # demand weights share * nodes / cap for a 284-node two-service pool
        counts = largest_remainder(284, [0.619 / 50.0, 0.381 / 100.0])
        assert counts.tolist() == [217, 67]
        assert int(counts.sum()) == 284

    def test_exact_split(self):
        assert largest_remainder(10, [1, 1]).tolist() == [5, 5]

    def test_remainder_goes_to_largest_fraction(self):
        assert largest_remainder(10, [0.55, 0.25, 0.20]).tolist() == [6, 2, 2]

    def test_zero_total(self):
        assert largest_remainder(0, [3, 1]).tolist() == [0, 0]

    def test_negative_total(self):
        with pytest.raises(ValueError):
            largest_remainder(-1, [1])

    @given(st.integers(0, 500), st.lists(st.floats(0.01, 100), min_size=1,
                                         max_size=8))
    @settings(max_examples=200)
    def test_property_matches_oracle(self, total, weights):
        counts = largest_remainder(total, weights)
        assert counts.tolist() == apportion(total, weights)
        assert int(counts.sum()) == total
        quotas = np.asarray(weights) / sum(weights) * total
        assert np.all(np.abs(counts - quotas) < 1.0)


class TestCategorical:
    def test_probability_lookup(self):
        cat = Categorical.from_weights([("a", 3.0), ("b", 1.0)])
        assert cat.probability("a") == pytest.approx(0.75)

    def test_sample_support(self):
        cat = Categorical.from_weights([("a", 1.0), ("b", 0.0), ("c", 2.0)])
        rng = make_rng(1)
        draws = {cat.sample(rng) for _ in range(200)}
        assert draws <= {"a", "c"}

    def test_sample_frequencies_within_3_sigma(self):
        probs = [0.5, 0.3, 0.2]
        cat = Categorical.from_weights(list(zip("abc", probs)))
        n = 100_000
        idx = cat.sample_indices(make_rng(42), n)
        freq = np.bincount(idx, minlength=3) / n
        for p, f in zip(probs, freq):
            sigma = np.sqrt(p * (1 - p) / n)
            assert abs(f - p) <= 3 * sigma

    def test_deterministic_per_seed(self):
        cat = Categorical.from_weights([("a", 1.0), ("b", 2.0)])
        a = cat.sample_indices(make_rng(9, 1), 50)
        b = cat.sample_indices(make_rng(9, 1), 50)
        assert np.array_equal(a, b)


class TestSeeds:
    def test_make_rng_streams_differ(self):
        assert make_rng(3, 0).random() != make_rng(3, 1).random()

    def test_derive_seed_stable(self):
        assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
        assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)


class TestTemporalWeights:
    def test_requires_correct_lengths(self):
        with pytest.raises(ValueError):
            TemporalWeights.from_weights([1.0] * 23)
        with pytest.raises(ValueError):
            TemporalWeights.from_weights([1.0] * 24, [1.0] * 6)
        with pytest.raises(ValueError):
            TemporalWeights.from_weights([1.0] * 24, [1.0] * 7, [1.0] * 11)

    def test_vectors_normalized(self, evening_weights):
        for vec in (evening_weights.hourly, evening_weights.day_of_week,
                    evening_weights.monthly):
            assert float(vec.sum()) == pytest.approx(1.0, abs=1e-12)

    def test_all_zero_rejected(self):
        with pytest.raises(AllZeroWeights):
            TemporalWeights.from_weights([0.0] * 24)

    def test_flat_timestep_weight(self):
        flat = TemporalWeights.flat()
        assert flat.timestep_weight(5, 3, 11) == pytest.approx(1 / (24 * 7 * 12))

    def test_single_hour_mass(self):
        hourly = [0.0] * 24
        hourly[16] = 1.0
        tw = TemporalWeights.from_weights(hourly)
        assert tw.timestep_weight(16, 0, 0) > 0
        assert tw.timestep_weight(15, 0, 0) == 0.0

    def test_timestep_weight_is_factor_product(self, evening_weights):
        tw = evening_weights
        for h, d, m in [(0, 0, 0), (17, 4, 6), (23, 6, 11)]:
            expect = (float(tw.hourly[h]) * float(tw.day_of_week[d])
                      * float(tw.monthly[m]))
            assert tw.timestep_weight(h, d, m) == pytest.approx(expect, rel=1e-12)

    def test_horizon_day_weights_mean_one(self, evening_weights):
        grid = TimeGrid.from_iso("2026-01-05", days=45, timestep_s=3600.0)
        mult = evening_weights.horizon_day_weights(grid)
        assert mult.shape == (45,)
        assert float(mult.mean()) == pytest.approx(1.0, rel=1e-12)

    def test_horizon_day_weights_follow_dow_ratio(self):
        tw = TemporalWeights.from_weights([1.0] * 24, [2, 1, 1, 1, 1, 1, 1])
        grid = TimeGrid.from_iso("2026-01-05", days=14, timestep_s=3600.0)
        mult = tw.horizon_day_weights(grid)
        assert mult[0] / mult[1] == pytest.approx(2.0)  # Monday vs Tuesday

    def test_vanishing_horizon_rejected(self):
        tw = TemporalWeights.from_weights([1.0] * 24, [0, 1, 0, 0, 0, 0, 0])
        grid = TimeGrid.from_iso("2026-01-07", days=1, timestep_s=3600.0)  # Wed
        with pytest.raises(AllZeroWeights):
            tw.horizon_day_weights(grid)

    def test_sample_day_offsets_in_range_and_shaped(self, evening_weights):
        rng = make_rng(4)
        offs = evening_weights.sample_day_offsets(rng, 20_000)
        assert np.all((offs >= 0) & (offs < SECONDS_PER_DAY))
        hours = (offs // 3600).astype(int)
        freq = np.bincount(hours, minlength=24) / offs.size
        for h in range(24):
            p = float(evening_weights.hourly[h])
            sigma = np.sqrt(p * (1 - p) / offs.size)
            assert abs(freq[h] - p) <= 4 * sigma

    def test_step_fractions_sum_to_one(self, evening_weights):
        for steps in (24, 48, 96, 1440):
            frac = evening_weights.step_fractions(steps)
            assert frac.shape == (steps,)
            assert float(frac.sum()) == pytest.approx(1.0, abs=1e-9)

    def test_step_fractions_match_hourly_when_aligned(self, evening_weights):
        frac = evening_weights.step_fractions(48)  # two steps per hour
        per_hour = frac.reshape(24, 2).sum(axis=1)
        assert per_hour == pytest.approx(np.asarray(evening_weights.hourly),
                                         rel=1e-9)


class TestJobMixDistribution:
    def test_flat_pairs_are_joint_products(self, basic_mix):
        pairs = dict(basic_mix.flat_pairs())
        assert sum(pairs.values()) == pytest.approx(1.0, abs=1e-12)
        assert pairs[(WorkloadType.TRAINING, 2)] == pytest.approx(0.7 * 0.6)
        assert pairs[(WorkloadType.FINE_TUNING, 1)] == pytest.approx(0.3)

    def test_missing_node_counts_rejected(self):
        with pytest.raises(AllZeroWeights):
            JobMixDistribution.from_weights(
                {WorkloadType.TRAINING: 1.0}, {})

    def test_validate_against_bank(self, basic_mix, job_bank):
        basic_mix.validate_against(job_bank)  # all keys present
        sparse = JobMixDistribution.from_weights(
            {WorkloadType.TRAINING: 1.0}, {WorkloadType.TRAINING: {64: 1.0}})
        with pytest.raises(UnknownProfileKey):
            sparse.validate_against(job_bank)


class TestSampleJob:
    def test_deterministic(self, basic_mix, evening_weights):
        a = sample_job(basic_mix, evening_weights, 3, make_rng(5))
        b = sample_job(basic_mix, evening_weights, 3, make_rng(5))
        assert a == b

    def test_arrival_inside_day(self, basic_mix, evening_weights):
        for day in (0, 2):
            arrival, wtype, nodes = sample_job(basic_mix, evening_weights, day,
                                               make_rng(day))
            assert day * SECONDS_PER_DAY <= arrival < (day + 1) * SECONDS_PER_DAY
            assert isinstance(wtype, WorkloadType)
            assert nodes in (1, 2, 4)

    def test_degenerate_distributions_fully_determined(self):
        hourly = [0.0] * 24
        hourly[9] = 1.0
        tw = TemporalWeights.from_weights(hourly)
        mix = JobMixDistribution.from_weights(
            {WorkloadType.TRAINING: 1.0}, {WorkloadType.TRAINING: {8: 1.0}})
        arrival, wtype, nodes = sample_job(mix, tw, 1, make_rng(0))
        assert wtype is WorkloadType.TRAINING
        assert nodes == 8
        offset = arrival - SECONDS_PER_DAY
        assert 9 * 3600 <= offset < 10 * 3600


class TestInferenceType:
    def test_validation(self):
        with pytest.raises(ValueError):
            InferenceType("x", -0.1, 10.0)
        with pytest.raises(ValueError):
            InferenceType("x", 0.5, 0.0)
        with pytest.raises(ValueError):
            InferenceType("x", 0.5, 10.0, nodes_per_instance=0)
        with pytest.raises(ValueError):
            InferenceType("x", 0.5, 10.0, latency_cap_s=0.0)

    def test_defaults(self):
        t = InferenceType("chat", 0.6, 50.0)
        assert t.nodes_per_instance == 1
        assert t.latency_cap_s is None
