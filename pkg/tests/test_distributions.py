import itertools

import numpy as np
import pytest

from patternlab import (
    ExplicitPatterns,
    HeterogeneousBernoulli,
    HomogeneousBernoulli,
    MergeModel,
    MissingPattern,
    UniformPatterns,
    distribution_from_json,
    explicit_from_json,
    explicit_to_json,
    pattern_probability,
    sample_pattern,
)


def merge_probability_oracle(model: MergeModel, m: MissingPattern) -> float:
    """Brute force over (protocol, failure pattern) outcomes."""
    d = model.dimension
    total = 0.0
    for protocol, w in zip(model.protocols, model.weights):
        for failure_bits in itertools.product((0, 1), repeat=d):
            final = protocol.bits
            p_failure = 1.0
            for j, f in enumerate(failure_bits):
                final |= f << j
                p_failure *= model.eta if f else 1.0 - model.eta
            if final == m.bits:
                total += w * p_failure
    return total


class TestBernoulli:
    def test_zero_rate_is_fully_observed(self):
        dist = HomogeneousBernoulli(4, 0.0)
        assert pattern_probability(dist, MissingPattern(0, 4)) == 1.0
        rng = np.random.default_rng(0)
        assert all(sample_pattern(dist, rng).bits == 0 for _ in range(20))

    def test_unit_rate_is_fully_missing(self):
        dist = HomogeneousBernoulli(3, 1.0)
        rng = np.random.default_rng(0)
        assert all(sample_pattern(dist, rng) == MissingPattern.all_missing(3) for _ in range(20))

    def test_probability_formula(self):
        dist = HeterogeneousBernoulli([0.3, 0.1, 0.05, 0.05])
        m = MissingPattern.from_string("1010")
        assert dist.probability(m) == pytest.approx(0.3 * 0.9 * 0.05 * 0.95, abs=1e-15)

    @pytest.mark.parametrize(
        "dist",
        [
            HomogeneousBernoulli(9, 0.23),
            HeterogeneousBernoulli(np.linspace(0.05, 0.9, 12)),
            UniformPatterns(11),
        ],
    )
    def test_total_mass_one(self, dist):
        _, probs = dist.enumerate_probabilities()
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)

    def test_rejects_bad_rates(self):
        with pytest.raises(ValueError):
            HomogeneousBernoulli(3, 1.5)
        with pytest.raises(ValueError):
            HeterogeneousBernoulli([0.1, -0.2])


class TestMergeModel:
    def test_single_empty_protocol_reduces_to_bernoulli(self):
        eta = 0.17
        merge = MergeModel([MissingPattern(0, 4)], [1.0], eta)
        bern = HomogeneousBernoulli(4, eta)
        for bits in range(16):
            m = MissingPattern(bits, 4)
            assert merge.probability(m) == pytest.approx(bern.probability(m), abs=1e-15)

    def test_two_protocol_example(self):
        eta = 0.1
        merge = MergeModel(
            [MissingPattern.from_string("10"), MissingPattern.from_string("00")],
            [0.5, 0.5],
            eta,
        )
        m = MissingPattern.from_string("10")
        expected = 0.5 * (1 - eta) + 0.5 * eta * (1 - eta)
        assert merge.probability(m) == pytest.approx(expected, abs=1e-15)
        assert merge_probability_oracle(merge, m) == pytest.approx(expected, abs=1e-15)

    def test_matches_brute_force_oracle(self):
        merge = MergeModel(
            [MissingPattern.from_string("1100"), MissingPattern.from_string("0010")],
            [0.7, 0.3],
            0.2,
        )
        for bits in range(16):
            m = MissingPattern(bits, 4)
            assert merge.probability(m) == pytest.approx(merge_probability_oracle(merge, m), abs=1e-13)

    def test_total_mass_one(self):
        merge = MergeModel(
            [MissingPattern.from_string("110000000000"), MissingPattern.from_string("000000000011")],
            [0.4, 0.6],
            0.05,
        )
        _, probs = merge.enumerate_probabilities()
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)

    def test_protocol_superset_required(self):
        merge = MergeModel([MissingPattern.from_string("11")], [1.0], 0.5)
        assert merge.probability(MissingPattern.from_string("01")) == 0.0

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            MergeModel([MissingPattern(0, 2)], [0.5], 0.1)


class TestExplicit:
    def _uniform4(self):
        quarter = {MissingPattern(b, 2): 0.25 for b in range(4)}
        return ExplicitPatterns(2, quarter)

    def test_lookup_and_absent(self):
        dist = ExplicitPatterns(3, {MissingPattern(0, 3): 0.4, MissingPattern(5, 3): 0.6})
        assert dist.probability(MissingPattern(0, 3)) == 0.4
        assert dist.probability(MissingPattern(1, 3)) == 0.0

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(3)
        weights = rng.dirichlet(np.ones(9))
        dist = ExplicitPatterns(5, {MissingPattern(int(b), 5): w for b, w in enumerate(weights)})
        total = sum(dist.probability(MissingPattern(b, 5)) for b in range(32))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            ExplicitPatterns(2, {MissingPattern(0, 2): 0.5})
        with pytest.raises(ValueError):
            ExplicitPatterns(2, {MissingPattern(0, 2): -0.2, MissingPattern(1, 2): 1.2})

    def test_dimension_mismatch(self):
        dist = self._uniform4()
        with pytest.raises(ValueError):
            pattern_probability(dist, MissingPattern(0, 3))

    def test_law_of_large_numbers(self):
        dist = self._uniform4()
        rng = np.random.default_rng(7)
        keys = dist.sample_masks(rng, 100_000)
        for bits in range(4):
            assert abs(np.mean(keys == bits) - 0.25) <= 0.01

    def test_sampling_frequencies_match_probabilities(self):
        rng = np.random.default_rng(11)
        for dist in (
            HomogeneousBernoulli(5, 0.3),
            HeterogeneousBernoulli([0.5, 0.1, 0.9, 0.2, 0.4, 0.05]),
            MergeModel([MissingPattern.from_string("1000"), MissingPattern.from_string("0011")], [0.5, 0.5], 0.1),
            UniformPatterns(6),
        ):
            keys = dist.sample_masks(rng, 100_000)
            all_keys, probs = dist.enumerate_probabilities()
            freq = np.bincount(keys, minlength=all_keys.size) / keys.size
            assert np.abs(freq - probs).max() <= 5.0 * np.sqrt(1.0 / 100_000)


class TestJson:
    def test_explicit_round_trip(self):
        obj = {
            "d": 4,
            "patterns": [{"mask": "0110", "p": 0.25}, {"mask": "0000", "p": 0.75}],
        }
        dist = explicit_from_json(obj)
        assert dist.probability(MissingPattern.from_string("0110")) == 0.25
        again = explicit_from_json(explicit_to_json(dist))
        assert again.probability(MissingPattern.from_string("0000")) == 0.75

    def test_explicit_rejects_bad_mask_length(self):
        with pytest.raises(ValueError):
            explicit_from_json({"d": 3, "patterns": [{"mask": "0110", "p": 1.0}]})

    def test_kind_dispatch(self):
        assert isinstance(
            distribution_from_json({"kind": "homogeneous_bernoulli", "d": 4, "epsilon": 0.2}),
            HomogeneousBernoulli,
        )
        assert isinstance(
            distribution_from_json({"kind": "merge", "protocols": ["10", "01"], "weights": [0.5, 0.5], "eta": 0.1}),
            MergeModel,
        )
        assert isinstance(distribution_from_json({"kind": "uniform", "d": 3}), UniformPatterns)
        with pytest.raises(ValueError):
            distribution_from_json({"kind": "nope"})

    def test_bare_explicit_object(self):
        dist = distribution_from_json({"d": 1, "patterns": [{"mask": "0", "p": 1.0}]})
        assert isinstance(dist, ExplicitPatterns)
