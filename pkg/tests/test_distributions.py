import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import rel_entr

from qnoiseprint.distributions import (
    ErrorStateDistribution,
    OutcomeDistribution,
    SmoothingPolicy,
    empirical_from_counts,
    kl_divergence,
    kl_matrix,
    restrict_to_error_states,
    smooth,
    total_variation,
)
from qnoiseprint.errors import DivergenceUndefined, InvalidArgument, NoErrorMass
from qnoiseprint.quantum_sim import Counts

BELL_NOISY = Counts(2, [480, 20, 30, 470])


def positive_dist(r, size):
    p = r.uniform(0.01, 1, size=size)
    return p / p.sum()


class TestEmpirical:
    def test_noisy_bell_example(self):
        np.testing.assert_allclose(empirical_from_counts(BELL_NOISY).probs, [0.48, 0.02, 0.03, 0.47])

    def test_indicator(self):
        np.testing.assert_array_equal(empirical_from_counts(Counts(2, [0, 0, 1000, 0])).probs, [0, 0, 1, 0])

    def test_zero_shots(self):
        with pytest.raises(InvalidArgument):
            empirical_from_counts(Counts(2, [0, 0, 0, 0]))

    def test_distribution_validation(self):
        with pytest.raises(InvalidArgument):
            OutcomeDistribution(1, [0.6, 0.6])
        with pytest.raises(InvalidArgument):
            OutcomeDistribution(1, [1.2, -0.2])
        with pytest.raises(InvalidArgument):
            ErrorStateDistribution(1, [])


class TestSmooth:
    def test_alpha_zero_is_empirical(self):
        np.testing.assert_array_equal(smooth(BELL_NOISY, SmoothingPolicy(0)).probs, empirical_from_counts(BELL_NOISY).probs)

    def test_jeffreys_values(self):
        got = smooth(BELL_NOISY, SmoothingPolicy(0.5)).probs
        np.testing.assert_allclose(got, np.array([480.5, 20.5, 30.5, 470.5]) / 1002, rtol=1e-15)
        np.testing.assert_allclose(got, [0.4796, 0.0205, 0.0304, 0.4696], atol=1e-4)

    def test_empty_bin_gets_mass(self):
        c = Counts(3, [500, 0, 0, 0, 0, 0, 0, 500])
        assert smooth(c).probs[3] == 0.5 / (1000 + 0.5 * 8)

    def test_negative_alpha(self):
        with pytest.raises(InvalidArgument):
            SmoothingPolicy(-0.1)

    def test_vanishing_alpha_limit(self):
        r = np.random.default_rng(0)
        c = Counts(4, r.integers(0, 50, size=16))
        assert total_variation(smooth(c, SmoothingPolicy(1e-9)), empirical_from_counts(c)) <= 1e-6


class TestRestrict:
    def test_noisy_bell_example(self):
        out = restrict_to_error_states(OutcomeDistribution(2, [0.48, 0.02, 0.03, 0.47]))
        np.testing.assert_allclose(out.probs, [0.4, 0.6], rtol=1e-12)

    def test_ideal_ghz_has_no_error_mass(self):
        p = np.zeros(8)
        p[[0, 7]] = 0.5
        with pytest.raises(NoErrorMass):
            restrict_to_error_states(OutcomeDistribution(3, p))

    def test_uniform(self):
        out = restrict_to_error_states(OutcomeDistribution(2, [0.25] * 4))
        np.testing.assert_array_equal(out.probs, [0.5, 0.5])

    @settings(max_examples=100, deadline=None)
    @given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1), scale=st.floats(0.01, 100))
    def test_independent_of_allowed_states(self, n, seed, scale):
        r = np.random.default_rng(seed)
        p = positive_dist(r, 2**n)
        q = p.copy()
        q[[0, -1]] *= scale
        q /= q.sum()
        a = restrict_to_error_states(OutcomeDistribution(n, p))
        b = restrict_to_error_states(OutcomeDistribution(n, q))
        assert abs(a.probs.sum() - 1) <= 1e-9
        np.testing.assert_allclose(a.probs, b.probs, atol=1e-9)


class TestKL:
    def test_identity_is_exactly_zero(self):
        p = positive_dist(np.random.default_rng(1), 32)
        assert kl_divergence(p, p) == 0.0

    def test_hand_value(self):
        expected = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected, abs=1e-15)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.14384, abs=1e-5)

    def test_zero_support(self):
        with pytest.raises(DivergenceUndefined):
            kl_divergence([1, 0], [0, 1])

    def test_zero_p_terms_vanish(self):
        assert kl_divergence([1, 0], [0.5, 0.5]) == pytest.approx(math.log(2))

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            kl_divergence([1], [0.5, 0.5])

    def test_accepts_distribution_objects(self):
        p = OutcomeDistribution(1, [0.5, 0.5])
        q = OutcomeDistribution(1, [0.25, 0.75])
        assert kl_divergence(p, q) == kl_divergence([0.5, 0.5], [0.25, 0.75])

    @settings(max_examples=200, deadline=None)
    @given(n=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
    def test_matches_scipy_and_gibbs_and_pinsker(self, n, seed):
        r = np.random.default_rng(seed)
        p, q = positive_dist(r, 2**n), positive_dist(r, 2**n)
        d = kl_divergence(p, q)
        assert d == pytest.approx(float(np.sum(rel_entr(p, q))), abs=1e-12)
        assert d >= 0
        assert total_variation(p, q) <= math.sqrt(d / 2) + 1e-12

    def test_asymmetry_witness(self):
        r = np.random.default_rng(5)
        gaps = []
        for _ in range(200):
            p, q = r.dirichlet(np.ones(8) * 0.3), r.dirichlet(np.ones(8) * 0.3)
            p, q = (p + 1e-6) / (1 + 8e-6), (q + 1e-6) / (1 + 8e-6)
            gaps.append(abs(kl_divergence(p, q) - kl_divergence(q, p)))
        assert max(gaps) > 0.1


class TestTotalVariation:
    def test_examples(self):
        assert total_variation([0.3, 0.7], [0.3, 0.7]) == 0
        assert total_variation([1, 0], [0, 1]) == 1
        assert total_variation([0.48, 0.02, 0.03, 0.47], [0.5, 0, 0, 0.5]) == pytest.approx(0.05)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            total_variation([1], [0.5, 0.5])


class TestKLMatrix:
    def test_single(self):
        np.testing.assert_array_equal(kl_matrix([[0.5, 0.5]]), [[0.0]])

    def test_identical_pair(self):
        p = [0.2, 0.8]
        np.testing.assert_array_equal(kl_matrix([p, p]), np.zeros((2, 2)))

    def test_entries_and_orientation(self):
        r = np.random.default_rng(3)
        dists = [positive_dist(r, 8) for _ in range(4)]
        m = kl_matrix(dists)
        assert np.all(np.diag(m) == 0)
        for i in range(4):
            for j in range(4):
                if i != j:
                    assert m[i, j] == kl_divergence(dists[i], dists[j]) > 0
        assert not np.allclose(m, m.T)

    def test_propagates_undefined(self):
        with pytest.raises(DivergenceUndefined):
            kl_matrix([[0.5, 0.5], [1.0, 0.0]])
