"""
Tests for link_dynamics module
"""

import math

import numpy as np
import pytest

from src.link_dynamics import (
    LinkParams,
    candidate_pairs,
    draw_duration,
    draw_durations,
    formation_probability,
    step_dissolution,
    step_formation,
)

NEUTRAL_MIX = {"ff": 1.0, "fm": 1.0, "mf": 1.0, "mm": 1.0}


class TestFormationProbability:
    """Test the formation kernel"""

    @pytest.fixture
    def params(self):
        return LinkParams(base_prob=0.1, kernel_scale=0.02, sex_mix=dict(NEUTRAL_MIX), degree_cap=10)

    def test_zero_distance(self, make_world, params):
        """Distance 0, neutral mix, isolated nodes -> p0"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.5, 0.5))])
        assert formation_probability(world, 0, 1, params) == pytest.approx(0.1)

    def test_one_kernel_scale(self, make_world, params):
        """d = sigma -> p0 * exp(-1/2)"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.52, 0.5))])
        assert formation_probability(world, 0, 1, params) == pytest.approx(0.1 * math.exp(-0.5), rel=1e-9)
        assert formation_probability(world, 0, 1, params) == pytest.approx(0.06065, abs=1e-5)

    def test_saturated_degree(self, make_world):
        """deg_i = d_cap -> 0"""
        nodes = [(0, "F", (0.5, 0.5)), (0, "M", (0.5, 0.5)), (0, "M", (0.6, 0.6)), (0, "M", (0.7, 0.7))]
        world = make_world(nodes, links=[(0, 2), (0, 3)])
        params = LinkParams(base_prob=0.5, sex_mix=dict(NEUTRAL_MIX), degree_cap=2)
        assert formation_probability(world, 0, 1, params) == 0.0

    def test_symmetric(self, make_world, params):
        """Neutral mix gives p(i, j) = p(j, i)"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.51, 0.52))], links=[])
        assert formation_probability(world, 0, 1, params) == formation_probability(world, 1, 0, params)

    def test_sex_mix_applies(self, make_world):
        """Default mix damps same-sex pairs"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "F", (0.5, 0.5))])
        params = LinkParams(base_prob=1.0)
        assert formation_probability(world, 0, 1, params) == pytest.approx(0.05)

    def test_monotone_in_distance(self, make_world, params):
        """Further apart never means more likely"""
        nodes = [(0, "F", (0.5, 0.5))] + [(0, "M", (0.5 + d, 0.5)) for d in (0.0, 0.01, 0.03, 0.1)]
        world = make_world(nodes)
        probs = [formation_probability(world, 0, j, params) for j in range(1, 5)]
        assert probs == sorted(probs, reverse=True)

    def test_self_pair_rejected(self, make_world, params):
        """i == j is an error"""
        world = make_world([(0, "F", (0.5, 0.5))])
        with pytest.raises(ValueError):
            formation_probability(world, 0, 0, params)


class TestCandidatePairs:
    """Test candidate enumeration"""

    def test_zero_cutoff(self, make_world):
        """Distinct points have no pair at cutoff 0"""
        world = make_world([(0, "F", (0.1, 0.1)), (0, "M", (0.2, 0.2))])
        assert len(candidate_pairs(world, 0.0)) == 0

    def test_three_close_nodes(self, make_world):
        """Three mutually close unlinked nodes -> three pairs"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.51, 0.5)), (0, "F", (0.5, 0.51))])
        assert candidate_pairs(world, 0.1).tolist() == [[0, 1], [0, 2], [1, 2]]

    def test_linked_pairs_excluded(self, make_world):
        """Existing links are not candidates"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.51, 0.5)), (0, "F", (0.5, 0.51))],
                           links=[(0, 2)])
        assert candidate_pairs(world, 0.1).tolist() == [[0, 1], [1, 2]]

    def test_infinite_cutoff(self, make_world):
        """No cutoff enumerates every unlinked pair"""
        world = make_world([(0, "F", (0.0, 0.0)), (0, "M", (1.0, 1.0)), (0, "F", (0.0, 1.0))])
        assert len(candidate_pairs(world, math.inf)) == 3


class TestFormation:
    """Test formation steps"""

    def test_no_base_prob(self, make_world, rng):
        """p0 = 0 forms nothing"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.5, 0.5))])
        assert step_formation(world, LinkParams(base_prob=0.0), rng, now=0) == []
        assert world.n_links == 0

    def test_certain_formation(self, make_world, rng):
        """Two nodes on top of each other with p0 = 1 link up"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.5, 0.5))])
        params = LinkParams(base_prob=1.0, sex_mix=dict(NEUTRAL_MIX))
        assert step_formation(world, params, rng, now=7) == [(0, 1)]
        edge = world.graph.edges[0, 1]
        assert edge["formed_at"] == 7
        assert edge["expires_at"] >= 8

    def test_start_of_step_degrees(self, make_world, rng):
        """With d_cap = 1 a hub can still gain several links in one step"""
        nodes = [(0, "F", (0.5, 0.5))] + [(0, "M", (0.5, 0.5)) for _ in range(3)]
        world = make_world(nodes)
        params = LinkParams(base_prob=1.0, sex_mix={"ff": 0.0, "fm": 1.0, "mf": 1.0, "mm": 0.0}, degree_cap=1)
        formed = step_formation(world, params, rng, now=0)
        assert formed == [(0, 1), (0, 2), (0, 3)]
        assert world.degree(0) == 3

    def test_formation_frequency(self, make_world):
        """Empirical frequency over 10^5 trials matches the formation probability"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.52, 0.5))])
        params = LinkParams(base_prob=0.1, kernel_scale=0.02, sex_mix=dict(NEUTRAL_MIX))
        p = formation_probability(world, 0, 1, params)
        rng = np.random.default_rng(5)
        trials = 100_000
        hits = 0
        for _ in range(trials):
            if step_formation(world, params, rng, now=0):
                hits += 1
                world.remove_link(0, 1)
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(hits / trials - p) < 4 * se

    def test_multipliers(self, make_world, rng):
        """A zero formation multiplier blocks a certain link"""
        world = make_world([(0, "F", (0.5, 0.5)), (0, "M", (0.5, 0.5))])
        params = LinkParams(base_prob=1.0, sex_mix=dict(NEUTRAL_MIX))
        assert step_formation(world, params, rng, now=0, formation_mult={1: 0.0}) == []


class TestDurations:
    """Test renewal durations"""

    def test_at_least_one(self, rng):
        """Every draw is >= 1"""
        draws = draw_durations(LinkParams(duration_mean=0.5, duration_shape=1.0), rng, 10_000)
        assert draws.min() >= 1
        assert draw_duration(LinkParams(), rng) >= 1

    def test_exponential_mean(self):
        """k = 1, tau = 50: mean of ceil(Exp(50)) is about 50.5"""
        draws = draw_durations(LinkParams(duration_mean=50, duration_shape=1), np.random.default_rng(1), 100_000)
        assert draws.mean() == pytest.approx(50.5, rel=0.02)

    def test_shape_reduces_variance(self):
        """k = 4 is less variable than k = 1 at the same mean"""
        rng = np.random.default_rng(2)
        flat = draw_durations(LinkParams(duration_mean=50, duration_shape=1), rng, 100_000)
        peaked = draw_durations(LinkParams(duration_mean=50, duration_shape=4), rng, 100_000)
        assert peaked.var() < flat.var()


class TestDissolution:
    """Test link expiry"""

    @pytest.fixture
    def star(self, make_world):
        nodes = [(0, "F", (0.5, 0.5))] + [(0, "M", (0.5, 0.5)) for _ in range(3)]
        world = make_world(nodes)
        world.add_link(0, 1, formed_at=0, expires_at=5)
        world.add_link(0, 2, formed_at=0, expires_at=6)
        world.add_link(0, 3, formed_at=0, expires_at=9)
        return world

    def test_nothing_expired(self, star):
        """No link past expiry -> no change"""
        assert step_dissolution(star, 4) == []
        assert star.n_links == 3

    def test_boundary_inclusive(self, star):
        """expires_at == now is removed"""
        assert step_dissolution(star, 5) == [(0, 1)]

    def test_degree_recount(self, star):
        """Degree drops by the number of expired links"""
        assert step_dissolution(star, 6) == [(0, 1), (0, 2)]
        assert star.degree(0) == 1
        assert star.degree(0) == sum(1 for _ in star.graph.neighbors(0))


class TestValidation:
    """Test parameter validation"""

    def test_defaults_valid(self):
        assert LinkParams().validate() == []

    def test_bad_values(self):
        params = LinkParams(base_prob=1.5, kernel_scale=0, sex_mix={"ff": 1.0})
        assert len(params.validate()) == 3
