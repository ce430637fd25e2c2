"""
Tests for social_space module
"""

import math

import numpy as np
import pytest

from src.social_space import (
    GroupState,
    NodePosition,
    SpaceConfig,
    dispersion,
    distance,
    draw_position_near,
    init_groups,
    inside_region,
    reflect,
    step_group_centers,
    step_node_positions,
)


class TestInitGroups:
    """Test group creation"""

    def test_sizes_split_evenly(self, rng):
        """100 nodes over 3 groups -> 34, 33, 33"""
        groups = init_groups(SpaceConfig(n_groups=3), 100, rng)
        assert [g.target_size for g in groups] == [34, 33, 33]

    def test_single_group(self, rng):
        """One group takes the whole target"""
        groups = init_groups(SpaceConfig(n_groups=1), 1000, rng)
        assert len(groups) == 1
        assert groups[0].target_size == 1000

    def test_centers_inside_region(self, rng):
        """Centers are uniform over the square"""
        groups = init_groups(SpaceConfig(n_groups=50, region_side=2.0), 500, rng)
        assert inside_region([g.center for g in groups], 2.0)
        assert sum(g.target_size for g in groups) == 500


class TestMotion:
    """Test group and node movement"""

    def test_reflect(self):
        """Coordinates fold back at both walls"""
        values = np.array([-0.1, 0.5, 1.2, 2.3])
        np.testing.assert_allclose(reflect(values, 1.0), [0.1, 0.5, 0.8, 0.3])

    def test_zero_center_step_is_identity(self, rng):
        """sd 0 leaves every center in place"""
        groups = [GroupState(id=0, center=(0.2, 0.7), target_size=10)]
        moved = step_group_centers(groups, SpaceConfig(group_center_step_sd=0.0), rng)
        assert moved[0].center == (0.2, 0.7)

    def test_centers_stay_inside(self, rng):
        """Center at the corner with a huge step stays in the region"""
        cfg = SpaceConfig(group_center_step_sd=0.5)
        groups = [GroupState(id=0, center=(0.0, 1.0), target_size=1)]
        for _ in range(200):
            groups = step_group_centers(groups, cfg, rng)
            assert inside_region([groups[0].center], 1.0)

    def test_center_step_sd(self):
        """Away from the walls the per-step center displacement has the configured sd"""
        cfg = SpaceConfig(group_center_step_sd=0.002)
        rng = np.random.default_rng(41)
        groups = [GroupState(id=g, center=(0.5, 0.5), target_size=1) for g in range(500)]
        steps = []
        for _ in range(60):
            moved = step_group_centers(groups, cfg, rng)
            steps.extend(np.subtract([g.center for g in moved], [g.center for g in groups]).ravel())
            groups = moved
        assert inside_region([g.center for g in groups], 1.0)
        assert all(0.3 < c < 0.7 for g in groups for c in g.center)
        assert np.std(steps) == pytest.approx(0.002, rel=0.02)

    def test_full_reversion_without_noise(self, rng):
        """k=1 and no noise puts the node on its center"""
        cfg = SpaceConfig(node_reversion=1.0, node_step_sd=0.0)
        groups = [GroupState(id=0, center=(0.3, 0.4), target_size=1)]
        nodes = [NodePosition(id=7, position=(0.9, 0.9), group=0)]
        moved = step_node_positions(nodes, groups, cfg, rng)
        assert moved[0].id == 7
        assert moved[0].position == pytest.approx((0.3, 0.4))

    def test_partial_reversion_halves_gap(self, rng):
        """k=0.5 without noise halves the distance to the center"""
        cfg = SpaceConfig(node_reversion=0.5, node_step_sd=0.0)
        groups = [GroupState(id=0, center=(0.5, 0.5), target_size=1)]
        nodes = [NodePosition(id=0, position=(0.9, 0.5), group=0)]
        moved = step_node_positions(nodes, groups, cfg, rng)
        assert moved[0].position == pytest.approx((0.7, 0.5))

    def test_stationary_spread(self, rng):
        """Long-run spread around a fixed center matches sd / sqrt(1 - (1-k)^2)"""
        cfg = SpaceConfig(node_reversion=0.1, node_step_sd=0.01, group_center_step_sd=0.0)
        groups = [GroupState(id=0, center=(0.5, 0.5), target_size=200)]
        nodes = [NodePosition(id=i, position=(0.5, 0.5), group=0) for i in range(200)]
        for _ in range(100):
            nodes = step_node_positions(nodes, groups, cfg, rng)
        samples = []
        for _ in range(200):
            nodes = step_node_positions(nodes, groups, cfg, rng)
            samples.extend(n.position[0] for n in nodes)
        expected = 0.01 / math.sqrt(1 - 0.81)
        assert cfg.node_stationary_sd == pytest.approx(expected)
        assert np.std(samples) == pytest.approx(expected, rel=0.1)


class TestHelpers:
    """Test distance, placement and dispersion"""

    def test_distance(self):
        """3-4-5 triangle"""
        a = NodePosition(id=0, position=(0.0, 0.0), group=0)
        assert distance(a, (0.3, 0.4)) == pytest.approx(0.5)

    def test_distance_symmetric(self, rng):
        """d(a, b) = d(b, a) over random pairs, and 0 only for identical points"""
        points = rng.uniform(0.0, 1.0, size=(1000, 2, 2))
        for a, b in points:
            a, b = tuple(a), tuple(b)
            assert distance(a, b) == distance(b, a)
            assert distance(a, b) > 0
            assert distance(a, a) == 0.0

    def test_draw_position_near(self, rng):
        """New positions land inside the region"""
        cfg = SpaceConfig()
        points = [draw_position_near((0.0, 0.0), cfg, rng) for _ in range(100)]
        assert inside_region(points, cfg.region_side)

    def test_dispersion(self):
        """RMS distance to the group center"""
        groups = [GroupState(id=0, center=(0.5, 0.5), target_size=2)]
        nodes = [
            NodePosition(id=0, position=(0.5, 0.6), group=0),
            NodePosition(id=1, position=(0.5, 0.4), group=0),
        ]
        assert dispersion(nodes, groups) == pytest.approx(0.1)
        assert dispersion([], groups) == 0.0

    def test_validate(self):
        """Bad geometry is reported"""
        assert SpaceConfig().validate() == []
        problems = SpaceConfig(region_side=0, n_groups=0, node_reversion=0).validate()
        assert len(problems) == 3
