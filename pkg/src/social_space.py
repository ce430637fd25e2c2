"""
Social space layer: drifting group centers and nodes diffusing around them
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

Point = Tuple[float, float]


@dataclass
class SpaceConfig:
    """Geometry and motion parameters of the 2-D social space"""

    region_side: float = 1.0
    n_groups: int = 20
    group_center_step_sd: float = 0.002
    node_reversion: float = 0.1
    node_step_sd: float = 0.01

    def validate(self) -> List[str]:
        problems = []
        if self.region_side <= 0:
            problems.append("space.region_side must be > 0")
        if self.n_groups < 1:
            problems.append("space.n_groups must be >= 1")
        if not (0 < self.node_reversion <= 1):
            problems.append("space.node_reversion must be in (0, 1]")
        if self.group_center_step_sd < 0 or self.node_step_sd < 0:
            problems.append("space step standard deviations must be >= 0")
        return problems

    @property
    def node_stationary_sd(self) -> float:
        """Per-coordinate sd of a node around a fixed center, sd / sqrt(1 - (1-k)^2)"""
        keep = 1.0 - self.node_reversion
        denom = 1.0 - keep * keep
        if denom <= 0:
            return math.inf
        return self.node_step_sd / math.sqrt(denom)


@dataclass
class GroupState:
    id: int
    center: Point
    target_size: int


@dataclass
class NodePosition:
    id: int
    position: Point
    group: int


def reflect(values: np.ndarray, side: float) -> np.ndarray:
    """Fold coordinates back into [0, side] by reflection at both walls"""
    folded = np.mod(values, 2.0 * side)
    return np.where(folded > side, 2.0 * side - folded, folded)


def init_groups(cfg: SpaceConfig, pop_target: int, rng: np.random.Generator) -> List[GroupState]:
    """
    Draw group centers uniformly and split the population target evenly

    The first ``pop_target % n_groups`` groups get one extra member, so
    sizes differ by at most one and sum to ``pop_target``.
    """
    base, extra = divmod(int(pop_target), cfg.n_groups)
    centers = rng.uniform(0.0, cfg.region_side, size=(cfg.n_groups, 2))
    return [
        GroupState(
            id=g,
            center=(float(centers[g, 0]), float(centers[g, 1])),
            target_size=base + (1 if g < extra else 0),
        )
        for g in range(cfg.n_groups)
    ]


def step_group_centers(groups: List[GroupState], cfg: SpaceConfig,
                       rng: np.random.Generator) -> List[GroupState]:
    """Reflected Gaussian random walk of every group center"""
    if not groups:
        return []
    centers = np.array([g.center for g in groups], dtype=float)
    steps = rng.normal(0.0, cfg.group_center_step_sd, size=centers.shape)
    moved = reflect(centers + steps, cfg.region_side)
    return [
        GroupState(id=g.id, center=(float(moved[k, 0]), float(moved[k, 1])), target_size=g.target_size)
        for k, g in enumerate(groups)
    ]


def step_node_positions(nodes: List[NodePosition], groups: List[GroupState], cfg: SpaceConfig,
                        rng: np.random.Generator) -> List[NodePosition]:
    """
    Mean-reverting (AR(1)) step of every node around its group center

    x <- c + (1 - k)(x - c) + eps, eps ~ N(0, node_step_sd^2) per coordinate,
    reflected into the region.
    """
    if not nodes:
        return []
    centers_by_group = {g.id: g.center for g in groups}
    positions = np.array([n.position for n in nodes], dtype=float)
    centers = np.array([centers_by_group[n.group] for n in nodes], dtype=float)

    keep = 1.0 - cfg.node_reversion
    noise = rng.normal(0.0, cfg.node_step_sd, size=positions.shape)
    moved = reflect(centers + keep * (positions - centers) + noise, cfg.region_side)

    return [
        NodePosition(id=n.id, position=(float(moved[k, 0]), float(moved[k, 1])), group=n.group)
        for k, n in enumerate(nodes)
    ]


def distance(a, b) -> float:
    """Euclidean distance between two NodePositions (or bare points)"""
    pa = a.position if isinstance(a, NodePosition) else a
    pb = b.position if isinstance(b, NodePosition) else b
    return math.hypot(pa[0] - pb[0], pa[1] - pb[1])


def draw_position_near(center: Point, cfg: SpaceConfig, rng: np.random.Generator) -> Point:
    """Position for a new node, Gaussian around its center with the stationary sd"""
    sd = cfg.node_stationary_sd
    if not math.isfinite(sd):
        sd = cfg.region_side
    raw = np.asarray(center, dtype=float) + rng.normal(0.0, sd, size=2)
    point = reflect(raw, cfg.region_side)
    return float(point[0]), float(point[1])


def inside_region(points: Iterable[Point], side: float) -> bool:
    return all(0.0 <= x <= side and 0.0 <= y <= side for x, y in points)


def dispersion(nodes: List[NodePosition], groups: List[GroupState]) -> float:
    """Root-mean-square node-to-center distance"""
    if not nodes:
        return 0.0
    centers_by_group = {g.id: g.center for g in groups}
    positions = np.array([n.position for n in nodes], dtype=float)
    centers = np.array([centers_by_group[n.group] for n in nodes], dtype=float)
    return float(np.sqrt(np.mean(np.sum((positions - centers) ** 2, axis=1))))
