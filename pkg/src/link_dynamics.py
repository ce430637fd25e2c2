"""
Link layer: distance/sex/degree driven formation and renewal-process dissolution
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .spatial_grid import SpatialGrid, brute_force_pairs
from .world import LINK_KEY_SHIFT, World

logger = logging.getLogger(__name__)

SEX_INDEX = {"F": 0, "M": 1}

Pair = Tuple[int, int]


def _default_sex_mix() -> Dict[str, float]:
    return {"ff": 0.05, "fm": 1.0, "mf": 1.0, "mm": 0.05}


@dataclass
class LinkParams:
    """Formation kernel and duration distribution of links"""

    base_prob: float = 0.005
    kernel_scale: float = 0.02
    sex_mix: Dict[str, float] = field(default_factory=_default_sex_mix)
    degree_cap: float = 8.0
    duration_mean: float = 50.0
    duration_shape: float = 1.0
    candidate_cutoff: float = 0.12

    def validate(self) -> List[str]:
        problems = []
        if not (0.0 <= self.base_prob <= 1.0):
            problems.append("links.base_prob must be in [0, 1]")
        if self.kernel_scale <= 0:
            problems.append("links.kernel_scale must be > 0")
        if set(self.sex_mix) != {"ff", "fm", "mf", "mm"}:
            problems.append("links.sex_mix needs exactly the keys ff, fm, mf, mm")
        elif any(not (0.0 <= v <= 1.0) for v in self.sex_mix.values()):
            problems.append("links.sex_mix entries must be in [0, 1]")
        if self.degree_cap <= 0:
            problems.append("links.degree_cap must be > 0")
        if self.duration_mean <= 0 or self.duration_shape <= 0:
            problems.append("links.duration_mean and links.duration_shape must be > 0")
        if self.candidate_cutoff < 0:
            problems.append("links.candidate_cutoff must be >= 0")
        return problems

    @property
    def mix_matrix(self) -> np.ndarray:
        m = self.sex_mix
        return np.array([[m["ff"], m["fm"]], [m["mf"], m["mm"]]], dtype=float)


def degree_factor(degrees: np.ndarray, degree_cap: float) -> np.ndarray:
    """g(d) = max(0, 1 - d / d_cap)"""
    if math.isinf(degree_cap):
        return np.ones_like(np.asarray(degrees, dtype=float))
    return np.maximum(0.0, 1.0 - np.asarray(degrees, dtype=float) / degree_cap)


def formation_probabilities(dist: np.ndarray, sex_i: np.ndarray, sex_j: np.ndarray,
                            deg_i: np.ndarray, deg_j: np.ndarray, params: LinkParams,
                            multiplier: Optional[np.ndarray] = None) -> np.ndarray:
    """Vectorised p0 * kernel(d) * mix[sex_i, sex_j] * g(deg_i) * g(deg_j)"""
    dist = np.asarray(dist, dtype=float)
    kernel = np.exp(-(dist ** 2) / (2.0 * params.kernel_scale ** 2))
    mix = params.mix_matrix[np.asarray(sex_i), np.asarray(sex_j)]
    p = params.base_prob * kernel * mix * degree_factor(deg_i, params.degree_cap) \
        * degree_factor(deg_j, params.degree_cap)
    if multiplier is not None:
        p = p * multiplier
    return np.clip(p, 0.0, 1.0)


def formation_probability(world: World, i: int, j: int, params: LinkParams,
                          multiplier: float = 1.0) -> float:
    """Formation probability for one unlinked pair at current positions and degrees"""
    if i == j:
        raise ValueError(f"Formation probability requested for self-pair ({i}, {i})")
    (xi, yi), (xj, yj) = world.position(i), world.position(j)
    p = formation_probabilities(
        np.array([math.hypot(xi - xj, yi - yj)]),
        np.array([SEX_INDEX[world.sex(i)]]),
        np.array([SEX_INDEX[world.sex(j)]]),
        np.array([world.degree(i)]),
        np.array([world.degree(j)]),
        params,
        np.array([multiplier]),
    )
    return float(p[0])


def _candidate_rows(world: World, cutoff: float):
    """Sorted node ids, their positions, and unlinked row pairs within cutoff"""
    ids = np.array(world.node_ids(), dtype=np.int64)
    points = world.positions_array(ids.tolist())

    if 0 < cutoff < math.inf:
        rows = SpatialGrid(points, cutoff).close_pairs(cutoff)
    else:
        rows = brute_force_pairs(points, max(cutoff, 0.0))

    if len(rows):
        keys = ids[rows[:, 0]] * LINK_KEY_SHIFT + ids[rows[:, 1]]
        rows = rows[~np.isin(keys, world.link_keys())]
        order = np.lexsort((rows[:, 1], rows[:, 0]))
        rows = rows[order]
    return ids, points, rows


def candidate_pairs(world: World, cutoff: float) -> np.ndarray:
    """
    Unordered unlinked pairs within ``cutoff`` of each other

    Returns:
        (m, 2) array of node ids, low id first, sorted lexicographically
    """
    ids, _, rows = _candidate_rows(world, cutoff)
    if not len(rows):
        return np.zeros((0, 2), dtype=np.int64)
    return ids[rows]


def draw_durations(params: LinkParams, rng: np.random.Generator, size: int,
                   multiplier: Optional[np.ndarray] = None) -> np.ndarray:
    """Ceiling of gamma(shape k, mean tau) draws, optionally stretched, at least 1"""
    raw = rng.gamma(params.duration_shape, params.duration_mean / params.duration_shape, size=size)
    if multiplier is not None:
        raw = raw * multiplier
    return np.maximum(1, np.ceil(raw)).astype(np.int64)


def draw_duration(params: LinkParams, rng: np.random.Generator) -> int:
    return int(draw_durations(params, rng, 1)[0])


def step_formation(world: World, params: LinkParams, rng: np.random.Generator, now: int,
                   formation_mult: Optional[Mapping[int, float]] = None,
                   duration_mult: Optional[Mapping[int, float]] = None) -> List[Pair]:
    """
    One simultaneous round of link formation

    Degrees are read once, before any new link is added, so the outcome does
    not depend on the order in which pairs are visited.

    Args:
        world: World to add links to
        params: Formation and duration parameters
        rng: The link layer's stream
        now: Current tick
        formation_mult: Per-node multiplier on formation probability (missing = 1)
        duration_mult: Per-node multiplier on drawn durations (missing = 1)

    Returns:
        New links as (low id, high id)
    """
    ids, points, rows = _candidate_rows(world, params.candidate_cutoff)
    if not len(rows):
        return []

    id_list = ids.tolist()
    sex = np.fromiter((SEX_INDEX[world.sex(i)] for i in id_list), dtype=np.int64, count=len(id_list))
    deg = world.degrees(id_list)
    a, b = rows[:, 0], rows[:, 1]
    dist = np.sqrt(np.sum((points[a] - points[b]) ** 2, axis=1))

    pair_mult = None
    if formation_mult:
        node_mult = np.array([formation_mult.get(i, 1.0) for i in id_list], dtype=float)
        pair_mult = node_mult[a] * node_mult[b]

    p = formation_probabilities(dist, sex[a], sex[b], deg[a], deg[b], params, pair_mult)
    formed = rng.random(len(p)) < p
    if not formed.any():
        return []

    fa, fb = a[formed], b[formed]
    stretch = None
    if duration_mult:
        node_stretch = np.array([duration_mult.get(i, 1.0) for i in id_list], dtype=float)
        stretch = np.maximum(node_stretch[fa], node_stretch[fb])
    durations = draw_durations(params, rng, len(fa), stretch)

    new_links = []
    for ra, rb, duration in zip(fa.tolist(), fb.tolist(), durations.tolist()):
        i, j = id_list[ra], id_list[rb]
        world.add_link(i, j, formed_at=now, expires_at=now + duration)
        new_links.append((i, j))

    logger.debug(f"Tick {now}: {len(new_links)} links formed from {len(p)} candidates")
    return new_links


def step_dissolution(world: World, now: int) -> List[Pair]:
    """Remove every link whose expiry step has been reached"""
    expired = sorted(
        (min(i, j), max(i, j)) for i, j, expires_at in world.graph.edges(data="expires_at") if expires_at <= now
    )
    for i, j in expired:
        world.remove_link(i, j)
    return expired
