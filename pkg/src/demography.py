"""
Demography layer: deaths, emigration and feedback-regulated insertions
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .social_space import SpaceConfig, draw_position_near
from .world import SEXES, NodeLifeRecord, World

logger = logging.getLogger(__name__)

DEATH = "death"
EMIGRATION = "emigration"
REMOVAL_CAUSES = (DEATH, EMIGRATION)

__all__ = [
    "DemographyParams",
    "NodeLifeRecord",
    "insertion_rate",
    "remove_node",
    "step_deaths",
    "step_insertions",
]


@dataclass
class DemographyParams:
    death_hazard: float = 0.002
    pop_target: int = 1000
    insertion_base: float = 2.0
    feedback_strength: float = 1.0
    emigration_hazard: float = 0.0

    def validate(self) -> List[str]:
        problems = []
        if not (0.0 <= self.death_hazard < 1.0):
            problems.append("demography.death_hazard must be in [0, 1)")
        if not (0.0 <= self.emigration_hazard < 1.0):
            problems.append("demography.emigration_hazard must be in [0, 1)")
        if self.pop_target < 1:
            problems.append("demography.pop_target must be >= 1")
        if self.insertion_base < 0:
            problems.append("demography.insertion_base must be >= 0")
        if self.feedback_strength < 0:
            problems.append("demography.feedback_strength must be >= 0")
        return problems

    def equilibrium_warnings(self) -> List[str]:
        """Soft check that insertions balance removals at the target size"""
        outflow = (self.death_hazard + self.emigration_hazard) * self.pop_target
        if outflow <= 0 and self.insertion_base <= 0:
            return []
        if outflow <= 0 or not (0.5 <= self.insertion_base / outflow <= 2.0):
            return [
                f"demography.insertion_base={self.insertion_base} is far from the removal flow "
                f"{outflow:.3g} at pop_target; the population will drift away from its target"
            ]
        return []

    @property
    def population_autocorr(self) -> float:
        """Lag-1 autocorrelation of the population near its target, 1 - (removal hazard + feedback slope)"""
        feedback = self.insertion_base * self.feedback_strength / self.pop_target
        restoring = self.death_hazard + self.emigration_hazard + feedback
        return min(max(1.0 - restoring, 0.0), 0.999)


MortalityMultiplier = Callable[[int], float]


def remove_node(world: World, node_id: int, cause: str):
    """
    Delete a node from the population

    Incident links go with it, every registered sample drops it (forced
    attrition) and its life record is closed.
    """
    if not world.has_node(node_id):
        world.violation(f"remove_node: unknown node {node_id}")
        return
    if cause not in REMOVAL_CAUSES:
        raise ValueError(f"Unknown removal cause: {cause}")

    world.detach_node(node_id)
    record = world.life_records.get(node_id)
    if record is not None:
        record.removed_at = world.step
        record.removal_cause = cause
    world.notify_removal(node_id)


def step_deaths(world: World, params: DemographyParams, rng: np.random.Generator,
                mortality_multiplier: Optional[MortalityMultiplier] = None) -> List[Tuple[int, str]]:
    """
    Competing death/emigration draw for every living node, in ascending id order

    Args:
        world: Population to thin
        params: Hazards
        rng: The demography stream
        mortality_multiplier: Node id -> multiplier on the death hazard (stage and treatment effects)

    Returns:
        (node id, cause) for each removed node
    """
    ids = world.node_ids()
    if not ids:
        return []

    death = np.full(len(ids), params.death_hazard, dtype=float)
    if mortality_multiplier is not None:
        death *= np.array([mortality_multiplier(i) for i in ids], dtype=float)
    death = np.clip(death, 0.0, 1.0)
    leave = np.clip(death + params.emigration_hazard, 0.0, 1.0)

    u = rng.random(len(ids))
    removed = []
    for node_id, draw, p_death, p_leave in zip(ids, u.tolist(), death.tolist(), leave.tolist()):
        if draw < p_death:
            removed.append((node_id, DEATH))
        elif draw < p_leave:
            removed.append((node_id, EMIGRATION))

    for node_id, cause in removed:
        remove_node(world, node_id, cause)
    if removed:
        logger.debug(f"Step {world.step}: {len(removed)} of {len(ids)} nodes removed")
    return removed


def insertion_rate(n_now: int, params: DemographyParams) -> float:
    """lambda0 * max(0, 1 + eta (N* - N) / N*)"""
    gap = (params.pop_target - n_now) / params.pop_target
    return params.insertion_base * max(0.0, 1.0 + params.feedback_strength * gap)


def step_insertions(world: World, params: DemographyParams, space: SpaceConfig,
                    rng: np.random.Generator, now: int) -> List[int]:
    """
    Poisson number of isolated newcomers, placed into under-filled groups

    Each newcomer's group is drawn with weight max(1, target - current size),
    its sex is a fair coin and its position is Gaussian around the group
    center with the stationary node spread.
    """
    count = int(rng.poisson(insertion_rate(world.size, params)))
    if count == 0 or not world.groups:
        return []

    sizes = world.group_sizes()
    centers = {g.id: g.center for g in world.groups}
    new_ids = []
    for _ in range(count):
        weights = np.array([max(1, g.target_size - sizes.get(g.id, 0)) for g in world.groups], dtype=float)
        pick = int(rng.choice(len(world.groups), p=weights / weights.sum()))
        group = world.groups[pick].id
        sex = SEXES[0] if rng.random() < 0.5 else SEXES[1]
        position = draw_position_near(centers[group], space, rng)
        new_ids.append(world.add_node(group, sex, position, born_at=now))
        sizes[group] = sizes.get(group, 0) + 1

    logger.debug(f"Step {now}: {count} newcomers at population {world.size - count}")
    return new_ids
