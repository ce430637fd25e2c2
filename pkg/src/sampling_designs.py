"""
Dynamic network sampling designs

A design is an acquisition process (link tracing plus random selection)
paired with an attrition process, run tick by tick against the live
network. All decisions within a tick are taken on the sample as it stood at
the start of the tick; members added during a tick trace from the next one.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from .world import World

logger = logging.getLogger(__name__)

BERNOULLI = "bernoulli"
ONE_LINK = "one_link"
FIXED_COUNT = "fixed_count"
TRACING_MODES = (BERNOULLI, ONE_LINK, FIXED_COUNT)

TRACE = "trace"
RANDOM = "random"
SEED = "seed"

SEED_SELECTIONS = ("uniform", "stratified")

SIZE_FACTOR_MIN = 0.01
SIZE_FACTOR_MAX = 100.0

Pair = Tuple[int, int]


@dataclass
class DesignSpec:
    """Declarative description of one acquisition/attrition design"""

    name: str = "design"
    mode: str = BERNOULLI
    count: int = 1
    trace_prob: float = 0.1
    random_prob: float = 0.0
    attrition_prob: float = 0.0
    replacement: float = 1.0
    activity_decay: float = 1.0
    target_size: Optional[int] = None
    feedback: float = 0.0
    seeds: int = 1
    start_step: int = 0
    attrition_feedback: float = 0.0
    active_steps: Optional[int] = None
    seed_selection: str = "uniform"
    group_weights: Dict[int, float] = field(default_factory=dict)

    def validate(self) -> List[str]:
        prefix = f"design.{self.name}"
        problems = []
        if self.mode not in TRACING_MODES:
            problems.append(f"{prefix}.mode must be one of {TRACING_MODES}")
        if self.mode == FIXED_COUNT and self.count < 1:
            problems.append(f"{prefix}.count must be >= 1 for fixed_count tracing")
        for key in ("trace_prob", "random_prob", "attrition_prob", "replacement", "activity_decay"):
            value = getattr(self, key)
            if not (0.0 <= value <= 1.0):
                problems.append(f"{prefix}.{key} must be in [0, 1]")
        if self.target_size is not None and self.target_size < 1:
            problems.append(f"{prefix}.target_size must be >= 1 when set")
        if self.feedback < 0 or self.attrition_feedback < 0:
            problems.append(f"{prefix} feedback strengths must be >= 0")
        if self.seeds < 0:
            problems.append(f"{prefix}.seeds must be >= 0")
        if self.active_steps is not None and self.active_steps < 1:
            problems.append(f"{prefix}.active_steps must be >= 1 when set")
        if self.seed_selection not in SEED_SELECTIONS:
            problems.append(f"{prefix}.seed_selection must be one of {SEED_SELECTIONS}")
        if any(w < 0 for w in self.group_weights.values()):
            problems.append(f"{prefix}.group_weights must be >= 0")
        return problems


@dataclass
class MemberRecord:
    entered_at: int
    activity: float = 1.0
    active: bool = True


@dataclass
class SampleState:
    """
    The sample s_t

    ``replacement_values`` holds an entry for every node that has ever been
    sampled; a node without an entry has never been selected (value 1).
    """

    members: Dict[int, MemberRecord] = field(default_factory=dict)
    replacement_values: Dict[int, float] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.members)

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.members

    def member_ids(self) -> List[int]:
        return sorted(self.members)

    def replacement_value(self, node_id: int) -> float:
        return self.replacement_values.get(node_id, 1.0)

    def ever_sampled(self, node_id: int) -> bool:
        return node_id in self.replacement_values

    def add(self, node_id: int, step: int):
        self.members[node_id] = MemberRecord(entered_at=step)
        self.replacement_values.setdefault(node_id, 1.0)

    def discard(self, node_id: int) -> bool:
        return self.members.pop(node_id, None) is not None

    def forget(self, node_id: int):
        """Drop every trace of a node that left the population"""
        self.members.pop(node_id, None)
        self.replacement_values.pop(node_id, None)

    def to_dict(self) -> dict:
        return {
            "members": [[i, asdict(r)] for i, r in sorted(self.members.items())],
            "replacement_values": [[i, v] for i, v in sorted(self.replacement_values.items())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleState":
        return cls(
            members={i: MemberRecord(**r) for i, r in data["members"]},
            replacement_values={i: v for i, v in data["replacement_values"]},
        )


@dataclass
class TraceEvent:
    step: int
    origin: Optional[int]
    destination: int
    degree: int
    degree_out: int
    mode: str
    group: int
    reselection: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def size_adjustment(n: int, n_target: Optional[int], psi: float) -> float:
    """exp(-psi (n - n*) / n*), clamped to [0.01, 100]; 1 when no target is set"""
    if n_target is None or psi == 0:
        return 1.0
    factor = math.exp(-psi * (n - n_target) / n_target)
    return min(SIZE_FACTOR_MAX, max(SIZE_FACTOR_MIN, factor))


def attrition_adjustment(n: int, n_target: Optional[int], psi: float) -> float:
    """Mirror image of size_adjustment: removal speeds up above target"""
    if n_target is None or psi == 0:
        return 1.0
    factor = math.exp(psi * (n - n_target) / n_target)
    return min(SIZE_FACTOR_MAX, max(SIZE_FACTOR_MIN, factor))


def tracing_probability(spec: DesignSpec, sample: SampleState, origin: int, destination: int,
                        size: Optional[int] = None) -> float:
    """p_ij = p * activity_i * replacement_j * size_adjustment, clamped to [0, 1]"""
    record = sample.members.get(origin)
    activity = record.activity if record is not None else 0.0
    n = sample.size if size is None else size
    p = spec.trace_prob * activity * sample.replacement_value(destination) \
        * size_adjustment(n, spec.target_size, spec.feedback)
    return min(1.0, max(0.0, p))


def surface_links(sample: SampleState, world: World) -> List[Pair]:
    """Member -> nonmember links, each listed once, sorted by (member, nonmember)"""
    surface = []
    for i in sample.member_ids():
        if not world.has_node(i):
            continue
        for j in world.neighbors(i):
            if j not in sample.members:
                surface.append((i, j))
    return surface


def degree_out(world: World, node_id: int, members: Iterable[int]) -> int:
    """Number of a node's links that point outside ``members``"""
    inside = members if isinstance(members, (set, dict)) else set(members)
    return sum(1 for j in world.graph.neighbors(node_id) if j not in inside)


def _join(sample: SampleState, world: World, selections: Dict[int, Optional[int]], mode: str,
          now: int, reference: Set[int]) -> List[TraceEvent]:
    """Admit destinations (sorted) and build their TraceEvents"""
    events = []
    for dest in sorted(selections):
        events.append(TraceEvent(
            step=now,
            origin=selections[dest],
            destination=dest,
            degree=world.degree(dest),
            degree_out=degree_out(world, dest, reference),
            mode=mode,
            group=world.group(dest),
            reselection=sample.ever_sampled(dest),
        ))
    for dest in sorted(selections):
        sample.add(dest, now)
    return events


def step_bernoulli_tracing(spec: DesignSpec, sample: SampleState, world: World,
                           rng: np.random.Generator, now: int = 0) -> List[TraceEvent]:
    """
    Trace every surface link independently with its own p_ij

    A nonmember reached by several traced links joins once; its recorded
    origin is the lowest-id member that traced it.
    """
    surface = surface_links(sample, world)
    if not surface:
        return []
    n = sample.size
    p = np.array([tracing_probability(spec, sample, i, j, n) for i, j in surface], dtype=float)
    traced = rng.random(len(surface)) < p

    selections: Dict[int, int] = {}
    for (i, j), hit in zip(surface, traced.tolist()):
        if hit and (j not in selections or i < selections[j]):
            selections[j] = i
    reference = set(sample.members)
    return _join(sample, world, selections, TRACE, now, reference)


def step_one_link(spec: DesignSpec, sample: SampleState, world: World,
                  rng: np.random.Generator, now: int = 0) -> List[TraceEvent]:
    """With probability p * size factor, trace one surface link chosen by activity x replacement weight"""
    surface = surface_links(sample, world)
    if not surface:
        return []
    gate = spec.trace_prob * size_adjustment(sample.size, spec.target_size, spec.feedback)
    if rng.random() >= gate:
        return []

    weights = np.array(
        [sample.members[i].activity * sample.replacement_value(j) for i, j in surface], dtype=float
    )
    total = weights.sum()
    if total <= 0:
        return []
    origin, dest = surface[int(rng.choice(len(surface), p=weights / total))]
    reference = set(sample.members)
    return _join(sample, world, {dest: origin}, TRACE, now, reference)


def step_fixed_count(spec: DesignSpec, sample: SampleState, world: World, k: int,
                     rng: np.random.Generator, now: int = 0) -> List[TraceEvent]:
    """
    Select min(k, reachable) distinct surface destinations without replacement

    Destinations are weighted by their replacement value, so with no
    dampening the choice is uniform and value-0 nodes are never eligible.
    """
    surface = surface_links(sample, world)
    origins: Dict[int, int] = {}
    for i, j in surface:
        if sample.replacement_value(j) > 0 and (j not in origins or i < origins[j]):
            origins[j] = i
    if not origins:
        return []
    gate = spec.trace_prob * size_adjustment(sample.size, spec.target_size, spec.feedback)
    if rng.random() >= gate:
        return []

    destinations = sorted(origins)
    weights = np.array([sample.replacement_value(j) for j in destinations], dtype=float)
    take = min(k, len(destinations))
    picks = rng.choice(len(destinations), size=take, replace=False, p=weights / weights.sum())
    chosen = {destinations[int(r)]: origins[destinations[int(r)]] for r in picks}
    reference = set(sample.members)
    return _join(sample, world, chosen, TRACE, now, reference)


def step_random_selection(spec: DesignSpec, sample: SampleState, world: World,
                          rng: np.random.Generator, now: int = 0,
                          size: Optional[int] = None,
                          reference: Optional[Set[int]] = None) -> List[TraceEvent]:
    """
    Select each nonmember independently with r * replacement * group weight * size factor

    degree_out is measured against ``reference`` (the start-of-tick members
    when given), so nodes traced earlier in the same tick do not count as inside.
    """
    if spec.random_prob <= 0:
        return []
    candidates = [i for i in world.node_ids() if i not in sample.members]
    if not candidates:
        return []
    n = sample.size if size is None else size
    factor = spec.random_prob * size_adjustment(n, spec.target_size, spec.feedback)
    p = np.array([
        factor * sample.replacement_value(i) * spec.group_weights.get(world.group(i), 1.0) for i in candidates
    ], dtype=float)
    picked = rng.random(len(candidates)) < np.clip(p, 0.0, 1.0)
    selections = {i: None for i, hit in zip(candidates, picked.tolist()) if hit}
    if reference is None:
        reference = set(sample.members)
    return _join(sample, world, selections, RANDOM, now, reference)


def step_attrition(spec: DesignSpec, sample: SampleState, rng: np.random.Generator,
                   candidates: Optional[List[int]] = None, size: Optional[int] = None) -> List[int]:
    """
    Each member leaves with probability a (size-adjusted when attrition feedback is on)

    A leaver's replacement value becomes rho, dampening later reselection.
    """
    members = sample.member_ids() if candidates is None else sorted(candidates)
    if not members:
        return []
    n = sample.size if size is None else size
    a = min(1.0, spec.attrition_prob * attrition_adjustment(n, spec.target_size, spec.attrition_feedback))
    leave = rng.random(len(members)) < a
    removed = [i for i, hit in zip(members, leave.tolist()) if hit]
    for i in removed:
        sample.discard(i)
        sample.replacement_values[i] = spec.replacement
    return removed


def step_activity_decay(spec: DesignSpec, sample: SampleState, members: Optional[List[int]] = None,
                        now: Optional[int] = None):
    """Multiply activity by delta; inactive members (or those past active_steps) are pinned to 0"""
    ids = sample.member_ids() if members is None else members
    for i in ids:
        record = sample.members.get(i)
        if record is None:
            continue
        if now is not None and spec.active_steps is not None and now - record.entered_at >= spec.active_steps:
            record.active = False
        record.activity = record.activity * spec.activity_decay if record.active else 0.0


def seed_sample(spec: DesignSpec, sample: SampleState, world: World, rng: np.random.Generator,
                now: int = 0) -> List[TraceEvent]:
    """Initial selection of ``spec.seeds`` distinct nodes (uniform or stratified by group)"""
    candidates = [i for i in world.node_ids() if i not in sample.members]
    take = min(spec.seeds, len(candidates))
    if take == 0:
        return []

    if spec.seed_selection == "stratified":
        by_group: Dict[int, List[int]] = {}
        for i in candidates:
            by_group.setdefault(world.group(i), []).append(i)
        groups = sorted(by_group)
        chosen: List[int] = []
        k = 0
        while len(chosen) < take:
            pool = by_group[groups[k % len(groups)]]
            if pool:
                chosen.append(pool.pop(int(rng.integers(len(pool)))))
            k += 1
    else:
        chosen = [candidates[int(r)] for r in rng.choice(len(candidates), size=take, replace=False)]

    return _join(sample, world, {i: None for i in chosen}, SEED, now, set(sample.members))


class SamplingDesign:
    """A registered design: its spec, its live sample and its tick procedure"""

    def __init__(self, spec: DesignSpec):
        self.spec = spec
        self.sample = SampleState()
        self.seeded = False

    @property
    def name(self) -> str:
        return self.spec.name

    def on_node_removed(self, node_id: int, step: int):
        self.sample.forget(node_id)

    def acquire(self, world: World, rng: np.random.Generator, now: int) -> List[TraceEvent]:
        spec = self.spec
        if spec.mode == BERNOULLI:
            return step_bernoulli_tracing(spec, self.sample, world, rng, now)
        if spec.mode == ONE_LINK:
            return step_one_link(spec, self.sample, world, rng, now)
        return step_fixed_count(spec, self.sample, world, spec.count, rng, now)

    def step(self, world: World, rng: np.random.Generator, now: int) -> List[TraceEvent]:
        """
        One design tick

        Returns:
            TraceEvents for every node that joined this tick
        """
        if now < self.spec.start_step:
            return []
        if not self.seeded:
            self.seeded = True
            return seed_sample(self.spec, self.sample, world, rng, now)

        start_members = self.sample.member_ids()
        start_size = len(start_members)
        events = self.acquire(world, rng, now)
        events += step_random_selection(self.spec, self.sample, world, rng, now, size=start_size,
                                        reference=set(start_members))

        removed = step_attrition(self.spec, self.sample, rng, candidates=start_members, size=start_size)
        survivors = [i for i in start_members if i in self.sample.members]
        step_activity_decay(self.spec, self.sample, survivors, now)
        logger.debug(f"Design {self.name} step {now}: +{len(events)} -{len(removed)} size {self.sample.size}")
        return events

    def to_dict(self) -> dict:
        return {"seeded": self.seeded, "sample": self.sample.to_dict()}

    def load_state(self, data: dict):
        self.seeded = data["seeded"]
        self.sample = SampleState.from_dict(data["sample"])
