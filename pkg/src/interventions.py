"""
Intervention distribution as a sampling design (seek and treat) and the
effects enrollment has on transmission, mortality and link dynamics
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from .epidemic import EpidemicState
from .sampling_designs import DesignSpec, SampleState, degree_out, step_activity_decay
from .world import World

logger = logging.getLogger(__name__)

POSITIVE = "positive"
NEGATIVE = "negative"

# Enrollment routes
RANDOM_TEST = "random"
CONTACT_TRACE = "trace"
RETEST = "retest"


@dataclass
class EffectSet:
    """What enrollment does; out/mortality act on positives, in-mults on negatives, behaviour on both"""

    art_out_mult: float = 1.0
    art_mortality_mult: float = 1.0
    prevention_in_mult: float = 1.0
    vaccine_in_mult: float = 1.0
    behavior_duration_mult: float = 1.0
    behavior_formation_mult: float = 1.0
    cure_prob: float = 0.0

    def validate(self) -> List[str]:
        problems = []
        for key in ("art_out_mult", "prevention_in_mult", "vaccine_in_mult", "behavior_formation_mult", "cure_prob"):
            if not (0.0 <= getattr(self, key) <= 1.0):
                problems.append(f"intervention.{key} must be in [0, 1]")
        if not (0.0 < self.art_mortality_mult <= 1.0):
            problems.append("intervention.art_mortality_mult must be in (0, 1]")
        if self.behavior_duration_mult < 1.0:
            problems.append("intervention.behavior_duration_mult must be >= 1")
        return problems


@dataclass
class InterventionSpec:
    enabled: bool = False
    random_test_prob: float = 0.0
    trace_prob: float = 0.0
    sensitivity: float = 1.0
    dropout_prob: float = 0.0
    retest_prob: float = 0.0
    activity_decay: float = 1.0
    start_step: int = 0
    effects: EffectSet = field(default_factory=EffectSet)

    def validate(self) -> List[str]:
        problems = []
        for key in ("random_test_prob", "trace_prob", "sensitivity", "dropout_prob", "retest_prob", "activity_decay"):
            if not (0.0 <= getattr(self, key) <= 1.0):
                problems.append(f"intervention.{key} must be in [0, 1]")
        return problems + self.effects.validate()

    def as_design_spec(self) -> DesignSpec:
        """The seek-and-treat program expressed in generic design terms"""
        return DesignSpec(
            name="intervention",
            trace_prob=self.trace_prob,
            random_prob=self.random_test_prob,
            attrition_prob=self.dropout_prob,
            replacement=1.0,
            activity_decay=self.activity_decay,
        )


class Multipliers(NamedTuple):
    out_mult: float = 1.0
    in_mult: float = 1.0
    mortality_mult: float = 1.0
    duration_mult: float = 1.0
    formation_mult: float = 1.0


NEUTRAL = Multipliers()


@dataclass
class Enrollment:
    enrolled_at: int
    known_status: str
    tested_at: int


@dataclass
class EnrollmentEvent:
    step: int
    node: int
    status: str
    route: str
    origin: Optional[int]
    infected: bool
    degree: int
    degree_out: int

    def to_dict(self) -> dict:
        return asdict(self)


class TreatmentState:
    """Enrolled individuals; ``sample`` is the program's design sample (members = enrolled)"""

    def __init__(self):
        self.enrollments: Dict[int, Enrollment] = {}
        self.sample = SampleState()
        self.tests = 0

    def is_enrolled(self, node_id: int) -> bool:
        return node_id in self.enrollments

    def status(self, node_id: int) -> Optional[str]:
        record = self.enrollments.get(node_id)
        return record.known_status if record is not None else None

    def known_positives(self) -> List[int]:
        return sorted(i for i, e in self.enrollments.items() if e.known_status == POSITIVE)

    def enroll(self, node_id: int, status: str, now: int):
        self.enrollments[node_id] = Enrollment(enrolled_at=now, known_status=status, tested_at=now)
        self.sample.add(node_id, now)

    def unenroll(self, node_id: int) -> bool:
        if self.enrollments.pop(node_id, None) is None:
            return False
        self.sample.discard(node_id)
        return True

    def on_node_removed(self, node_id: int, step: int):
        self.enrollments.pop(node_id, None)
        self.sample.forget(node_id)

    def counts(self) -> Dict[str, int]:
        counts = {POSITIVE: 0, NEGATIVE: 0}
        for e in self.enrollments.values():
            counts[e.known_status] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "enrollments": [[i, asdict(e)] for i, e in sorted(self.enrollments.items())],
            "sample": self.sample.to_dict(),
            "tests": self.tests,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TreatmentState":
        state = cls()
        state.enrollments = {i: Enrollment(**e) for i, e in data["enrollments"]}
        state.sample = SampleState.from_dict(data["sample"])
        state.tests = data["tests"]
        return state


def effect_multipliers(node_id: int, treat_state: TreatmentState, effects: EffectSet) -> Multipliers:
    """Multipliers from the node's enrollment; all 1 when not enrolled"""
    status = treat_state.status(node_id)
    if status is None:
        return NEUTRAL
    if status == POSITIVE:
        return Multipliers(
            out_mult=effects.art_out_mult,
            in_mult=1.0,
            mortality_mult=effects.art_mortality_mult,
            duration_mult=effects.behavior_duration_mult,
            formation_mult=effects.behavior_formation_mult,
        )
    return Multipliers(
        out_mult=1.0,
        in_mult=effects.prevention_in_mult * effects.vaccine_in_mult,
        mortality_mult=1.0,
        duration_mult=effects.behavior_duration_mult,
        formation_mult=effects.behavior_formation_mult,
    )


def _test(node_id: int, epi: EpidemicState, spec: InterventionSpec, rng: np.random.Generator) -> str:
    """Perfect specificity; infected nodes test positive with probability ``sensitivity``"""
    if not epi.is_infected(node_id):
        return NEGATIVE
    return POSITIVE if rng.random() < spec.sensitivity else NEGATIVE


def step_seek_and_treat(spec: InterventionSpec, treat_state: TreatmentState, world: World,
                        epi: EpidemicState, rng: np.random.Generator, now: int = 0) -> List[EnrollmentEvent]:
    """
    Test at random, trace contacts of known positives, test everyone reached, enroll

    Args:
        spec: Program parameters
        treat_state: Enrollment register, updated in place
        world: Current network
        epi: True infection status (read only)
        rng: The intervention stream
        now: Current tick

    Returns:
        One event per new enrollment (and per positive re-test)
    """
    unenrolled = [i for i in world.node_ids() if i not in treat_state.enrollments]
    reached: Dict[int, Optional[int]] = {}

    if spec.random_test_prob > 0 and unenrolled:
        draws = rng.random(len(unenrolled)) < spec.random_test_prob
        reached.update((i, None) for i, hit in zip(unenrolled, draws.tolist()) if hit)

    if spec.trace_prob > 0:
        links = []
        for origin in treat_state.known_positives():
            if not world.has_node(origin):
                continue
            activity = treat_state.sample.members[origin].activity
            for j in world.neighbors(origin):
                if j not in treat_state.enrollments:
                    links.append((origin, j, spec.trace_prob * activity))
        if links:
            draws = rng.random(len(links)) < np.array([p for _, _, p in links])
            for (origin, j, _), hit in zip(links, draws.tolist()):
                # origins arrive in ascending order, so the first hit is the lowest id
                if hit and j not in reached:
                    reached[j] = origin

    reference = set(treat_state.enrollments)
    events = []
    for node_id in sorted(reached):
        status = _test(node_id, epi, spec, rng)
        treat_state.tests += 1
        events.append(EnrollmentEvent(
            step=now, node=node_id, status=status,
            route=CONTACT_TRACE if reached[node_id] is not None else RANDOM_TEST,
            origin=reached[node_id], infected=epi.is_infected(node_id),
            degree=world.degree(node_id), degree_out=degree_out(world, node_id, reference),
        ))
    for event in events:
        treat_state.enroll(event.node, event.status, now)

    if spec.retest_prob > 0:
        negatives = sorted(i for i, e in treat_state.enrollments.items()
                           if e.known_status == NEGATIVE and e.enrolled_at < now)
        if negatives:
            draws = rng.random(len(negatives)) < spec.retest_prob
            for node_id, hit in zip(negatives, draws.tolist()):
                if not hit:
                    continue
                treat_state.tests += 1
                enrollment = treat_state.enrollments[node_id]
                enrollment.tested_at = now
                if _test(node_id, epi, spec, rng) == POSITIVE:
                    enrollment.known_status = POSITIVE
                    events.append(EnrollmentEvent(
                        step=now, node=node_id, status=POSITIVE, route=RETEST, origin=None, infected=True,
                        degree=world.degree(node_id), degree_out=degree_out(world, node_id, reference),
                    ))
    return events


def step_dropout(spec: InterventionSpec, treat_state: TreatmentState, rng: np.random.Generator,
                 candidates: Optional[List[int]] = None) -> List[int]:
    """Each enrollee independently leaves the program; its multipliers revert to 1"""
    enrolled = sorted(treat_state.enrollments) if candidates is None else sorted(candidates)
    if not enrolled or spec.dropout_prob <= 0:
        return []
    leave = rng.random(len(enrolled)) < spec.dropout_prob
    removed = [i for i, hit in zip(enrolled, leave.tolist()) if hit]
    for i in removed:
        treat_state.unenroll(i)
    return removed


def step_cure(spec: InterventionSpec, treat_state: TreatmentState, epi: EpidemicState,
              rng: np.random.Generator) -> List[int]:
    """Functional cure of enrolled, infected, known positives; they become susceptible and known-negative"""
    cure_prob = spec.effects.cure_prob
    eligible = [i for i in treat_state.known_positives() if epi.is_infected(i)]
    if not eligible or cure_prob <= 0:
        return []
    hits = rng.random(len(eligible)) < cure_prob
    cured = [i for i, hit in zip(eligible, hits.tolist()) if hit]
    for i in cured:
        epi.cure(i)
        treat_state.enrollments[i].known_status = NEGATIVE
    return cured


class InterventionProgram:
    """Seek-and-treat program state plus its per-tick procedure"""

    def __init__(self, spec: InterventionSpec):
        self.spec = spec
        self.state = TreatmentState()
        self.design = spec.as_design_spec()

    def on_node_removed(self, node_id: int, step: int):
        self.state.on_node_removed(node_id, step)

    def multipliers(self, node_id: int) -> Multipliers:
        return effect_multipliers(node_id, self.state, self.spec.effects)

    def enrolled_multipliers(self) -> Dict[int, Multipliers]:
        return {i: self.multipliers(i) for i in sorted(self.state.enrollments)}

    def active(self, now: int) -> bool:
        return self.spec.enabled and now >= self.spec.start_step

    def step(self, world: World, epi: EpidemicState, rng: np.random.Generator, now: int) -> dict:
        """Seek/treat, then dropout and cure over the enrollees present at the start of the tick"""
        if not self.active(now):
            return {"events": [], "dropouts": [], "cured": []}
        start_enrolled = sorted(self.state.enrollments)
        events = step_seek_and_treat(self.spec, self.state, world, epi, rng, now)
        dropouts = step_dropout(self.spec, self.state, rng, candidates=start_enrolled)
        cured = step_cure(self.spec, self.state, epi, rng)
        survivors = [i for i in start_enrolled if i in self.state.enrollments]
        step_activity_decay(self.design, self.state.sample, survivors, now)
        logger.debug(f"Step {now}: {len(events)} enrolled, {len(dropouts)} dropped out, {len(cured)} cured")
        return {"events": events, "dropouts": dropouts, "cured": cured}
