"""
HIV epidemic as a virus-operated sampling design

The virus' sample is the set of infected living nodes. It grows by tracing
links (transmission) and by importation, and loses members only when they
leave the population or, when a functional cure is distributed, are cured.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from .sampling_designs import SampleState, degree_out
from .world import ContractViolation, World

logger = logging.getLogger(__name__)


class Stage(str, Enum):
    SUSCEPTIBLE = "susceptible"
    ACUTE = "acute"
    CHRONIC = "chronic"
    LATE = "late"


NEXT_STAGE = {Stage.ACUTE: Stage.CHRONIC, Stage.CHRONIC: Stage.LATE}
INFECTED_STAGES = (Stage.ACUTE, Stage.CHRONIC, Stage.LATE)

# Infection event modes
TRANSMISSION = "transmission"
REINFECTION = "reinfection"
IMPORT = "import"
IMMIGRATION = "immigration"
SEED = "seed"

# The virus' sample is an ordinary design sample whose members are the infected
VirusSample = SampleState


@dataclass
class EpidemicParams:
    """Stage-structured transmission, progression and mortality (one tick = one week)"""

    enabled: bool = True
    beta_acute: float = 0.02
    beta_chronic: float = 0.002
    beta_late: float = 0.002
    acute_mean: float = 8.0
    chronic_mean: float = 520.0
    late_mean: float = 104.0
    mortality_mult_acute: float = 1.0
    mortality_mult_chronic: float = 1.0
    mortality_mult_late: float = 5.0
    import_prob: float = 1e-5
    reinfection_mult: float = 0.0
    initial_infected: int = 10
    start_step: int = 0
    group_link_mult: Dict[int, float] = field(default_factory=dict)

    def validate(self) -> List[str]:
        problems = []
        for key in ("beta_acute", "beta_chronic", "beta_late", "import_prob", "reinfection_mult"):
            if not (0.0 <= getattr(self, key) <= 1.0):
                problems.append(f"epi.{key} must be in [0, 1]")
        for key in ("acute_mean", "chronic_mean", "late_mean"):
            if getattr(self, key) < 1:
                problems.append(f"epi.{key} must be >= 1")
        for key in ("mortality_mult_acute", "mortality_mult_chronic", "mortality_mult_late"):
            if getattr(self, key) < 1:
                problems.append(f"epi.{key} must be >= 1")
        if self.initial_infected < 0:
            problems.append("epi.initial_infected must be >= 0")
        if any(m < 0 for m in self.group_link_mult.values()):
            problems.append("epi.group_link_mult values must be >= 0")
        return problems

    def beta(self, stage: Stage) -> float:
        return {
            Stage.ACUTE: self.beta_acute,
            Stage.CHRONIC: self.beta_chronic,
            Stage.LATE: self.beta_late,
        }.get(stage, 0.0)

    def exit_prob(self, stage: Stage) -> float:
        mean = {Stage.ACUTE: self.acute_mean, Stage.CHRONIC: self.chronic_mean}.get(stage)
        if mean is None or math.isinf(mean):
            return 0.0
        return 1.0 / mean

    def mortality_mult(self, stage: Stage) -> float:
        return {
            Stage.ACUTE: self.mortality_mult_acute,
            Stage.CHRONIC: self.mortality_mult_chronic,
            Stage.LATE: self.mortality_mult_late,
        }.get(stage, 1.0)


@dataclass
class InfectionRecord:
    stage: Stage
    infected_at: int
    stage_entered_at: int
    reinfections: int = 0


@dataclass
class InfectionEvent:
    step: int
    origin: Optional[int]
    destination: int
    degree: int
    degree_out: int
    mode: str
    origin_stage: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)


class EpidemicState:
    """Per-node infection records kept in lock-step with the virus sample"""

    def __init__(self):
        self.records: Dict[int, InfectionRecord] = {}
        self.virus_sample = VirusSample()
        self.seeded = False
        self.removed_infected = 0
        self.cured = 0
        self.last_infected_degree_out: Optional[float] = None

    def is_infected(self, node_id: int) -> bool:
        return node_id in self.records

    def stage(self, node_id: int) -> Stage:
        record = self.records.get(node_id)
        return record.stage if record is not None else Stage.SUSCEPTIBLE

    @property
    def prevalence(self) -> int:
        return len(self.records)

    def infected_ids(self) -> List[int]:
        return sorted(self.records)

    def stage_counts(self) -> Dict[str, int]:
        counts = {s.value: 0 for s in INFECTED_STAGES}
        for record in self.records.values():
            counts[record.stage.value] += 1
        return counts

    def infect(self, node_id: int, now: int):
        self.records[node_id] = InfectionRecord(stage=Stage.ACUTE, infected_at=now, stage_entered_at=now)
        self.virus_sample.add(node_id, now)

    def cure(self, node_id: int) -> bool:
        """Direct removal from the virus sample; the node becomes susceptible again"""
        if self.records.pop(node_id, None) is None:
            return False
        self.virus_sample.discard(node_id)
        self.cured += 1
        return True

    def on_node_removed(self, node_id: int, step: int):
        if self.records.pop(node_id, None) is not None:
            self.removed_infected += 1
        self.virus_sample.forget(node_id)

    def check_invariants(self, world: World):
        if set(self.records) != set(self.virus_sample.members):
            raise ContractViolation("Virus sample membership differs from the infected set")
        missing = [i for i in self.records if not world.has_node(i)]
        if missing:
            raise ContractViolation(f"Infected records for removed nodes: {missing[:5]}")

    def to_dict(self) -> dict:
        return {
            "records": [
                [i, {"stage": r.stage.value, "infected_at": r.infected_at,
                     "stage_entered_at": r.stage_entered_at, "reinfections": r.reinfections}]
                for i, r in sorted(self.records.items())
            ],
            "virus_sample": self.virus_sample.to_dict(),
            "seeded": self.seeded,
            "removed_infected": self.removed_infected,
            "cured": self.cured,
            "last_infected_degree_out": self.last_infected_degree_out,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EpidemicState":
        state = cls()
        state.records = {
            i: InfectionRecord(stage=Stage(r["stage"]), infected_at=r["infected_at"],
                               stage_entered_at=r["stage_entered_at"], reinfections=r["reinfections"])
            for i, r in data["records"]
        }
        state.virus_sample = VirusSample.from_dict(data["virus_sample"])
        state.seeded = data["seeded"]
        state.removed_infected = data["removed_infected"]
        state.cured = data["cured"]
        state.last_infected_degree_out = data["last_infected_degree_out"]
        return state


# node id -> object with out_mult / in_mult attributes
EffectLookup = Callable[[int], object]


def transmission_probability(params: EpidemicParams, origin_stage: Stage, out_mult: float = 1.0,
                             in_mult: float = 1.0, dest_infected: bool = False,
                             link_mult: float = 1.0) -> float:
    """beta(stage) * out * in * (reinfection_mult if already infected) * link multiplier, clamped to 1"""
    p = params.beta(origin_stage) * out_mult * in_mult * link_mult
    if dest_infected:
        p *= params.reinfection_mult
    return min(1.0, max(0.0, p))


def _link_mult(world: World, params: EpidemicParams, i: int, j: int) -> float:
    if not params.group_link_mult:
        return 1.0
    return max(params.group_link_mult.get(world.group(i), 1.0), params.group_link_mult.get(world.group(j), 1.0))


def step_transmission(world: World, epi: EpidemicState, params: EpidemicParams,
                      rng: np.random.Generator, now: int,
                      effects: Optional[EffectLookup] = None) -> List[InfectionEvent]:
    """
    Fire every infected -> susceptible exposure independently

    Exposures are visited in sorted link order. A susceptible exposed several
    times joins once (origin = lowest-id firing origin). With reinfection
    enabled, infected-infected links expose both ways and a hit is recorded
    as a reinfection without any stage change.
    """
    infected = set(epi.records)
    if not infected:
        epi.last_infected_degree_out = None
        return []
    epi.last_infected_degree_out = float(np.mean([degree_out(world, i, infected) for i in sorted(infected)]))

    exposures: List[Tuple[int, int, bool]] = []
    for i, j in world.links():
        inf_i, inf_j = i in infected, j in infected
        if inf_i and not inf_j:
            exposures.append((i, j, False))
        elif inf_j and not inf_i:
            exposures.append((j, i, False))
        elif inf_i and inf_j and params.reinfection_mult > 0:
            exposures.append((i, j, True))
            exposures.append((j, i, True))
    if not exposures:
        return []

    p = np.empty(len(exposures), dtype=float)
    for k, (origin, dest, both) in enumerate(exposures):
        out_mult = effects(origin).out_mult if effects else 1.0
        in_mult = effects(dest).in_mult if effects else 1.0
        p[k] = transmission_probability(params, epi.records[origin].stage, out_mult, in_mult,
                                        both, _link_mult(world, params, origin, dest))
    fired = rng.random(len(exposures)) < p

    new: Dict[int, int] = {}
    again: Dict[int, int] = {}
    for (origin, dest, both), hit in zip(exposures, fired.tolist()):
        if not hit:
            continue
        target = again if both else new
        if dest not in target or origin < target[dest]:
            target[dest] = origin

    events = []
    for dest in sorted(new):
        origin = new[dest]
        events.append(InfectionEvent(step=now, origin=origin, destination=dest, degree=world.degree(dest),
                                     degree_out=degree_out(world, dest, infected), mode=TRANSMISSION,
                                     origin_stage=epi.records[origin].stage.value))
    for dest in sorted(again):
        origin = again[dest]
        epi.records[dest].reinfections += 1
        events.append(InfectionEvent(step=now, origin=origin, destination=dest, degree=world.degree(dest),
                                     degree_out=degree_out(world, dest, infected), mode=REINFECTION,
                                     origin_stage=epi.records[origin].stage.value))
    for dest in sorted(new):
        epi.infect(dest, now)
    logger.debug(f"Step {now}: {len(exposures)} exposures, {len(new)} infections, {len(again)} reinfections")
    return events


def step_progression(epi: EpidemicState, params: EpidemicParams, rng: np.random.Generator,
                     now: int) -> List[Tuple[int, str, str]]:
    """
    Geometric stage exits: acute -> chronic -> late

    Nodes that entered their stage this tick wait until the next one, so
    dwell times are at least one tick and average the configured mean.
    """
    movable = [i for i in epi.infected_ids()
               if epi.records[i].stage in NEXT_STAGE and epi.records[i].stage_entered_at < now]
    if not movable:
        return []
    p = np.array([params.exit_prob(epi.records[i].stage) for i in movable], dtype=float)
    advance = rng.random(len(movable)) < p

    transitions = []
    for i, hit in zip(movable, advance.tolist()):
        if hit:
            record = epi.records[i]
            old = record.stage
            record.stage = NEXT_STAGE[old]
            record.stage_entered_at = now
            transitions.append((i, old.value, record.stage.value))
    return transitions


def step_importation(world: World, epi: EpidemicState, params: EpidemicParams, rng: np.random.Generator,
                     now: int, entrants: Iterable[int] = ()) -> List[InfectionEvent]:
    """
    Infections from outside the network

    Resident susceptibles return infected with probability import_prob; this
    tick's newcomers arrive infected with the same probability.
    """
    entering = set(entrants)
    residents = [i for i in world.node_ids() if i not in epi.records and i not in entering]
    newcomers = [i for i in sorted(entering) if world.has_node(i) and i not in epi.records]
    if params.import_prob <= 0:
        return []

    infected = set(epi.records)
    hits: List[Tuple[int, str]] = []
    for group, mode in ((residents, IMPORT), (newcomers, IMMIGRATION)):
        if group:
            draws = rng.random(len(group)) < params.import_prob
            hits.extend((i, mode) for i, hit in zip(group, draws.tolist()) if hit)

    events = [
        InfectionEvent(step=now, origin=None, destination=i, degree=world.degree(i),
                       degree_out=degree_out(world, i, infected), mode=mode)
        for i, mode in hits
    ]
    for i, _ in hits:
        epi.infect(i, now)
    return events


def seed_infections(world: World, epi: EpidemicState, params: EpidemicParams, rng: np.random.Generator,
                    now: int) -> List[InfectionEvent]:
    """Infect ``initial_infected`` susceptibles chosen uniformly"""
    epi.seeded = True
    susceptible = [i for i in world.node_ids() if i not in epi.records]
    take = min(params.initial_infected, len(susceptible))
    if take == 0:
        return []
    chosen = sorted(susceptible[int(r)] for r in rng.choice(len(susceptible), size=take, replace=False))
    infected = set(epi.records)
    events = [
        InfectionEvent(step=now, origin=None, destination=i, degree=world.degree(i),
                       degree_out=degree_out(world, i, infected), mode=SEED)
        for i in chosen
    ]
    for i in chosen:
        epi.infect(i, now)
    return events


def stage_mortality_multiplier(node_id: int, epi: EpidemicState, params: EpidemicParams) -> float:
    """Death-hazard multiplier of a node's stage (1 for susceptibles)"""
    return params.mortality_mult(epi.stage(node_id))
