"""
Tests for epidemic module
"""

import math

import numpy as np
import pytest

from src.demography import DemographyParams, step_deaths
from src.epidemic import (
    IMMIGRATION,
    IMPORT,
    REINFECTION,
    TRANSMISSION,
    EpidemicParams,
    EpidemicState,
    Stage,
    seed_infections,
    stage_mortality_multiplier,
    step_importation,
    step_progression,
    step_transmission,
    transmission_probability,
)
from src.world import ContractViolation

HERE = (0.5, 0.5)


def infected_state(*ids, now=0):
    epi = EpidemicState()
    for i in ids:
        epi.infect(i, now)
    return epi


class TestTransmissionProbability:
    """Test the per-link transmission probability"""

    def test_zero_beta(self):
        params = EpidemicParams(beta_acute=0.0)
        assert transmission_probability(params, Stage.ACUTE) == 0.0

    def test_passthrough(self):
        """Acute origin without effects -> beta_acute"""
        assert transmission_probability(EpidemicParams(beta_acute=0.02), Stage.ACUTE) == pytest.approx(0.02)

    def test_treated_chronic(self):
        """0.002 with ART out-multiplier 0.1 -> 0.0002"""
        p = transmission_probability(EpidemicParams(beta_chronic=0.002), Stage.CHRONIC, out_mult=0.1)
        assert p == pytest.approx(0.0002)

    def test_reinfection_factor(self):
        """Infected destinations are scaled by reinfection_mult"""
        params = EpidemicParams(beta_acute=0.5, reinfection_mult=0.2)
        assert transmission_probability(params, Stage.ACUTE, dest_infected=True) == pytest.approx(0.1)

    def test_susceptible_origin(self):
        assert transmission_probability(EpidemicParams(), Stage.SUSCEPTIBLE) == 0.0


class TestStepTransmission:
    """Test the virus' link tracing"""

    @pytest.fixture
    def pair(self, make_world):
        return make_world([(0, "F", HERE), (0, "M", HERE)], links=[(0, 1)])

    def test_no_infected(self, pair, rng):
        assert step_transmission(pair, EpidemicState(), EpidemicParams(), rng, now=0) == []

    def test_certain_infection(self, pair, rng):
        """One discordant link at beta = 1"""
        epi = infected_state(0)
        events = step_transmission(pair, epi, EpidemicParams(beta_acute=1.0), rng, now=3)
        assert [(e.origin, e.destination, e.mode) for e in events] == [(0, 1, TRANSMISSION)]
        assert epi.stage(1) == Stage.ACUTE
        assert epi.records[1].stage_entered_at == 3
        assert events[0].degree == 1
        assert events[0].degree_out == 0
        epi.check_invariants(pair)

    def test_two_exposures(self, make_world):
        """Susceptible between two acute neighbors, beta 0.1 -> 0.19"""
        world = make_world([(0, "F", HERE), (0, "M", HERE), (0, "F", HERE)], links=[(0, 1), (1, 2)])
        params = EpidemicParams(beta_acute=0.1)
        rng = np.random.default_rng(41)
        trials = 100_000
        hits = 0
        for _ in range(trials):
            epi = infected_state(0, 2)
            events = step_transmission(world, epi, params, rng, now=1)
            assert len(events) <= 1
            hits += bool(events)
        se = math.sqrt(0.19 * 0.81 / trials)
        assert abs(hits / trials - 0.19) < 4 * se

    def test_lowest_origin(self, make_world, rng):
        """Both neighbors fire; the lower id is the origin"""
        world = make_world([(0, "F", HERE), (0, "M", HERE), (0, "F", HERE)], links=[(0, 1), (1, 2)])
        events = step_transmission(world, infected_state(0, 2), EpidemicParams(beta_acute=1.0), rng, now=1)
        assert [(e.origin, e.destination) for e in events] == [(0, 1)]

    def test_reinfection(self, pair, rng):
        """Infected-infected links expose both ways without changing stage"""
        epi = infected_state(0, 1)
        events = step_transmission(pair, epi, EpidemicParams(beta_acute=1.0, reinfection_mult=1.0), rng, now=2)
        assert sorted(e.destination for e in events) == [0, 1]
        assert {e.mode for e in events} == {REINFECTION}
        assert epi.records[0].reinfections == 1
        assert epi.prevalence == 2

    def test_effects(self, pair, rng):
        """A zero out-multiplier on the origin blocks transmission"""

        class Blocked:
            out_mult = 0.0
            in_mult = 1.0

        epi = infected_state(0)
        events = step_transmission(pair, epi, EpidemicParams(beta_acute=1.0), rng, now=1,
                                   effects=lambda node: Blocked)
        assert events == []

    def test_group_link_multiplier(self, make_world, rng):
        """A zero group multiplier shuts transmission inside that group"""
        world = make_world([(0, "F", HERE), (0, "M", HERE)], links=[(0, 1)])
        params = EpidemicParams(beta_acute=1.0, group_link_mult={0: 0.0})
        assert step_transmission(world, infected_state(0), params, rng, now=1) == []


class TestProgression:
    """Test stage progression"""

    def test_infinite_acute(self, rng):
        """Exit probability 0 keeps everyone acute"""
        epi = infected_state(*range(50))
        params = EpidemicParams(acute_mean=math.inf)
        for now in range(1, 100):
            assert step_progression(epi, params, rng, now) == []
        assert epi.stage_counts()["acute"] == 50

    def test_acute_mean_dwell(self):
        """Mean acute dwell over 10^4 nodes is within 3% of 8"""
        rng = np.random.default_rng(43)
        epi = infected_state(*range(10_000))
        params = EpidemicParams(acute_mean=8.0, chronic_mean=math.inf)
        dwell = {}
        now = 0
        while len(dwell) < 10_000:
            now += 1
            for node, old, new in step_progression(epi, params, rng, now):
                assert (old, new) == ("acute", "chronic")
                dwell[node] = now
        assert np.mean(list(dwell.values())) == pytest.approx(8.0, rel=0.03)

    def test_late_is_absorbing(self, rng):
        """Late nodes never move on"""
        epi = infected_state(0)
        epi.records[0].stage = Stage.LATE
        assert step_progression(epi, EpidemicParams(), rng, 5) == []

    def test_susceptibles_never_progress(self, rng):
        """Only infected nodes carry a stage"""
        epi = EpidemicState()
        assert step_progression(epi, EpidemicParams(acute_mean=1.0), rng, 1) == []
        assert epi.stage(3) == Stage.SUSCEPTIBLE


class TestImportation:
    """Test infections from outside the region"""

    @pytest.fixture
    def crowd(self, make_world):
        return make_world([(0, "F", HERE) for _ in range(20)])

    def test_zero_prob(self, crowd, rng):
        assert step_importation(crowd, EpidemicState(), EpidemicParams(import_prob=0.0), rng, now=0) == []

    def test_certain_import(self, crowd, rng):
        """Every susceptible comes back infected"""
        epi = infected_state(0)
        events = step_importation(crowd, epi, EpidemicParams(import_prob=1.0), rng, now=0, entrants=[19])
        assert epi.prevalence == 20
        modes = {e.destination: e.mode for e in events}
        assert modes[19] == IMMIGRATION
        assert modes[5] == IMPORT
        assert 0 not in modes

    def test_binomial_mean(self, make_world):
        """1e-4 over 10^4 susceptibles averages one import per step"""
        world = make_world([(0, "F", HERE) for _ in range(10_000)])
        params = EpidemicParams(import_prob=1e-4)
        rng = np.random.default_rng(47)
        steps = 2_000
        total = 0
        for _ in range(steps):
            total += len(step_importation(world, EpidemicState(), params, rng, now=0))
        se = math.sqrt(10_000 * 1e-4 * (1 - 1e-4) / steps)
        assert abs(total / steps - 1.0) < 4 * se


class TestSeedingAndMortality:
    """Test initial infections and stage mortality"""

    def test_seed_count(self, make_world, rng):
        world = make_world([(0, "F", HERE) for _ in range(30)])
        epi = EpidemicState()
        events = seed_infections(world, epi, EpidemicParams(initial_infected=10), rng, now=0)
        assert len(events) == 10
        assert epi.prevalence == 10
        assert epi.seeded

    def test_susceptible_multiplier(self):
        assert stage_mortality_multiplier(4, EpidemicState(), EpidemicParams()) == 1.0

    def test_late_hazard(self):
        """late, mult 20, mu 0.0005 -> 0.01"""
        epi = infected_state(0)
        epi.records[0].stage = Stage.LATE
        params = EpidemicParams(mortality_mult_late=20.0)
        assert 0.0005 * stage_mortality_multiplier(0, epi, params) == pytest.approx(0.01)

    def test_treated_late_hazard(self):
        """Late mult 20 with a treatment mortality effect 0.25 -> 5x baseline"""
        epi = infected_state(0)
        epi.records[0].stage = Stage.LATE
        params = EpidemicParams(mortality_mult_late=20.0)
        assert stage_mortality_multiplier(0, epi, params) * 0.25 == pytest.approx(5.0)

    def test_deaths_use_stage_mortality(self, make_world, rng):
        """Late-stage hazard reaches step_deaths"""
        world = make_world([(0, "F", HERE), (0, "M", HERE)])
        epi = infected_state(0)
        epi.records[0].stage = Stage.LATE
        world.add_removal_hook(epi.on_node_removed)
        params = EpidemicParams(mortality_mult_late=2.0)
        removed = step_deaths(world, DemographyParams(death_hazard=0.5), rng,
                              mortality_multiplier=lambda i: stage_mortality_multiplier(i, epi, params))
        assert (0, "death") in removed
        assert epi.removed_infected == 1
        assert epi.prevalence == 0


class TestEpidemicState:
    """Test state bookkeeping"""

    def test_cure(self):
        epi = infected_state(1, 2)
        assert epi.cure(1)
        assert not epi.cure(1)
        assert epi.infected_ids() == [2]
        assert epi.cured == 1
        assert 1 not in epi.virus_sample

    def test_invariants_catch_drift(self, make_world):
        world = make_world([(0, "F", HERE)])
        epi = infected_state(0)
        epi.virus_sample.discard(0)
        with pytest.raises(ContractViolation):
            epi.check_invariants(world)

    def test_round_trip(self):
        epi = infected_state(1, 2, now=4)
        epi.records[2].stage = Stage.CHRONIC
        epi.removed_infected = 3
        assert EpidemicState.from_dict(epi.to_dict()).to_dict() == epi.to_dict()

    def test_validate(self):
        assert EpidemicParams().validate() == []
        assert len(EpidemicParams(beta_acute=2.0, acute_mean=0.5).validate()) == 2
