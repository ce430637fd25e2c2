"""
Tests for interventions module
"""

import math

import numpy as np
import pytest

from src.epidemic import EpidemicParams, EpidemicState, Stage, transmission_probability
from src.interventions import (
    CONTACT_TRACE,
    NEGATIVE,
    NEUTRAL,
    POSITIVE,
    RANDOM_TEST,
    RETEST,
    EffectSet,
    InterventionProgram,
    InterventionSpec,
    TreatmentState,
    effect_multipliers,
    step_cure,
    step_dropout,
    step_seek_and_treat,
)
from src.metrics import geometry

HERE = (0.5, 0.5)


def enrolled(*pairs):
    state = TreatmentState()
    for node, status in pairs:
        state.enroll(node, status, 0)
    return state


def infected(*ids):
    epi = EpidemicState()
    for i in ids:
        epi.infect(i, 0)
    return epi


@pytest.fixture
def star(make_world):
    """Known positive 0 with neighbors 1 (infected), 2 and 3"""
    nodes = [(0, "F", HERE)] + [(0, "M", HERE) for _ in range(3)]
    return make_world(nodes, links=[(0, 1), (0, 2), (0, 3)])


class TestSeekAndTreat:
    """Test testing, tracing and enrollment"""

    def test_nothing_to_do(self, star, rng):
        """No random testing and no known positives"""
        spec = InterventionSpec(enabled=True, trace_prob=1.0)
        assert step_seek_and_treat(spec, TreatmentState(), star, infected(1), rng) == []

    def test_trace_all_neighbors(self, star, rng):
        """Known positive, trace_prob 1, sensitivity 1 -> all three enrolled truthfully"""
        spec = InterventionSpec(enabled=True, trace_prob=1.0, sensitivity=1.0)
        state = enrolled((0, POSITIVE))
        epi = infected(0, 1)
        events = step_seek_and_treat(spec, state, star, epi, rng, now=5)
        assert [(e.node, e.status, e.route, e.origin) for e in events] == [
            (1, POSITIVE, CONTACT_TRACE, 0),
            (2, NEGATIVE, CONTACT_TRACE, 0),
            (3, NEGATIVE, CONTACT_TRACE, 0),
        ]
        assert state.counts() == {POSITIVE: 2, NEGATIVE: 2}
        assert state.tests == 3
        assert state.sample.member_ids() == [0, 1, 2, 3]

    def test_random_testing(self, star, rng):
        """random_test_prob 1 tests every unenrolled node"""
        spec = InterventionSpec(enabled=True, random_test_prob=1.0)
        events = step_seek_and_treat(spec, TreatmentState(), star, infected(2), rng)
        assert [e.route for e in events] == [RANDOM_TEST] * 4
        assert {e.node: e.status for e in events}[2] == POSITIVE

    def test_sensitivity(self, make_world):
        """Sensitivity 0.8 classifies infected testers positive 80% of the time"""
        world = make_world([(0, "F", HERE) for _ in range(100)])
        epi = infected(*range(100))
        spec = InterventionSpec(enabled=True, random_test_prob=1.0, sensitivity=0.8)
        rng = np.random.default_rng(53)
        positives = 0
        tests = 0
        for _ in range(100):
            for event in step_seek_and_treat(spec, TreatmentState(), world, epi, rng):
                positives += event.status == POSITIVE
                tests += 1
        assert tests == 10_000
        se = math.sqrt(0.8 * 0.2 / tests)
        assert abs(positives / tests - 0.8) < 4 * se

    def test_retest(self, star, rng):
        """A missed infection can be found on re-test"""
        spec = InterventionSpec(enabled=True, retest_prob=1.0)
        state = enrolled((1, NEGATIVE))
        events = step_seek_and_treat(spec, state, star, infected(1), rng, now=3)
        assert [(e.node, e.route) for e in events] == [(1, RETEST)]
        assert state.status(1) == POSITIVE


class TestEffectMultipliers:
    """Test effect plumbing"""

    def test_unenrolled(self):
        assert effect_multipliers(4, TreatmentState(), EffectSet(art_out_mult=0.0)) == NEUTRAL

    def test_art_blocks_transmission(self, star, rng):
        """art_out_mult 0 means an enrolled positive never transmits"""
        state = enrolled((0, POSITIVE))
        effects = EffectSet(art_out_mult=0.0, art_mortality_mult=0.5)
        mult = effect_multipliers(0, state, effects)
        assert mult.out_mult == 0.0
        assert mult.mortality_mult == 0.5
        params = EpidemicParams(beta_acute=1.0)
        assert transmission_probability(params, Stage.ACUTE, out_mult=mult.out_mult) == 0.0

    def test_negative_product(self):
        """prevention 0.5 x vaccine 0.5 -> in_mult 0.25"""
        state = enrolled((3, NEGATIVE))
        mult = effect_multipliers(3, state, EffectSet(prevention_in_mult=0.5, vaccine_in_mult=0.5))
        assert mult.in_mult == pytest.approx(0.25)
        assert mult.out_mult == 1.0

    def test_dropout_reverts_exactly(self):
        """After dropout the node's multipliers are the unenrolled ones"""
        state = enrolled((0, POSITIVE))
        spec = InterventionSpec(enabled=True, dropout_prob=1.0, effects=EffectSet(art_out_mult=0.1))
        step_dropout(spec, state, np.random.default_rng(0))
        assert effect_multipliers(0, state, spec.effects) == NEUTRAL


class TestDropoutAndCure:
    """Test program attrition and functional cure"""

    def test_no_dropout(self, rng):
        state = enrolled((1, POSITIVE), (2, NEGATIVE))
        assert step_dropout(InterventionSpec(dropout_prob=0.0), state, rng) == []

    def test_full_dropout(self, rng):
        state = enrolled((1, POSITIVE), (2, NEGATIVE))
        assert step_dropout(InterventionSpec(dropout_prob=1.0), state, rng) == [1, 2]
        assert state.sample.size == 0

    def test_dropout_frequency(self):
        """0.05 over 10^5 enrollee-steps"""
        rng = np.random.default_rng(59)
        spec = InterventionSpec(dropout_prob=0.05)
        left = 0
        for _ in range(1000):
            state = enrolled(*[(i, NEGATIVE) for i in range(100)])
            left += len(step_dropout(spec, state, rng))
        se = math.sqrt(0.05 * 0.95 / 100_000)
        assert abs(left / 100_000 - 0.05) < 4 * se

    def test_no_cure(self, rng):
        state = enrolled((1, POSITIVE))
        assert step_cure(InterventionSpec(), state, infected(1), rng) == []

    def test_certain_cure(self, rng):
        """cure_prob 1 clears every enrolled positive"""
        state = enrolled((1, POSITIVE), (2, POSITIVE), (3, NEGATIVE))
        epi = infected(1, 2, 3)
        spec = InterventionSpec(effects=EffectSet(cure_prob=1.0))
        assert step_cure(spec, state, epi, rng) == [1, 2]
        assert epi.infected_ids() == [3]
        assert sorted(epi.virus_sample.members) == [3]
        assert state.status(1) == NEGATIVE

    def test_cure_frequency(self):
        """0.01 over 10^5 enrollee-steps"""
        rng = np.random.default_rng(61)
        spec = InterventionSpec(effects=EffectSet(cure_prob=0.01))
        cured = 0
        for _ in range(1000):
            ids = list(range(100))
            cured += len(step_cure(spec, enrolled(*[(i, POSITIVE) for i in ids]), infected(*ids), rng))
        se = math.sqrt(0.01 * 0.99 / 100_000)
        assert abs(cured / 100_000 - 0.01) < 4 * se


class TestInterventionProgram:
    """Test the per-tick program"""

    def test_inactive_before_start(self, star, rng):
        program = InterventionProgram(InterventionSpec(enabled=True, random_test_prob=1.0, start_step=10))
        assert program.step(star, infected(0), rng, 9) == {"events": [], "dropouts": [], "cured": []}
        assert not program.active(9)
        assert program.active(10)

    def test_disabled(self, star, rng):
        program = InterventionProgram(InterventionSpec(enabled=False, random_test_prob=1.0))
        assert not program.active(100)

    def test_treatment_sample_geometry(self, star, rng):
        """The treatment sample is measurable like any design sample"""
        program = InterventionProgram(InterventionSpec(enabled=True, trace_prob=1.0))
        program.state.enroll(0, POSITIVE, 0)
        assert geometry(program.state.sample, star)["surface"] == 3
        program.step(star, infected(0), rng, 1)
        shape = geometry(program.state.sample, star)
        assert shape["volume"] == 4
        assert shape["surface"] == 0

    def test_removal_hook(self, star):
        program = InterventionProgram(InterventionSpec(enabled=True))
        program.state.enroll(2, NEGATIVE, 0)
        program.on_node_removed(2, 5)
        assert not program.state.is_enrolled(2)
        assert 2 not in program.state.sample

    def test_as_design_spec(self):
        spec = InterventionSpec(trace_prob=0.3, random_test_prob=0.002, dropout_prob=0.01)
        design = spec.as_design_spec()
        assert (design.trace_prob, design.random_prob, design.attrition_prob) == (0.3, 0.002, 0.01)
        assert design.validate() == []

    def test_state_round_trip(self):
        state = enrolled((1, POSITIVE), (4, NEGATIVE))
        state.tests = 7
        assert TreatmentState.from_dict(state.to_dict()).to_dict() == state.to_dict()

    def test_validate(self):
        assert InterventionSpec().validate() == []
        assert len(InterventionSpec(sensitivity=1.5, effects=EffectSet(behavior_duration_mult=0.5)).validate()) == 2
