"""
Simulation engine

One ``Simulation`` is one replicate: a world, its epidemic, its
seek-and-treat program, its registered sampling designs and their random
streams. Each tick runs the layers in a fixed order:

    (1) group centers    (2) node positions   (3) deaths/emigration
    (4) insertions       (5) link dissolution (6) link formation
    (7) importation      (8) transmission     (9) stage progression
    (10) intervention    (11) sampling designs (12) step record

Replicates fan out over a process pool; results are written in replicate
order, so parallel and sequential runs produce the same files.
"""

import json
import logging
import multiprocessing
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from .config import ConfigManager, ScenarioConfig
from .demography import EMIGRATION, step_deaths, step_insertions
from .epidemic import (
    IMMIGRATION,
    IMPORT,
    REINFECTION,
    SEED,
    TRANSMISSION,
    EpidemicState,
    seed_infections,
    stage_mortality_multiplier,
    step_importation,
    step_progression,
    step_transmission,
)
from .interventions import InterventionProgram, TreatmentState
from .link_dynamics import step_dissolution, step_formation
from .metrics import (
    QUANTILE_PROBS,
    PathEnsemble,
    StepRecord,
    equilibrium_histogram,
    geometry,
    handshake_holds,
    path_quantiles,
    sign_test,
    summarize_replicate,
)
from .rng import CORE_STREAMS, RngStreams, design_stream
from .sampling_designs import SamplingDesign
from .snapshot import SnapshotError, load_snapshot, save_snapshot
from .social_space import draw_position_near, init_groups, step_group_centers, step_node_positions
from .utils import Timer, save_results, write_jsonl
from .world import SEXES, ContractViolation, World

logger = logging.getLogger(__name__)

NEW_INFECTION_MODES = (TRANSMISSION, IMPORT, IMMIGRATION)


class Simulation:
    """A single replicate and its tick procedure"""

    def __init__(self, cfg: ScenarioConfig, replicate: int = 0, base_seed: Optional[int] = None,
                 world: Optional[World] = None):
        self.cfg = cfg
        self.replicate = replicate
        self.streams = RngStreams(cfg.run.base_seed if base_seed is None else base_seed, replicate)
        self.epi = EpidemicState()
        self.program = InterventionProgram(cfg.intervention)
        self.designs = [SamplingDesign(spec) for spec in cfg.designs.values()]
        self.world = world if world is not None else self._init_world()
        self.world.add_removal_hook(self._on_node_removed)

    def _init_world(self) -> World:
        """Fill every group to its target with isolated nodes at the stationary spread"""
        cfg = self.cfg
        groups = init_groups(cfg.space, cfg.demography.pop_target, self.streams["space"])
        world = World(groups, region_side=cfg.space.region_side, strict=cfg.run.strict)
        rng = self.streams["demography"]
        for g in groups:
            for _ in range(g.target_size):
                sex = SEXES[0] if rng.random() < 0.5 else SEXES[1]
                world.add_node(g.id, sex, draw_position_near(g.center, cfg.space, rng), born_at=0)
        return world

    def _on_node_removed(self, node_id: int, step: int):
        self.epi.on_node_removed(node_id, step)
        self.program.on_node_removed(node_id, step)
        for design in self.designs:
            design.on_node_removed(node_id, step)

    @property
    def now(self) -> int:
        return self.world.step

    def epidemic_active(self, now: int) -> bool:
        return self.cfg.epi.enabled and now >= self.cfg.epi.start_step

    def frozen(self, now: int) -> bool:
        freeze = self.cfg.run.freeze_world_at
        return freeze is not None and now > freeze

    # Effect plumbing

    def _mortality_multiplier(self) -> Optional[Callable[[int], float]]:
        epi_on = self.cfg.epi.enabled
        treat_on = self.cfg.intervention.enabled
        if not (epi_on or treat_on):
            return None

        def multiplier(node_id: int) -> float:
            m = stage_mortality_multiplier(node_id, self.epi, self.cfg.epi) if epi_on else 1.0
            if treat_on:
                m *= self.program.multipliers(node_id).mortality_mult
            return m

        return multiplier

    def _link_multipliers(self) -> Tuple[Optional[Dict[int, float]], Optional[Dict[int, float]]]:
        if not self.cfg.intervention.enabled:
            return None, None
        enrolled = self.program.enrolled_multipliers()
        formation = {i: m.formation_mult for i, m in enrolled.items()}
        duration = {i: m.duration_mult for i, m in enrolled.items()}
        return formation, duration

    # Tick

    def run_tick(self) -> StepRecord:
        """Advance one tick and return its record"""
        world, cfg, rs = self.world, self.cfg, self.streams
        now = world.step + 1
        world.step = now
        frozen = self.frozen(now)

        removed: List[Tuple[int, str]] = []
        entrants: List[int] = []
        formed: list = []
        dissolved: list = []
        if not frozen:
            world.groups = step_group_centers(world.groups, cfg.space, rs["space"])
            world.set_positions(step_node_positions(world.node_positions(), world.groups, cfg.space, rs["space"]))
            removed = step_deaths(world, cfg.demography, rs["demography"], self._mortality_multiplier())
            entrants = step_insertions(world, cfg.demography, cfg.space, rs["demography"], now)
            dissolved = step_dissolution(world, now)
            formation_mult, duration_mult = self._link_multipliers()
            formed = step_formation(world, cfg.links, rs["links"], now, formation_mult, duration_mult)

        infection_events, transitions = [], []
        if self.epidemic_active(now):
            rng = rs["epidemic"]
            if not self.epi.seeded:
                infection_events += seed_infections(world, self.epi, cfg.epi, rng, now)
            infection_events += step_importation(world, self.epi, cfg.epi, rng, now, entrants)
            effects = self.program.multipliers if cfg.intervention.enabled else None
            infection_events += step_transmission(world, self.epi, cfg.epi, rng, now, effects)
            transitions = step_progression(self.epi, cfg.epi, rng, now)

        treatment = self.program.step(world, self.epi, rs["intervention"], now)

        design_events = {d.name: d.step(world, rs[design_stream(d.name)], now) for d in self.designs}

        record = StepRecord(
            step=now,
            population=world.size,
            mean_degree=world.mean_degree(),
            n_links=world.n_links,
            insertions=len(entrants),
            deaths=sum(1 for _, cause in removed if cause != EMIGRATION),
            emigrations=sum(1 for _, cause in removed if cause == EMIGRATION),
            links_formed=len(formed),
            links_dissolved=len(dissolved),
        )
        for design in self.designs:
            events = design_events[design.name]
            record.designs[design.name] = {
                **geometry(design.sample, world),
                "selections": len(events),
                "events": [e.to_dict() for e in events],
            }
        if self.epidemic_active(now):
            record.epidemic = {
                "prevalence": self.epi.prevalence,
                "incidence": sum(1 for e in infection_events if e.mode in NEW_INFECTION_MODES),
                "reinfections": sum(1 for e in infection_events if e.mode == REINFECTION),
                "seeded": sum(1 for e in infection_events if e.mode == SEED),
                "progressions": len(transitions),
                "stages": self.epi.stage_counts(),
                "infected_degree_out_mean": self.epi.last_infected_degree_out,
                "removed_infected": self.epi.removed_infected,
                "cured": self.epi.cured,
                "events": [e.to_dict() for e in infection_events],
            }
        if cfg.intervention.enabled:
            counts = self.program.state.counts()
            record.intervention = {
                "enrolled_positive": counts["positive"],
                "enrolled_negative": counts["negative"],
                **geometry(self.program.state.sample, world),
                "tests": self.program.state.tests,
                "enrollments": len(treatment["events"]),
                "dropouts": len(treatment["dropouts"]),
                "cured": len(treatment["cured"]),
                "events": [e.to_dict() for e in treatment["events"]],
            }

        # removals are already counted in the record
        world.prune_life_records()
        if cfg.run.audit:
            self.check_invariants(check_expiry=not frozen)
        logger.debug(f"Tick {now}: N={world.size} links={world.n_links} "
                     f"+{len(formed)}/-{len(dissolved)} infections={len(infection_events)}")
        return record

    def run(self, steps: Optional[int] = None, progress: bool = False) -> List[StepRecord]:
        """Run until the world reaches ``steps`` (default run.steps)"""
        until = self.cfg.run.steps if steps is None else steps
        ticks = range(self.world.step, until)
        desc = f"{self.cfg.run.scenario}[{self.replicate}]"
        return [self.run_tick() for _ in tqdm(ticks, desc=desc, disable=not progress, leave=False)]

    def check_invariants(self, check_expiry: bool = True):
        """Cross-module audit; raises ContractViolation"""
        world = self.world
        world.check_invariants(check_expiry=check_expiry)
        samples = [(d.name, d.sample) for d in self.designs]
        samples.append(("intervention", self.program.state.sample))
        samples.append(("virus", self.epi.virus_sample))
        for name, sample in samples:
            stray = [i for i in sample.members if not world.has_node(i)]
            if stray:
                raise ContractViolation(f"Sample {name} holds removed nodes {sorted(stray)[:5]}")
            if not handshake_holds(sample, world):
                raise ContractViolation(f"Handshake identity fails for sample {name} at step {world.step}")
        self.epi.check_invariants(world)
        if set(self.program.state.enrollments) != set(self.program.state.sample.members):
            raise ContractViolation("Enrollment register differs from the treatment sample")

    # Persistence

    def snapshot_state(self) -> Dict[str, Any]:
        return {
            "world": self.world.to_dict(),
            "epidemic": self.epi.to_dict(),
            "intervention": self.program.state.to_dict(),
            "designs": {d.name: d.to_dict() for d in self.designs},
            "rng": self.streams.get_state(),
            "space": {"region_side": self.cfg.space.region_side, "n_groups": self.cfg.space.n_groups},
        }

    def save_snapshot(self, path: Union[str, Path]) -> Path:
        return save_snapshot(self.snapshot_state(), path, self.world.step)

    @classmethod
    def from_snapshot(cls, cfg: ScenarioConfig, snapshot: Dict[str, Any], replicate: int = 0,
                      base_seed: Optional[int] = None, reseed: bool = False) -> "Simulation":
        """
        Rebuild a replicate from a loaded snapshot

        Args:
            cfg: Scenario to continue under; its geometry must match the snapshot
            snapshot: Output of load_snapshot
            replicate: Replicate index
            base_seed: Seed for reseeding (default run.base_seed)
            reseed: Restart every stream from (base_seed, replicate, snapshot step)
                instead of restoring the saved stream states. Streams are also
                restarted when (base_seed, replicate) differs from the snapshot's
                own; only the saved replicate continues its stored streams.

        Raises:
            SnapshotError: geometry mismatch or malformed state
        """
        state = snapshot["state"]
        try:
            space = state["space"]
            if space["n_groups"] != cfg.space.n_groups or space["region_side"] != cfg.space.region_side:
                raise SnapshotError(
                    f"Snapshot geometry (n_groups={space['n_groups']}, region_side={space['region_side']}) "
                    f"does not match scenario {cfg.run.scenario}"
                )
            world = World.from_dict(state["world"], strict=cfg.run.strict)
            sim = cls(cfg, replicate, base_seed, world=world)
            sim.epi = EpidemicState.from_dict(state["epidemic"])
            sim.program.state = TreatmentState.from_dict(state["intervention"])
            saved = state["designs"]
            for design in sim.designs:
                if design.name in saved:
                    design.load_state(saved[design.name])
            ignored = sorted(set(saved) - {d.name for d in sim.designs})
            if ignored:
                logger.info(f"Snapshot designs not in scenario {cfg.run.scenario}: {ignored}")
            saved_rng = state["rng"]
            continues = (saved_rng["replicate"] == replicate and saved_rng["base_seed"] == sim.streams.base_seed)
            if reseed or not continues:
                names = CORE_STREAMS + tuple(design_stream(d.name) for d in sim.designs)
                sim.streams.reseed(sim.streams.base_seed, replicate, names, epoch=world.step)
            else:
                sim.streams.set_state(saved_rng)
        except (KeyError, TypeError) as e:
            raise SnapshotError(f"Malformed snapshot state: {e}") from e
        return sim


# Replicates

@dataclass
class ReplicateResult:
    scenario: str
    replicate: int
    seed: int
    status: str
    error: Optional[str] = None
    records: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def row(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "replicate": self.replicate,
            "seed": self.seed,
            "status": self.status,
            "error": self.error,
            **self.summary,
        }

    def series(self, key: str) -> List[float]:
        """Per-step scalar from the records: a top-level field, epidemic.<f> or <design>.<f>"""
        section, _, name = key.rpartition(".")
        if not section:
            return [r[name] for r in self.records]
        if section in ("epidemic", "intervention"):
            return [r[section].get(name, 0) for r in self.records]
        return [r["designs"][section][name] for r in self.records]


def replicate_path(path: Optional[Union[str, Path]], replicate: int) -> Optional[Path]:
    """Replicate 0 writes to ``path``; replicate r > 0 to ``<stem>_<r><suffix>``"""
    if path is None:
        return None
    path = Path(path)
    if replicate == 0:
        return path
    return path.with_name(f"{path.stem}_{replicate}{path.suffix}")


def run_replicate(cfg: ScenarioConfig, replicate: int, base_seed: Optional[int] = None,
                  snapshot: Optional[Dict[str, Any]] = None, reseed: bool = False,
                  snapshot_out: Optional[Path] = None, progress: bool = False) -> ReplicateResult:
    """Run one replicate; failures are captured in the result, never raised"""
    seed = cfg.run.base_seed if base_seed is None else base_seed
    result = ReplicateResult(scenario=cfg.run.scenario, replicate=replicate, seed=seed, status="ok")
    try:
        with Timer(f"Scenario {cfg.run.scenario} replicate {replicate}"):
            if snapshot is not None:
                sim = Simulation.from_snapshot(cfg, snapshot, replicate, seed, reseed=reseed)
            else:
                sim = Simulation(cfg, replicate, seed)
            start = sim.now
            result.records = [r.to_dict() for r in sim.run(progress=progress)]
            if snapshot_out is not None:
                sim.save_snapshot(snapshot_out)
        result.summary = summarize_replicate(
            result.records, max(cfg.run.burn_in, start),
            population_autocorr=cfg.demography.population_autocorr,
        )
    except ContractViolation as e:
        logger.error(f"Scenario {cfg.run.scenario} replicate {replicate} violated a contract: {e}")
        result.status, result.error, result.records = "contract_violation", str(e), []
    except Exception as e:
        logger.exception(f"Scenario {cfg.run.scenario} replicate {replicate} failed")
        result.status, result.error, result.records = "error", f"{type(e).__name__}: {e}", []
    return result


def _run_task(task: tuple) -> ReplicateResult:
    return run_replicate(*task)


def _execute(tasks: List[tuple], workers: int, progress: bool, desc: str) -> List[ReplicateResult]:
    if workers <= 1 or len(tasks) == 1:
        return [_run_task(t) for t in tqdm(tasks, desc=desc, disable=not progress)]
    with multiprocessing.Pool(min(workers, len(tasks))) as pool:
        return list(tqdm(pool.imap(_run_task, tasks), total=len(tasks), desc=desc, disable=not progress))


def run_replicates(cfg: ScenarioConfig, out_dir: Optional[Union[str, Path]] = None,
                   workers: Optional[int] = None, progress: bool = False, base_seed: Optional[int] = None,
                   snapshot: Optional[Dict[str, Any]] = None, reseed: bool = False,
                   write_summary: bool = True) -> List[ReplicateResult]:
    """
    Run replicates 0..R-1 and write their step logs

    Args:
        cfg: Scenario
        out_dir: Output directory (default run.output_dir)
        workers: Process count (default run.workers); 1 runs in-process
        progress: Show tqdm bars
        base_seed: Seed override (default run.base_seed)
        snapshot: Loaded snapshot to start every replicate from (default run.snapshot_in, if set)
        reseed: Reseed streams after loading the snapshot (paired comparisons)
        write_summary: Also write summary.csv and the effective config

    Returns:
        One result per replicate, in replicate order
    """
    out = Path(out_dir or cfg.run.output_dir)
    seed = cfg.run.base_seed if base_seed is None else base_seed
    if snapshot is None and cfg.run.snapshot_in:
        snapshot = load_snapshot(cfg.run.snapshot_in)

    tasks = [
        (cfg, r, seed, snapshot, reseed, replicate_path(cfg.run.snapshot_out, r), False)
        for r in range(cfg.run.replicates)
    ]
    logger.info(f"Running {len(tasks)} replicate(s) of {cfg.run.scenario} (seed {seed})")
    results = _execute(tasks, workers or cfg.run.workers, progress, cfg.run.scenario)

    for res in results:
        if res.ok:
            write_jsonl(res.records, out / f"steps_{res.scenario}_{res.replicate}.jsonl")
    if write_summary:
        save_results([res.row() for res in results], out / "summary.csv", format="csv")
        ConfigManager().save_config(cfg, out / f"config_{cfg.run.scenario}.yaml")
        logger.info(f"Wrote {out / 'summary.csv'}")

    failed = [res.replicate for res in results if not res.ok]
    if failed:
        logger.warning(f"{len(failed)} replicate(s) of {cfg.run.scenario} failed: {failed}")
    return results


def burnin(cfg: ScenarioConfig, steps: int, snapshot_out: Union[str, Path], base_seed: Optional[int] = None,
           progress: bool = False) -> Path:
    """Run replicate 0 for ``steps`` ticks and snapshot it"""
    sim = Simulation(cfg, 0, base_seed)
    with Timer(f"Burn-in of {steps} steps"):
        sim.run(steps, progress=progress)
    return sim.save_snapshot(snapshot_out)


def path_table(results: Sequence[ReplicateResult], keys: Sequence[str],
               probs: Sequence[float] = QUANTILE_PROBS) -> List[Dict[str, Any]]:
    """Long-format rows (step, metric, q_p...) of per-step quantile bands"""
    ok = [r for r in results if r.ok]
    if len(ok) < 2:
        return []
    steps = [rec["step"] for rec in ok[0].records]
    rows = []
    for key in keys:
        bands = path_quantiles(PathEnsemble([r.series(key) for r in ok], label=key), probs)
        for t, step in enumerate(steps):
            row = {"step": step, "metric": key}
            row.update({f"q{p:g}": float(bands[k, t]) for k, p in enumerate(sorted(probs))})
            rows.append(row)
    return rows


def equilibrium_table(results: Sequence[ReplicateResult], keys: Sequence[str], burn_in: int,
                      bins: int = 20) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    """
    Histograms of each metric pooled over the post-burn-in ticks of every
    successful replicate

    Returns:
        Long-format (metric, bin_left, bin_right, count) rows and, per metric,
        its pooled mean, sd, quantiles and number of values
    """
    ok = [r for r in results if r.ok and r.records]
    rows: List[Dict[str, Any]] = []
    summary: Dict[str, Any] = {}
    for key in keys:
        pooled = [v for r in ok for rec, v in zip(r.records, r.series(key)) if rec["step"] > burn_in]
        if not pooled:
            continue
        eq = equilibrium_histogram(pooled, 0, bins=bins)
        for left, right, count in zip(eq.edges[:-1], eq.edges[1:], eq.counts):
            rows.append({"metric": key, "bin_left": left, "bin_right": right, "count": count})
        summary[key] = {
            "mean": eq.mean,
            "sd": eq.sd,
            "quantiles": {f"q{p:g}": q for p, q in eq.quantiles.items()},
            "n": eq.n,
        }
    return rows, summary


def _path_keys(cfg: ScenarioConfig) -> List[str]:
    keys = ["population"]
    if cfg.epi.enabled:
        keys.append("epidemic.prevalence")
    keys.extend(f"{name}.volume" for name in cfg.designs)
    return keys


def compare(baseline: ScenarioConfig, variant: ScenarioConfig, snapshot_path: Union[str, Path],
            out_dir: Union[str, Path], replicates: Optional[int] = None, base_seed: Optional[int] = None,
            workers: Optional[int] = None, progress: bool = False) -> Dict[str, Any]:
    """
    Paired comparison of two scenarios from a common burn-in

    Every replicate r of both scenarios starts from the same snapshot with
    streams reseeded from (seed, r, snapshot step). A missing snapshot is
    created first by burning in the baseline for run.burn_in ticks.

    Returns:
        The sign-test summary also written to compare_summary.json
    """
    out = Path(out_dir)
    seed = baseline.run.base_seed if base_seed is None else base_seed
    n_rep = replicates or baseline.run.replicates
    snapshot_path = Path(snapshot_path)
    if not snapshot_path.exists():
        logger.info(f"No snapshot at {snapshot_path}; burning in the baseline for {baseline.run.burn_in} steps")
        burnin(baseline, baseline.run.burn_in, snapshot_path, seed, progress)
    snapshot = load_snapshot(snapshot_path)

    base_label = baseline.run.scenario
    var_label = variant.run.scenario if variant.run.scenario != base_label else f"{base_label}_variant"
    scenarios = [
        replace(baseline, run=replace(baseline.run, replicates=n_rep, scenario=base_label, snapshot_in=None,
                                      snapshot_out=None)),
        replace(variant, run=replace(variant.run, replicates=n_rep, scenario=var_label, snapshot_in=None,
                                     snapshot_out=None)),
    ]
    results = [
        run_replicates(cfg, out, workers, progress, base_seed=seed, snapshot=snapshot, reseed=True,
                       write_summary=False)
        for cfg in scenarios
    ]

    metrics = ["mean_prevalence", "mean_population", "mean_incidence", "mean_degree"]
    rows = []
    paired, lower = 0, 0
    for res_b, res_v in zip(*results):
        row = {"replicate": res_b.replicate, "baseline_status": res_b.status, "variant_status": res_v.status}
        for metric in metrics:
            b, v = res_b.summary.get(metric), res_v.summary.get(metric)
            if b is None or v is None:
                continue
            row.update({f"baseline_{metric}": b, f"variant_{metric}": v, f"diff_{metric}": v - b})
        if "diff_mean_prevalence" in row:
            paired += 1
            row["variant_lower"] = bool(row["diff_mean_prevalence"] < 0)
            lower += int(row["variant_lower"])
        rows.append(row)
    save_results(rows, out / "compare.csv", format="csv")
    save_results([res.row() for group in results for res in group], out / "summary.csv", format="csv")

    equilibrium: Dict[str, Any] = {}
    for cfg, group in zip(scenarios, results):
        table = path_table(group, _path_keys(cfg))
        if table:
            save_results(table, out / f"paths_{cfg.run.scenario}.csv", format="csv")
        else:
            logger.warning(f"Fewer than two successful replicates of {cfg.run.scenario}; no path bands written")
        eq_rows, eq_summary = equilibrium_table(group, _path_keys(cfg), cfg.run.burn_in)
        if eq_rows:
            save_results(eq_rows, out / f"equilibrium_{cfg.run.scenario}.csv", format="csv")
        equilibrium[cfg.run.scenario] = eq_summary

    summary = {
        "baseline": base_label,
        "variant": var_label,
        "replicates": n_rep,
        "paired": paired,
        "variant_lower": lower,
        "sign_test_p": sign_test(lower, paired),
        "snapshot_step": snapshot["step"],
        "seed": seed,
        "equilibrium": equilibrium,
    }
    save_results(summary, out / "compare_summary.json", format="json")
    logger.info(f"Variant prevalence lower in {lower}/{paired} paired replicates "
                f"(sign test p={summary['sign_test_p']:.3g})")
    return summary


def sweep(cfg: ScenarioConfig, param: str, values: Sequence[Any], out_dir: Union[str, Path],
          replicates: Optional[int] = None, base_seed: Optional[int] = None, workers: Optional[int] = None,
          progress: bool = False) -> List[Dict[str, Any]]:
    """
    Re-run a scenario once per value of one dotted parameter

    Returns:
        Summary rows (also written to sweep.csv), tagged with param and value
    """
    out = Path(out_dir)
    manager = ConfigManager()
    rows = []
    for k, value in enumerate(values):
        label = f"{cfg.run.scenario}_sweep{k}"
        updates = {param: value, "run.scenario": label}
        if replicates:
            updates["run.replicates"] = replicates
        variant = manager.update_config(cfg, updates)
        for res in run_replicates(variant, out, workers, progress, base_seed=base_seed, write_summary=False):
            rows.append({"param": param, "value": json.dumps(value), **res.row()})
    save_results(rows, out / "sweep.csv", format="csv")
    logger.info(f"Swept {param} over {len(values)} value(s); wrote {out / 'sweep.csv'}")
    return rows
