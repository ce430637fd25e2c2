"""
Sample geometry and outcome statistics

Every statistic here is a pure function of logged records/events or of a
read-only world, so recomputing from a persisted step log reproduces the
in-run values.
"""

import logging
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .sampling_designs import SampleState, TRACE
from .world import World

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
QUANTILE_PROBS = (0.05, 0.25, 0.5, 0.75, 0.95)


# Geometry

def volume(sample: SampleState) -> int:
    """Node volume: number of members"""
    return sample.size


def surface(sample: SampleState, world: World) -> int:
    """Link surface: links with exactly one endpoint in the sample"""
    members = sample.members
    return sum(
        1 for i in members if world.has_node(i) for j in world.graph.neighbors(i) if j not in members
    )


def internal_links(sample: SampleState, world: World) -> int:
    members = sample.members
    return sum(
        1 for i in members if world.has_node(i) for j in world.graph.neighbors(i) if j in members and i < j
    )


def member_degree_sum(sample: SampleState, world: World) -> int:
    return sum(world.degree(i) for i in sample.members if world.has_node(i))


def geometry(sample: SampleState, world: World) -> Dict[str, Any]:
    """Volume, surface, internal links, degree sum and mean member degree-out"""
    vol = volume(sample)
    surf = surface(sample, world)
    return {
        "volume": vol,
        "surface": surf,
        "internal_links": internal_links(sample, world),
        "degree_sum": member_degree_sum(sample, world),
        "member_degree_out_mean": surf / vol if vol else None,
    }


def handshake_holds(sample: SampleState, world: World) -> bool:
    """surface + 2 * internal = sum of member degrees"""
    return surface(sample, world) + 2 * internal_links(sample, world) == member_degree_sum(sample, world)


# Per-tick record

@dataclass
class StepRecord:
    step: int
    population: int
    mean_degree: float
    n_links: int
    insertions: int = 0
    deaths: int = 0
    emigrations: int = 0
    links_formed: int = 0
    links_dissolved: int = 0
    designs: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    epidemic: Dict[str, Any] = field(default_factory=dict)
    intervention: Dict[str, Any] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _get(item: Any, key: str) -> Any:
    return item[key] if isinstance(item, Mapping) else getattr(item, key)


# Equilibrium and path statistics

@dataclass
class EquilibriumSummary:
    counts: List[int]
    edges: List[float]
    mean: float
    sd: float
    quantiles: Dict[float, float]
    n: int


def equilibrium_histogram(series: Sequence[float], burn_in: int, bins: int = 20,
                          probs: Sequence[float] = QUANTILE_PROBS) -> EquilibriumSummary:
    """
    Histogram and summary of the post-burn-in part of a series

    Raises:
        ValueError: if the series is not longer than burn_in
    """
    values = np.asarray(series, dtype=float)
    if len(values) <= burn_in:
        raise ValueError(f"Series of length {len(values)} is too short for burn-in {burn_in}")
    tail = values[burn_in:]
    counts, edges = np.histogram(tail, bins=bins)
    return EquilibriumSummary(
        counts=counts.tolist(),
        edges=edges.tolist(),
        mean=float(tail.mean()),
        sd=float(tail.std(ddof=0)),
        quantiles={float(p): float(q) for p, q in zip(probs, np.quantile(tail, probs))},
        n=len(tail),
    )


class PathEnsemble:
    """Equal-length time series of one scalar, one per replicate"""

    def __init__(self, paths: Sequence[Sequence[float]], label: str = ""):
        lengths = {len(p) for p in paths}
        if len(lengths) > 1:
            raise ValueError(f"Paths have mismatched lengths: {sorted(lengths)}")
        self.paths = np.asarray(paths, dtype=float).reshape(len(paths), -1)
        self.label = label

    @property
    def replicates(self) -> int:
        return self.paths.shape[0]

    @property
    def steps(self) -> int:
        return self.paths.shape[1]


def path_quantiles(ensemble, probs: Sequence[float] = QUANTILE_PROBS) -> np.ndarray:
    """
    Per-step quantiles across replicates (linear interpolation between order statistics)

    Returns:
        Array of shape (len(probs), steps); rows are monotone in probs
    """
    if not isinstance(ensemble, PathEnsemble):
        ensemble = PathEnsemble(ensemble)
    if ensemble.replicates < 2:
        raise ValueError("path_quantiles needs at least two replicates")
    return np.quantile(ensemble.paths, sorted(probs), axis=0)


def dispersion_index(series: Sequence[float], window: int = 1) -> Optional[float]:
    """
    Variance-to-mean ratio of counts summed over non-overlapping windows

    Returns None (missing) when the windowed mean is zero.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    values = np.asarray(series, dtype=float)
    n_windows = len(values) // window
    if n_windows == 0:
        return None
    counts = values[: n_windows * window].reshape(n_windows, window).sum(axis=1)
    mean = counts.mean()
    if mean <= 0:
        return None
    return float(counts.var(ddof=0) / mean)


# Event statistics

def selection_degree_stats(events: Iterable[Any], population_mean_degree: Mapping[int, float],
                           modes: Tuple[str, ...] = (TRACE,)) -> Optional[Dict[str, float]]:
    """
    Mean degree at selection vs the population mean degree at the same ticks

    Args:
        events: TraceEvents (objects or logged dicts)
        population_mean_degree: tick -> population mean degree
        modes: Event modes to include

    Returns:
        Paired means, or None when there is no qualifying event
    """
    chosen = [e for e in events if _get(e, "mode") in modes]
    if not chosen:
        return None
    selected = float(np.mean([_get(e, "degree") for e in chosen]))
    population = float(np.mean([population_mean_degree[_get(e, "step")] for e in chosen]))
    return {
        "mean_selection_degree": selected,
        "mean_population_degree": population,
        "ratio": selected / population if population > 0 else None,
        "n_events": len(chosen),
    }


def incidence_degree_out_stats(events: Iterable[Any], infected_degree_out: Mapping[int, Optional[float]],
                               modes: Tuple[str, ...] = ("transmission",)) -> Optional[Dict[str, float]]:
    """Mean degree-out at incidence vs the mean degree-out over all infected at the same ticks"""
    chosen = [e for e in events
              if _get(e, "mode") in modes and infected_degree_out.get(_get(e, "step")) is not None]
    if not chosen:
        return None
    return {
        "mean_incidence_degree_out": float(np.mean([_get(e, "degree_out") for e in chosen])),
        "mean_infected_degree_out": float(np.mean([infected_degree_out[_get(e, "step")] for e in chosen])),
        "n_events": len(chosen),
    }


def same_group_fraction(events: Sequence[Any], k: int = 10) -> Optional[List[float]]:
    """Share of the modal group in each consecutive, non-overlapping window of k selections"""
    if k < 2:
        raise ValueError("k must be >= 2")
    groups = [_get(e, "group") for e in events]
    if len(groups) < k:
        return None
    fractions = []
    for start in range(0, len(groups) - k + 1, k):
        window = groups[start:start + k]
        fractions.append(Counter(window).most_common(1)[0][1] / k)
    return fractions


def surface_volume_correlation(volumes: Sequence[float], surfaces: Sequence[float]) -> Optional[float]:
    """Spearman correlation of sample size with the surface/volume ratio"""
    vol = np.asarray(volumes, dtype=float)
    surf = np.asarray(surfaces, dtype=float)
    keep = vol > 0
    if keep.sum() < 3:
        return None
    ratio = surf[keep] / vol[keep]
    if np.all(ratio == ratio[0]) or np.all(vol[keep] == vol[keep][0]):
        return None
    rho, _ = stats.spearmanr(vol[keep], ratio)
    return float(rho)


def trend_test(series: Sequence[float], min_autocorr: float = 0.0) -> Tuple[float, float]:
    """
    OLS slope of a series against time, with a two-sided p-value corrected
    for lag-1 autocorrelation of the residuals

    The residual variance and the t degrees of freedom use the effective
    sample size n (1 - r) / (1 + r), r the residual lag-1 autocorrelation
    clipped to [min_autocorr, 0.999]. A slowly relaxing but stationary series
    has few effective observations and is not flagged as trending. The
    estimate of r runs low on short series, so callers that know the
    relaxation rate pass it as min_autocorr.
    """
    values = np.asarray(series, dtype=float)
    n = len(values)
    if n < 3 or np.all(values == values[0]):
        return 0.0, 1.0
    t = np.arange(n)
    result = stats.linregress(t, values)
    slope = float(result.slope)
    if result.stderr == 0:
        return slope, 0.0 if slope != 0 else 1.0

    resid = values - (result.intercept + result.slope * t)
    denom = float(np.dot(resid, resid))
    r = float(np.dot(resid[1:], resid[:-1])) / denom if denom > 0 else 0.0
    r = min(max(r, min_autocorr, 0.0), 0.999)
    dof = max(n * (1 - r) / (1 + r) - 2, 1.0)
    se = result.stderr * np.sqrt((n - 2) / dof)
    p = 2 * stats.t.sf(abs(slope) / se, dof)
    logger.debug(f"Trend over {n} points: slope {slope:.3g}, lag-1 autocorrelation {r:.3f}, {dof:.1f} dof")
    return slope, float(p)


def sign_test(successes: int, trials: int) -> float:
    """One-sided binomial sign test p-value for ``successes`` out of ``trials`` at p = 0.5"""
    if trials == 0:
        return 1.0
    return float(stats.binomtest(successes, trials, 0.5, alternative="greater").pvalue)


# Replicate summary

def _mean(values: List[float]) -> Optional[float]:
    clean = [v for v in values if v is not None]
    return float(np.mean(clean)) if clean else None


def _quantile_columns(name: str, series: Sequence[float]) -> Dict[str, float]:
    """Equilibrium quantiles of an already post-burn-in series as flat columns"""
    eq = equilibrium_histogram(series, 0)
    return {f"{name}_q{p:g}": q for p, q in eq.quantiles.items()}


def summarize_replicate(records: Sequence[Any], burn_in: int, k: int = 10,
                        incidence_window: int = 1, population_autocorr: float = 0.0) -> Dict[str, Any]:
    """
    One flat summary row from a replicate's step records (objects or logged dicts)

    population_autocorr is the known lag-1 autocorrelation of the population
    series, a floor for the trend test's estimate.
    """
    rows = [r if isinstance(r, Mapping) else r.to_dict() for r in records]
    post = [r for r in rows if r["step"] > burn_in]
    if not post:
        raise ValueError(f"No records after burn-in {burn_in}")

    population = [r["population"] for r in post]
    slope, slope_p = trend_test(population, population_autocorr)
    summary: Dict[str, Any] = {
        "steps": rows[-1]["step"],
        "post_burn_in_steps": len(post),
        "mean_population": float(np.mean(population)),
        "sd_population": float(np.std(population)),
        "population_slope": slope,
        "population_slope_p": slope_p,
        "mean_degree": float(np.mean([r["mean_degree"] for r in post])),
    }
    summary.update(_quantile_columns("population", population))
    mean_degree_by_step = {r["step"]: r["mean_degree"] for r in rows}

    epi_rows = [r["epidemic"] for r in post if r.get("epidemic")]
    if epi_rows:
        prevalence = [e["prevalence"] for e in epi_rows]
        incidence = [e["incidence"] for e in epi_rows]
        summary.update({
            "mean_prevalence": float(np.mean(prevalence)),
            "sd_prevalence": float(np.std(prevalence)),
            "mean_incidence": float(np.mean(incidence)),
            "incidence_dispersion": dispersion_index(incidence, incidence_window),
        })
        summary.update(_quantile_columns("prevalence", prevalence))
        infection_events = [ev for r in post for ev in r["epidemic"].get("events", [])]
        degree_out_by_step = {r["step"]: r["epidemic"].get("infected_degree_out_mean") for r in post
                              if r.get("epidemic")}
        incidence_stats = incidence_degree_out_stats(infection_events, degree_out_by_step)
        if incidence_stats:
            summary["mean_incidence_degree_out"] = incidence_stats["mean_incidence_degree_out"]
            summary["mean_infected_degree_out"] = incidence_stats["mean_infected_degree_out"]

    design_names = sorted({name for r in post for name in r.get("designs", {})})
    for name in design_names:
        entries = [(r["step"], r["designs"][name]) for r in post if name in r.get("designs", {})]
        sizes = [d["volume"] for _, d in entries]
        surfaces = [d["surface"] for _, d in entries]
        events = [ev for _, d in entries for ev in d.get("events", [])]
        prefix = f"{name}_"
        summary[prefix + "mean_size"] = float(np.mean(sizes))
        summary[prefix + "sd_size"] = float(np.std(sizes))
        summary[prefix + "mean_surface_volume"] = _mean([s / v if v else None for s, v in zip(surfaces, sizes)])
        summary[prefix + "surface_volume_spearman"] = surface_volume_correlation(sizes, surfaces)
        summary[prefix + "selections"] = len(events)

        degree_stats = selection_degree_stats(events, mean_degree_by_step)
        if degree_stats:
            summary[prefix + "mean_selection_degree"] = degree_stats["mean_selection_degree"]
            summary[prefix + "mean_population_degree"] = degree_stats["mean_population_degree"]
        traced = [ev for ev in events if _get(ev, "mode") == TRACE]
        summary[prefix + "mean_entry_degree_out"] = _mean([_get(ev, "degree_out") for ev in traced])
        summary[prefix + "mean_member_degree_out"] = _mean([d["member_degree_out_mean"] for _, d in entries])
        fractions = same_group_fraction(traced, k) if len(traced) >= k else None
        summary[prefix + "same_group_fraction"] = _mean(fractions) if fractions else None

    intervention_rows = [r["intervention"] for r in post if r.get("intervention")]
    if intervention_rows:
        summary["mean_enrolled_positive"] = float(np.mean([i["enrolled_positive"] for i in intervention_rows]))
        summary["mean_enrolled_negative"] = float(np.mean([i["enrolled_negative"] for i in intervention_rows]))

    return summary
