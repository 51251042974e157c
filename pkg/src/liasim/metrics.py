"""Evaluation quantities: welfare and revenue ratios, reachability, timing
rents (latency-arbitrage gain curves and indices), clearing latency,
decay-adjusted welfare, and bootstrap confidence intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import math
import numpy as np

from .auction import SlackProfile
from .mechanisms import Outcome, utility

POPULATION_AGENT = "population"

# Reduction grid for timing-rent curves, scaled to the topology's delay span
# so the largest point reaches a full cross-network advantage; 1 ms is always
# present as the standardized marginal report.
_BASE_REDUCTION_GRID = (0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)


def reduction_grid(delay_span_ms: float) -> np.ndarray:
    scale = delay_span_ms / _BASE_REDUCTION_GRID[-1]
    grid = {round(d * scale, 9) for d in _BASE_REDUCTION_GRID}
    grid.add(1.0)
    return np.array(sorted(g for g in grid if g > 0))


def welfare_ratios(outcome: Outcome, bids, profile: SlackProfile):
    """(SW/OPT_all, SW/OPT_feas, reachability).

    SW is the winners' true value, OPT_all the best value in the instance,
    OPT_feas the best causally feasible value.  SW/OPT_feas is None when no
    bid is feasible (excluded from aggregates rather than scored as zero).
    """
    true_values = np.array([b.true_value for b in bids], dtype=float)
    opt_all = float(true_values.max()) if len(true_values) else 0.0
    feas = profile.feasible
    winner_ids = set(outcome.winners)
    sw = float(sum(b.true_value for b in bids if b.bidder in winner_ids))
    if not feas.any():
        sw_all = sw / opt_all if opt_all > 0 else 1.0
        return sw_all, None, 0.0
    opt_feas = float(true_values[feas].max())
    if opt_all <= 0.0:
        return 1.0, 1.0, 1.0
    reach = opt_feas / opt_all
    sw_all = sw / opt_all
    sw_feas = sw / opt_feas if opt_feas > 0 else None
    return sw_all, sw_feas, reach


def clearing_latency(outcome: Outcome, bids) -> float:
    """Decision time minus the earliest bid emission."""
    first = min(b.emission for b in bids)
    return outcome.decision_time - first


def effective_welfare(winner_true_value: float, t_clear_ms: float,
                      rate_per_ms: float) -> float:
    """Winner value decayed exponentially over the clearing latency."""
    if rate_per_ms < 0:
        raise ValueError("decay rate must be nonnegative")
    return winner_true_value * math.exp(-rate_per_ms * t_clear_ms)


def bootstrap_ci(samples, level: float = 0.95, resamples: int = 10_000,
                 seed=0) -> tuple[float, float, float]:
    """Percentile bootstrap for the mean: (lo, hi, sample mean)."""
    data = np.asarray(samples, dtype=float)
    if data.size == 0:
        raise ValueError("cannot bootstrap an empty sample")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    means = np.empty(resamples)
    chunk = max(1, min(resamples, int(2e7) // max(1, data.size)))
    done = 0
    while done < resamples:
        take = min(chunk, resamples - done)
        idx = rng.integers(0, data.size, size=(take, data.size))
        means[done:done + take] = data[idx].mean(axis=1)
        done += take
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi), float(data.mean())


@dataclass(frozen=True)
class LaiCurve:
    """Mean counterfactual gain per delay-reduction grid point."""

    delta_grid: np.ndarray
    g_values: np.ndarray
    counts: np.ndarray  # samples contributing per point
    agent: object = POPULATION_AGENT
    gain_samples: np.ndarray | None = None  # (samples, grid), NaN where skipped

    def __post_init__(self):
        grid = np.asarray(self.delta_grid, dtype=float)
        if len(grid) == 0:
            raise ValueError("empty reduction grid")
        if not (np.all(grid > 0) and np.all(np.diff(grid) > 0)):
            raise ValueError("grid must be strictly increasing and positive")


def lai_index(curve: LaiCurve) -> float:
    """Supremum of the gain curve, floored at the vanishing-reduction limit
    of zero; grid points that no sample could reach are ignored."""
    valid = curve.counts > 0
    if not valid.any():
        return 0.0
    return max(0.0, float(np.max(curve.g_values[valid])))


def counterfactual_gains(evaluate, bids, profile: SlackProfile,
                         arrivals: np.ndarray, agent_index: int,
                         reductions) -> np.ndarray:
    """Paired utility gains for one designated bid under arrival advances.

    ``evaluate(profile, arrivals) -> Outcome`` is re-run with the agent's
    emission advanced by each reduction (slack grows by the same amount,
    everything else held fixed).  Entries are NaN where the reduction
    exceeds the agent's current one-way delay.
    """
    agent_id = bids[agent_index].bidder
    theta = bids[agent_index].true_value
    delay = float(arrivals[agent_index] - bids[agent_index].emission)
    base = utility(agent_id, evaluate(profile, arrivals), theta)
    gains = np.full(len(reductions), np.nan)
    for j, dd in enumerate(reductions):
        if dd > delay:
            continue
        arr = arrivals.copy()
        arr[agent_index] -= dd
        out = evaluate(profile.shifted(agent_index, dd), arr)
        gains[j] = utility(agent_id, out, theta) - base
    return gains


def sample_timing_rent(evaluate, bids, profile: SlackProfile,
                       arrivals: np.ndarray, agent_index: int,
                       grid) -> tuple[float, float]:
    """(per-sample supremum gain, gain at the 1 ms marginal reduction).

    The supremum scans the grid points the agent can reach plus the agent's
    full current delay, i.e. the whole feasible reduction range.
    """
    delay = float(arrivals[agent_index] - bids[agent_index].emission)
    reductions = [float(d) for d in grid if d <= delay]
    if delay > 0 and delay not in reductions:
        reductions.append(delay)
    if 1.0 <= delay and 1.0 not in reductions:
        reductions.append(1.0)
    if not reductions:
        return 0.0, np.nan
    gains = counterfactual_gains(evaluate, bids, profile, arrivals,
                                 agent_index, reductions)
    sup = float(np.nanmax(gains))
    marginal = np.nan
    if 1.0 in reductions:
        marginal = float(gains[reductions.index(1.0)])
    return sup, marginal


def lai_curve(evaluate_factory, instance_sampler, delta_grid, samples: int,
              seed) -> LaiCurve:
    """Population-average timing-rent curve over sampled instances.

    For each sample: draw an instance, designate one feasible bid uniformly,
    and record its paired counterfactual gains on the grid.  The curve is
    the per-point mean over the samples that could reach the point.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    grid = np.asarray(delta_grid, dtype=float)
    matrix = np.full((samples, len(grid)), np.nan)
    root = (seed if isinstance(seed, np.random.SeedSequence)
            else np.random.SeedSequence(seed))
    for row, child in enumerate(root.spawn(samples)):
        rng = np.random.default_rng(child)
        case = instance_sampler(rng)
        feas = np.flatnonzero(case.profile.feasible)
        if len(feas) == 0:
            continue
        agent = int(rng.choice(feas))
        matrix[row] = counterfactual_gains(evaluate_factory(case), case.bids,
                                           case.profile, case.arrivals, agent,
                                           grid)
    counts = (~np.isnan(matrix)).sum(axis=0)
    with np.errstate(invalid="ignore"):
        g = np.where(counts > 0, np.nanmean(matrix, axis=0), np.nan)
    return LaiCurve(delta_grid=grid, g_values=g, counts=counts,
                    gain_samples=matrix)
