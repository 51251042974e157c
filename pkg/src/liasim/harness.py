"""Monte Carlo experiment harness: seeded instance generation, paired
mechanism sweeps, robustness sweeps, large-market runs, and aggregation.

Determinism contract: a sweep is a pure function of its config (master seed
included).  Seeds derive from ``SeedSequence([master, cell, instance])``, so
any worker count and any chunking produce byte-identical records.  Measured
winner-determination times are inherently run-dependent, so they stream to a
separate timings file and the deterministic records file leaves its
compute_time_ms column empty.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import zlib
from dataclasses import dataclass, field
from multiprocessing import get_context

import numpy as np

from . import metrics as _metrics
from .auction import (Bid, ClearingHorizon, DiscountParams, ErrorModel,
                      NO_ERROR, SlackProfile, apply_error_model,
                      calibrate_horizon, compute_slacks)
from .mechanisms import (MECH_BATCH, MECH_FAST, MECH_HOLDBACK, MECH_LIA,
                         MECH_LIA_K, MECH_SYNC, Outcome, batch_vcg, fast_vcg,
                         holdback, lia_k_items, lia_single, sync_vcg, utility)
from .topology import Topology, distances_to_horizon, generate, GENERATED_KINDS

# Bid-collection window per topology kind (ms).  Calibrated jointly with the
# 95% horizon policy against the published slack-spread, feasibility, and
# clearing-latency statistics.
EMISSION_WINDOW_MS = {
    "starlink200": 28.0,
    "internet100": 5.0,
    "dsn30": 10.0,
}

TARGET_FEASIBLE = 0.95
VALUE_RANGE = (0.0, 1000.0)
CLEARING_NODE = 0

RECORD_COLUMNS = (
    "topology", "mechanism", "n", "lambda_per_s", "epsilon_ms", "error_model",
    "seed", "sw_ratio_all", "sw_ratio_feas", "reachability", "rev_ratio",
    "clearing_latency_ms", "compute_time_ms", "lai_sup", "lai_marginal_1ms",
)
TIMING_COLUMNS = (
    "topology", "mechanism", "n", "lambda_per_s", "epsilon_ms", "error_model",
    "seed", "compute_time_ms",
)


class ConfigError(ValueError):
    """Sweep configuration failed validation."""


class SweepAssertionError(AssertionError):
    """An inline invariant failed during a sweep."""


@dataclass(frozen=True)
class MechanismSpec:
    kind: str
    lambda_per_s: float | None = None
    batch_ms: float | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind in (MECH_LIA, MECH_LIA_K) and self.lambda_per_s is None:
            raise ConfigError(f"{self.kind} needs a lambda (per second)")
        if self.kind == MECH_BATCH and (self.batch_ms is None or self.batch_ms <= 0):
            raise ConfigError("batch_vcg needs a positive batch length (ms)")
        if self.kind == MECH_LIA_K and (self.k is None or self.k < 1):
            raise ConfigError("lia_k needs k >= 1")

    @property
    def tag(self) -> str:
        if self.kind == MECH_BATCH:
            return f"{MECH_BATCH}:{self.batch_ms:g}"
        if self.kind == MECH_LIA_K:
            return f"{MECH_LIA_K}:{self.k}"
        return self.kind

    @property
    def params(self) -> DiscountParams | None:
        if self.lambda_per_s is None:
            return None
        return DiscountParams.from_per_second(self.lambda_per_s)


def parse_mechanism(spec) -> MechanismSpec:
    """Mechanism selector: "lia:1.0", "sync_vcg", "batch_vcg:50",
    "lia_k:1.0:2", or an equivalent mapping."""
    if isinstance(spec, MechanismSpec):
        return spec
    if isinstance(spec, dict):
        try:
            return MechanismSpec(**spec)
        except TypeError as exc:
            raise ConfigError(f"bad mechanism spec {spec!r}: {exc}") from None
    if not isinstance(spec, str):
        raise ConfigError(f"bad mechanism spec {spec!r}")
    parts = spec.split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind in (MECH_SYNC, MECH_FAST, MECH_HOLDBACK):
            if args:
                raise ConfigError(f"{kind} takes no parameters")
            return MechanismSpec(kind)
        if kind == MECH_LIA:
            return MechanismSpec(kind, lambda_per_s=float(args[0]) if args else 1.0)
        if kind == MECH_BATCH:
            return MechanismSpec(kind, batch_ms=float(args[0]))
        if kind == MECH_LIA_K:
            lam = float(args[0]) if args else 1.0
            k = int(args[1]) if len(args) > 1 else 1
            return MechanismSpec(kind, lambda_per_s=lam, k=k)
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad mechanism spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown mechanism {kind!r}")


@dataclass(frozen=True)
class AuctionCase:
    """One generated auction instance, ready for paired evaluation."""

    topology_kind: str
    topology_seed: int
    seed: int  # instance index within its cell
    bids: tuple[Bid, ...]
    horizon: ClearingHorizon
    arrivals: np.ndarray
    profile: SlackProfile  # noiseless slacks

    @property
    def true_values(self) -> np.ndarray:
        return np.array([b.true_value for b in self.bids])

    def to_json(self) -> str:
        doc = {
            "topology_ref": {"kind": self.topology_kind, "seed": self.topology_seed},
            "horizon": {"node": self.horizon.node, "time_ms": self.horizon.time},
            "bids": [{"bidder": b.bidder, "true_value": b.true_value,
                      "reported_value": b.reported_value, "node": b.node,
                      "emission_ms": b.emission} for b in self.bids],
        }
        return json.dumps(doc, indent=1)


def gen_instance(topology: Topology, delay_map, n: int, horizon_time: float,
                 emission_window: float, value_lo: float, value_hi: float,
                 seed) -> AuctionCase:
    """n truthful bids: nodes uniform over non-clearing sites, values
    uniform over [value_lo, value_hi], emissions uniform over the window."""
    if n < 1:
        raise ValueError("need at least one bidder")
    rng = np.random.default_rng(seed)
    candidates = np.setdiff1d(np.arange(len(topology)), [delay_map.horizon_node])
    nodes = rng.choice(candidates, size=n)
    values = rng.uniform(value_lo, value_hi, size=n)
    emissions = rng.uniform(0.0, emission_window, size=n)
    horizon = ClearingHorizon(node=delay_map.horizon_node, time=horizon_time)
    bids = tuple(Bid(bidder=i, true_value=float(values[i]),
                     reported_value=float(values[i]), node=int(nodes[i]),
                     emission=float(emissions[i])) for i in range(n))
    profile = compute_slacks(bids, horizon, delay_map)
    arrivals = emissions + delay_map.dist[nodes]
    seed_label = seed if isinstance(seed, int) else -1
    return AuctionCase(topology.kind, topology.seed, seed_label, bids, horizon,
                       arrivals, profile)


def evaluate(spec: MechanismSpec, case: AuctionCase, profile: SlackProfile,
             arrivals: np.ndarray) -> Outcome:
    """Run one mechanism variant on one instance."""
    if spec.kind == MECH_LIA:
        return lia_single(case.bids, profile, spec.params)
    if spec.kind == MECH_LIA_K:
        return lia_k_items(case.bids, profile, spec.params, spec.k)
    if spec.kind == MECH_SYNC:
        return sync_vcg(case.bids, profile, case.horizon)
    if spec.kind == MECH_HOLDBACK:
        return holdback(case.bids, profile, case.horizon)
    if spec.kind == MECH_FAST:
        return fast_vcg(case.bids, profile, arrivals)
    if spec.kind == MECH_BATCH:
        return batch_vcg(case.bids, profile, arrivals, case.horizon, spec.batch_ms)
    raise ConfigError(f"unknown mechanism {spec.kind!r}")


@dataclass
class SweepConfig:
    topologies: list[str] = field(default_factory=lambda: list(GENERATED_KINDS))
    topology_seed: int = 1
    n_list: list[int] = field(default_factory=lambda: [10, 20, 30, 40, 50])
    mechanisms: list = field(default_factory=lambda: [
        "lia:0.5", "lia:1", "lia:2", "sync_vcg", "holdback", "fast_vcg",
        "batch_vcg:10", "batch_vcg:50"])
    instances: int = 1000
    value_range: tuple[float, float] = VALUE_RANGE
    target_feasible: float = TARGET_FEASIBLE
    emission_window_ms: dict = field(default_factory=dict)
    error_model: ErrorModel = NO_ERROR
    decay_per_s: float = 0.0
    master_seed: int = 20_240_001
    pilot_instances: int = 200
    timing_rents: bool = True

    def __post_init__(self):
        self.mechanisms = [parse_mechanism(m) for m in self.mechanisms]
        if isinstance(self.error_model, dict):
            self.error_model = ErrorModel(
                variant=self.error_model.get("model", "none"),
                epsilon_ms=float(self.error_model.get("epsilon_ms", 0.0)))
        self.value_range = (float(self.value_range[0]), float(self.value_range[1]))
        self.validate()

    def validate(self) -> None:
        if self.instances < 1:
            raise ConfigError("instances must be >= 1")
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise ConfigError("n_list must hold positive bidder counts")
        for kind in self.topologies:
            if kind not in GENERATED_KINDS:
                raise ConfigError(f"unknown topology kind {kind!r}")
        if not self.mechanisms:
            raise ConfigError("mechanism list is empty")
        if not 0 < self.target_feasible <= 1:
            raise ConfigError("target_feasible must lie in (0, 1]")
        if self.value_range[1] <= self.value_range[0]:
            raise ConfigError("value_range must be a nonempty interval")
        if self.decay_per_s < 0:
            raise ConfigError("decay_per_s must be nonnegative")

    def window_for(self, kind: str) -> float:
        return float(self.emission_window_ms.get(kind, EMISSION_WINDOW_MS[kind]))

    @staticmethod
    def from_json(text: str) -> "SweepConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config root must be an object")
        known = {f.name for f in dataclasses.fields(SweepConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return SweepConfig(**doc)

    def replaced(self, **kwargs) -> "SweepConfig":
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True)
class MetricsRecord:
    topology: str
    mechanism: str
    n: int
    lambda_per_s: float | None
    epsilon_ms: float
    error_model: str
    seed: int
    sw_ratio_all: float
    sw_ratio_feas: float | None
    reachability: float
    rev_ratio: float
    clearing_latency_ms: float
    compute_time_ms: float
    lai_sup: float
    lai_marginal_1ms: float
    sw_eff: float

    def key(self) -> tuple:
        return (self.topology, self.n, self.seed, self.epsilon_ms,
                self.error_model)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def records_to_csv(records) -> str:
    lines = [",".join(RECORD_COLUMNS)]
    for r in records:
        row = [r.topology, r.mechanism, r.n, r.lambda_per_s, r.epsilon_ms,
               r.error_model, r.seed, r.sw_ratio_all, r.sw_ratio_feas,
               r.reachability, r.rev_ratio, r.clearing_latency_ms,
               None,  # measured time lives in the timings file
               r.lai_sup, r.lai_marginal_1ms]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def timings_to_csv(records) -> str:
    lines = [",".join(TIMING_COLUMNS)]
    for r in records:
        row = [r.topology, r.mechanism, r.n, r.lambda_per_s, r.epsilon_ms,
               r.error_model, r.seed, r.compute_time_ms]
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cell evaluation


@dataclass(frozen=True)
class _CellContext:
    """Everything a worker needs to reproduce one (topology, n) cell."""

    master_seed: int
    cell_index: int
    kind: str
    topology_seed: int
    n: int
    horizon_time: float
    dist: np.ndarray
    regions: np.ndarray
    region_count: int
    delay_span: float
    window: float
    value_range: tuple[float, float]
    mechanisms: tuple[MechanismSpec, ...]
    error_model: ErrorModel
    decay_per_s: float
    timing_rents: bool
    assert_dir: str | None


def _instance_seedseq(ctx: _CellContext, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([ctx.master_seed, ctx.cell_index, index])


def _build_case(ctx: _CellContext, index: int):
    gen_ss, noise_ss, agent_ss = _instance_seedseq(ctx, index).spawn(3)
    rng = np.random.default_rng(gen_ss)
    candidates = np.flatnonzero(np.arange(len(ctx.dist)) != CLEARING_NODE)
    nodes = rng.choice(candidates, size=ctx.n)
    values = rng.uniform(*ctx.value_range, size=ctx.n)
    emissions = rng.uniform(0.0, ctx.window, size=ctx.n)
    horizon = ClearingHorizon(node=CLEARING_NODE, time=ctx.horizon_time)
    bids = tuple(Bid(bidder=i, true_value=float(values[i]),
                     reported_value=float(values[i]), node=int(nodes[i]),
                     emission=float(emissions[i])) for i in range(ctx.n))
    slack = ctx.horizon_time - (emissions + ctx.dist[nodes])
    slack = np.where(np.isnan(slack), -np.inf, slack)
    profile = SlackProfile(true_slack=slack, eta=np.zeros(ctx.n),
                           horizon_time=ctx.horizon_time)
    arrivals = emissions + ctx.dist[nodes]
    case = AuctionCase(ctx.kind, ctx.topology_seed, index, bids, horizon,
                       arrivals, profile)
    return case, nodes, noise_ss, agent_ss


def _noisy_profile(ctx: _CellContext, case: AuctionCase, nodes: np.ndarray,
                   noise_ss: np.random.SeedSequence) -> SlackProfile:
    model = ctx.error_model
    if model.variant == "none" or model.epsilon_ms == 0.0:
        return case.profile
    n = ctx.n
    eps = model.epsilon_ms
    key = (("none", "iid", "clock_bias", "distance", "subnet").index(model.variant),
           int(round(eps * 1000)))
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=noise_ss.entropy,
                               spawn_key=noise_ss.spawn_key + key))
    if model.variant == "iid":
        eta = rng.uniform(-eps, eps, size=n)
    elif model.variant == "clock_bias":
        eta = np.full(n, rng.uniform(-eps, eps))
    elif model.variant == "distance":
        dist = ctx.dist[nodes]
        finite = np.isfinite(dist)
        scale = dist[finite].max() if finite.any() else 1.0
        eta = np.where(finite, -eps * dist / max(scale, 1e-300), 0.0)
    else:  # subnet
        region_eta = rng.uniform(-eps, eps, size=ctx.region_count)
        eta = region_eta[ctx.regions[nodes]]
    return case.profile.with_eta(eta)


def _check_welfare_bound(ctx: _CellContext, spec: MechanismSpec,
                         case: AuctionCase, profile: SlackProfile,
                         outcome: Outcome) -> None:
    """Winner value >= exp(-lambda * (spread + error spread)) * OPT_feas,
    asserted per instance on truthful single-item runs."""
    if not outcome.cleared:
        return
    true_values = case.true_values
    feas = profile.feasible
    opt_feas = float(true_values[feas].max())
    lam = spec.params.lambda_per_ms
    bound = math.exp(-lam * (profile.delta_spread + profile.error_spread)) * opt_feas
    winner_value = float(true_values[outcome.winners[0]])
    if winner_value < bound * (1.0 - 1e-9):  # roundoff allowance only
        path = None
        if ctx.assert_dir:
            path = os.path.join(
                ctx.assert_dir,
                f"violation_{ctx.kind}_n{ctx.n}_i{case.seed}_{spec.tag}.json")
            with open(path, "w") as fh:
                fh.write(case.to_json())
        raise SweepAssertionError(
            f"welfare bound violated: {spec.tag} on {ctx.kind} n={ctx.n} "
            f"instance {case.seed}: winner {winner_value} < bound {bound}"
            + (f" (instance dumped to {path})" if path else ""))


def _eval_instances(ctx: _CellContext, start: int, stop: int) -> list[MetricsRecord]:
    rows = []
    grid = _metrics.reduction_grid(ctx.delay_span)
    decay_per_ms = ctx.decay_per_s / 1000.0
    for index in range(start, stop):
        case, nodes, noise_ss, agent_ss = _build_case(ctx, index)
        profile = _noisy_profile(ctx, case, nodes, noise_ss)
        feas = np.flatnonzero(profile.feasible)
        agent = -1
        if ctx.timing_rents and len(feas):
            agent = int(np.random.default_rng(agent_ss).choice(feas))
        for spec in ctx.mechanisms:
            outcome = evaluate(spec, case, profile, case.arrivals)
            if spec.kind == MECH_LIA:
                _check_welfare_bound(ctx, spec, case, profile, outcome)
            sw_all, sw_feas, reach = _metrics.welfare_ratios(
                outcome, case.bids, profile)
            latency = _metrics.clearing_latency(outcome, case.bids)
            revenue = sum(outcome.payments)
            opt_all = float(case.true_values.max())
            winner_value = (float(case.true_values[outcome.winners[0]])
                            if outcome.cleared else 0.0)
            lai_sup, lai_marginal = np.nan, np.nan
            if agent >= 0:
                run = lambda prof, arr, s=spec: evaluate(s, case, prof, arr)
                lai_sup, lai_marginal = _metrics.sample_timing_rent(
                    run, case.bids, profile, case.arrivals, agent, grid)
            rows.append(MetricsRecord(
                topology=ctx.kind, mechanism=spec.tag, n=ctx.n,
                lambda_per_s=spec.lambda_per_s,
                epsilon_ms=ctx.error_model.epsilon_ms,
                error_model=ctx.error_model.variant, seed=index,
                sw_ratio_all=sw_all, sw_ratio_feas=sw_feas, reachability=reach,
                rev_ratio=revenue / opt_all if opt_all > 0 else 0.0,
                clearing_latency_ms=latency,
                compute_time_ms=outcome.compute_time,
                lai_sup=lai_sup, lai_marginal_1ms=lai_marginal,
                sw_eff=_metrics.effective_welfare(winner_value, latency,
                                                  decay_per_ms)))
    return rows


def _eval_chunk(args) -> list[MetricsRecord]:
    return _eval_instances(*args)


def _prepare_cells(config: SweepConfig, assert_dir=None) -> list[_CellContext]:
    cells = []
    cell_index = 0
    for kind in config.topologies:
        topology = generate(kind, config.topology_seed)
        dist = distances_to_horizon(topology, CLEARING_NODE).dist
        span = topology.delay_span()
        delay_span = span[1] - span[0]
        for n in config.n_list:
            window = config.window_for(kind)
            pilot_seed = np.random.SeedSequence(
                [config.master_seed, cell_index, 1 << 40])
            cal = calibrate_horizon(topology, n, window, config.target_feasible,
                                    pilot_seed, config.pilot_instances,
                                    horizon_node=CLEARING_NODE)
            cells.append(_CellContext(
                master_seed=config.master_seed, cell_index=cell_index,
                kind=kind, topology_seed=config.topology_seed, n=n,
                horizon_time=cal.time, dist=dist, regions=topology.regions,
                region_count=topology.region_count, delay_span=delay_span,
                window=window, value_range=config.value_range,
                mechanisms=tuple(config.mechanisms),
                error_model=config.error_model,
                decay_per_s=config.decay_per_s,
                timing_rents=config.timing_rents, assert_dir=assert_dir))
            cell_index += 1
    return cells


def run_sweep(config: SweepConfig, jobs: int = 1,
              assert_dir=None) -> list[MetricsRecord]:
    """Evaluate every mechanism on the same instances, cell by cell.

    Output order is (cell, instance, mechanism) regardless of worker count.
    """
    cells = _prepare_cells(config, assert_dir)
    tasks = []
    for ctx in cells:
        step = max(1, math.ceil(config.instances / max(jobs * 4, 1)))
        for start in range(0, config.instances, step):
            tasks.append((ctx, start, min(start + step, config.instances)))
    if jobs <= 1:
        chunks = [_eval_chunk(t) for t in tasks]
    else:
        # fork keeps workers usable from interactive parents; results merge
        # in task order, so the worker count cannot affect the output
        method = "fork" if "fork" in __import__("multiprocessing").get_all_start_methods() else "spawn"
        with get_context(method).Pool(processes=jobs) as pool:
            chunks = pool.map(_eval_chunk, tasks)
    return [row for chunk in chunks for row in chunk]


ROBUSTNESS_EPSILONS = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0)
ROBUSTNESS_MODELS = ("iid", "clock_bias", "distance", "subnet")


def run_robustness(config: SweepConfig, epsilons=ROBUSTNESS_EPSILONS,
                   models=ROBUSTNESS_MODELS, jobs: int = 1,
                   assert_dir=None) -> list[MetricsRecord]:
    """Noise sweep: same instances under every (model, epsilon), plus the
    noiseless baseline, so records pair across noise settings."""
    if not any(m.kind == MECH_LIA for m in config.mechanisms):
        raise ConfigError("robustness sweep requires a lia mechanism")
    records = run_sweep(config.replaced(error_model=NO_ERROR), jobs, assert_dir)
    for model in models:
        for eps in epsilons:
            if eps == 0.0:
                continue  # identical to the noiseless baseline by construction
            noisy = config.replaced(error_model=ErrorModel(model, eps))
            records.extend(run_sweep(noisy, jobs, assert_dir))
    return records


def run_large(config: SweepConfig, n: int = 1000, instances: int = 200,
              jobs: int = 1, assert_dir=None) -> list[MetricsRecord]:
    """Large-market stress run: one big cell per topology."""
    big = config.replaced(n_list=[n], instances=instances)
    return run_sweep(big, jobs, assert_dir)


# ---------------------------------------------------------------------------
# aggregation

# summaries cover the seed-deterministic metrics; measured runtimes stay in
# the timings stream so identical configs summarize identically
_SUMMARY_METRICS = ("sw_ratio_all", "sw_ratio_feas", "reachability",
                    "rev_ratio", "clearing_latency_ms",
                    "lai_sup", "lai_marginal_1ms", "sw_eff")
_CI_METRICS = ("sw_ratio_all", "rev_ratio", "clearing_latency_ms")


def _group_key(record: MetricsRecord, keys) -> tuple:
    return tuple(getattr(record, k) for k in keys)


def summarize(records, group_keys=("topology", "mechanism", "n",
                                   "lambda_per_s", "error_model", "epsilon_ms"),
              ci_resamples: int = 2000) -> list[dict]:
    """Per-group mean/median/deciles plus bootstrap CIs on the key ratios.

    Undefined values (e.g. sw_ratio_feas with no feasible bid) are dropped
    from their metric's aggregate, not counted as zero.
    """
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple, list[MetricsRecord]] = {}
    for r in records:
        groups.setdefault(_group_key(r, group_keys), []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        rows = groups[key]
        entry: dict = dict(zip(group_keys, key))
        entry["records"] = len(rows)
        for metric in _SUMMARY_METRICS:
            vals = np.array([getattr(r, metric) for r in rows
                             if getattr(r, metric) is not None], dtype=float)
            vals = vals[~np.isnan(vals)]
            if len(vals) == 0:
                continue
            stats = {
                "mean": float(vals.mean()),
                "median": float(np.median(vals)),
                "p10": float(np.quantile(vals, 0.10)),
                "p90": float(np.quantile(vals, 0.90)),
            }
            if metric in _CI_METRICS and len(vals) > 1:
                digest = zlib.crc32(repr((key, metric)).encode())
                lo, hi, _ = _metrics.bootstrap_ci(vals, level=0.95,
                                                  resamples=ci_resamples,
                                                  seed=digest)
                stats["ci95"] = [lo, hi]
            entry[metric] = stats
        out.append(entry)
    return out


def make_sampler(kind: str, topology_seed: int, n: int,
                 emission_window: float | None = None,
                 target_feasible: float = TARGET_FEASIBLE,
                 value_range: tuple[float, float] = VALUE_RANGE,
                 pilot_seed=0xCA1, pilot_instances: int = 200):
    """Instance sampler over one calibrated (topology, n) cell.

    Returns (sampler, topology); the sampler maps an ``np.random.Generator``
    to a fresh AuctionCase.  Used for timing-rent curve estimation.
    """
    topology = generate(kind, topology_seed)
    delay_map = distances_to_horizon(topology, CLEARING_NODE)
    window = (EMISSION_WINDOW_MS[kind] if emission_window is None
              else emission_window)
    cal = calibrate_horizon(topology, n, window, target_feasible, pilot_seed,
                            pilot_instances, horizon_node=CLEARING_NODE)

    def sample(rng: np.random.Generator) -> AuctionCase:
        return gen_instance(topology, delay_map, n, cal.time, window,
                            value_range[0], value_range[1], rng)

    return sample, topology


def paired_difference(records, select_a: dict, select_b: dict,
                      metric: str = "sw_ratio_all") -> np.ndarray:
    """Per-instance metric differences A - B over records that share an
    instance key; selectors match on record fields (e.g. mechanism tag)."""

    def matches(r, sel):
        return all(getattr(r, k) == v for k, v in sel.items())

    side_a = {r.key(): getattr(r, metric) for r in records if matches(r, select_a)}
    side_b = {r.key(): getattr(r, metric) for r in records if matches(r, select_b)}
    shared = sorted(set(side_a) & set(side_b), key=str)
    if not shared:
        raise ValueError("selectors share no paired instances")
    return np.array([side_a[k] - side_b[k] for k in shared], dtype=float)
