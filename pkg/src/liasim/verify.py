"""Golden-value and statistical verification of the toolkit.

Every check pins a published worked example or summary statistic with its
tolerance.  ``lia verify`` runs the whole registry; the acceptance test
suite calls the same functions so the command line and CI agree on what
"reproduced" means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import harness as H
from . import metrics as M
from .auction import (Bid, ClearingHorizon, DiscountParams, SlackProfile,
                      calibrate_horizon, discount)
from .mechanisms import (batch_vcg, critical_value, endogenous_slack_demo,
                         fast_vcg, holdback, lia_k_items, lia_single,
                         sync_vcg, utility)
from .topology import distances_to_horizon, generate

LAMBDA_1PS = DiscountParams.from_per_second(1.0)


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str


def _check(name: str, ok: bool, detail: str) -> Check:
    return Check(name, bool(ok), detail)


def _band(name: str, value: float, center: float, tol: float) -> Check:
    return _check(name, abs(value - center) <= tol,
                  f"{value:.6g} vs {center:g} +/- {tol:g}")


# ---------------------------------------------------------------------------
# worked examples: pure arithmetic


def example_profile(slacks, horizon_time: float = 1e9) -> SlackProfile:
    arr = np.asarray(slacks, dtype=float)
    return SlackProfile(true_slack=arr, eta=np.zeros(len(arr)),
                        horizon_time=horizon_time)


def timing_rent_example():
    """Two bidders: 100 with 10 ms of slack against 120 arriving at the
    horizon; the proximity advantage is discounted away at lambda=0.05/ms."""
    bids = [Bid(1, 100.0, 100.0, node=0, emission=0.0),
            Bid(2, 120.0, 120.0, node=0, emission=0.0)]
    profile = example_profile([10.0, 0.0])
    return lia_single(bids, profile, DiscountParams(0.05))


def k_items_example():
    """Four bidders, two identical items, lambda=0.05/ms."""
    values = [100.0, 120.0, 90.0, 80.0]
    slacks = [10.0, 30.0, 5.0, 2.0]
    bids = [Bid(i + 1, v, v, node=0, emission=0.0)
            for i, v in enumerate(values)]
    return lia_k_items(bids, example_profile(slacks), DiscountParams(0.05), k=2)


def arithmetic_checks() -> list[Check]:
    checks = []
    out = timing_rent_example()
    exact = 100.0 * math.exp(-0.5)
    checks.append(_check("timing-rent winner", out.winners == (2,),
                         f"winners {out.winners}"))
    checks.append(_check(
        "timing-rent payment",
        abs(out.payments[0] - exact) <= 1e-9 and abs(out.payments[0] - 60.6) <= 0.1,
        f"{out.payments[0]:.4f} vs exact {exact:.4f} (printed 60.6)"))
    checks.append(_band("timing-rent winner utility",
                        utility(2, out, 120.0), 59.4, 0.1))

    kout = k_items_example()
    checks.append(_check("k-items winners", set(kout.winners) == {3, 4},
                         f"winners {kout.winners}"))
    pay = dict(zip(kout.winners, kout.payments))
    checks.append(_band("k-items payment of bidder 3", pay[3], 77.88, 0.01))
    checks.append(_band("k-items payment of bidder 4", pay[4], 67.03, 0.01))

    checks.append(_band("discount 100 @ 10ms, lambda 0.05/ms",
                        discount(100.0, 10.0, DiscountParams(0.05)), 60.6, 0.1))
    checks.append(_band("discount 120 @ 30ms, lambda 0.05/ms",
                        discount(120.0, 30.0, DiscountParams(0.05)), 26.77, 0.01))
    checks.append(_check("discount at zero slack is the identity",
                         discount(7.25, 0.0, DiscountParams(0.05)) == 7.25, "exact"))
    for spread, factor in ((50.98, 0.950), (13.15, 0.987), (20.0 + 2 * 2.0, 0.976)):
        checks.append(_band(f"discount factor at spread {spread} ms",
                            discount(1.0, spread, LAMBDA_1PS), factor, 0.001))

    # slack arithmetic from the worked horizon examples
    checks.append(_band("slack: 50ms horizon, 1.8ms delay",
                        50.0 - (0.0 + 1.8), 48.2, 1e-9))
    checks.append(_band("slack: 600s horizon, Mars-range delay",
                        600_000.0 - (0.0 + 498_000.0), 102_000.0, 1e-9))

    # first-price marginal gain: win probability 0.6 -> 0.65 at fixed bid 80
    gain = 0.65 * (100.0 - 80.0) - 0.60 * (100.0 - 80.0)
    checks.append(_band("first-price 1ms timing gain", gain, 1.0, 1e-12))

    # stylized cost of waiting: with the delay gap at (1/r) ln(1/eps), both
    # clearing now and waiting end at an effective ratio of eps
    r, eps = 0.001, 0.05
    gap = math.log(1.0 / eps) / r
    now_ratio = M.effective_welfare(1.0, 0.0, r) / (1.0 / eps)
    wait_ratio = M.effective_welfare(1.0 / eps, gap, r) / (1.0 / eps)
    checks.append(_band("waiting cost: clear-now ratio", now_ratio, eps, 1e-12))
    checks.append(_band("waiting cost: wait ratio", wait_ratio, eps, 1e-9))
    checks.append(_band("decayed welfare 100 over 1s at 1/s",
                        M.effective_welfare(100.0, 1000.0, 0.001), 36.79, 0.01))

    demo = endogenous_slack_demo(100.0, 10.0, 0.0, DiscountParams(0.05))
    checks.append(_band("endogenous slack rival value", demo.rival_value, 80.3, 0.05))
    checks.append(_check(
        "endogenous slack flips the outcome",
        demo.utility_at_slack == 0.0 and demo.utility_at_reduced_slack > 0.0,
        f"{demo.utility_at_slack} -> {demo.utility_at_reduced_slack:.3f}"))
    return checks


# ---------------------------------------------------------------------------
# topology calibration


def topology_checks() -> list[Check]:
    checks = []
    star = generate("starlink200", 1)
    mn, mx = star.delay_span()
    checks.append(_check("starlink min one-way delay", 1.5 <= mn <= 2.5,
                         f"{mn:.3f} in [1.5, 2.5] (published 1.8)"))
    checks.append(_check("starlink max one-way delay", 40.0 <= mx <= 55.0,
                         f"{mx:.3f} in [40, 55] (published 47.3)"))
    dm = distances_to_horizon(star, 0)
    checks.append(_check("delay to self is zero", dm.dist[0] == 0.0, "exact"))

    net = generate("internet100", 1)
    mn, mx = net.delay_span()
    checks.append(_check("internet min one-way delay", mn <= 1.0,
                         f"{mn:.3f} <= 1 (co-located floor 0.3)"))
    checks.append(_check("internet co-located pair at the floor", mn == 0.3,
                         f"{mn:.3f}"))
    checks.append(_check("internet max one-way delay", 70.0 <= mx <= 100.0,
                         f"{mx:.3f} in [70, 100] (published 89.2)"))

    dsn = generate("dsn30", 1)
    dm = distances_to_horizon(dsn, 0)
    mars = min(l.delay for l in dsn.links if 0 in (l.src, l.dst)
               and l.delay > 400_000 and l.delay < 600_000)
    checks.append(_band("dsn Mars closest-approach link (ms)", mars, 498_000.0, 1e-6))
    jupiter = float(np.max(dm.dist[np.isfinite(dm.dist)]))
    checks.append(_band("dsn Jupiter max-separation delay (ms)", jupiter,
                        4_416_000.0, 1.0))
    mn, mx = dsn.delay_span()
    checks.append(_check("dsn delay span", mn <= 2.0 and 3.0e6 <= mx <= 4.6e6,
                         f"[{mn:.1f}, {mx:.3g}]"))
    return checks


def horizon_checks(instances: int = 1000) -> list[Check]:
    """Feasible fractions and slack spreads under the 95% horizon policy."""
    checks = []
    targets = {"starlink200": (0.949, 0.02), "dsn30": (0.931, 0.03)}
    for kind, (target, tol) in targets.items():
        topo = generate(kind, 1)
        dm = distances_to_horizon(topo, 0)
        window = H.EMISSION_WINDOW_MS[kind]
        cal = calibrate_horizon(topo, 50, window, H.TARGET_FEASIBLE,
                                np.random.SeedSequence([99, hash(kind) % 1000]))
        fracs, spreads = [], []
        for i in range(instances):
            case = H.gen_instance(topo, dm, 50, cal.time, window, 0.0, 1000.0,
                                  np.random.SeedSequence([17, i]))
            fracs.append(case.profile.feasible.mean())
            spreads.append(case.profile.delta_spread)
        checks.append(_band(f"{kind} feasible fraction at n=50",
                            float(np.mean(fracs)), target, tol))
        if kind == "starlink200":
            p50 = float(np.median(spreads))
            checks.append(_check("starlink slack-spread median",
                                 0.8 * 50.98 <= p50 <= 1.2 * 50.98,
                                 f"{p50:.2f} within 20% of 50.98"))
        checks.append(_check(
            f"{kind} horizon targets full coverage at 1.0",
            calibrate_horizon(topo, 50, window, 1.0,
                              np.random.SeedSequence(5)).achieved_fraction == 1.0,
            "pilot fraction 1.0"))
    return checks


# ---------------------------------------------------------------------------
# mechanism equivalences (small randomized suites)


def mechanism_checks(trials: int = 400, seed: int = 5150) -> list[Check]:
    checks = []
    rng = np.random.default_rng(seed)
    zero = DiscountParams(0.0)
    lam_zero_ok = True
    hold_ok = True
    for _ in range(trials):
        n = int(rng.integers(2, 12))
        values = rng.uniform(0.0, 1000.0, n)
        slacks = rng.uniform(-5.0, 80.0, n)
        if not (slacks >= 0).any():
            slacks[0] = abs(slacks[0])
        bids = [Bid(i, float(values[i]), float(values[i]), 0, 0.0)
                for i in range(n)]
        profile = example_profile(slacks, horizon_time=100.0)
        horizon = ClearingHorizon(0, 100.0)
        lia0 = lia_single(bids, profile, zero)
        sync = sync_vcg(bids, profile, horizon)
        if lia0.winners != sync.winners or lia0.payments != sync.payments:
            lam_zero_ok = False
        hold = holdback(bids, profile, horizon)
        if hold.winners != sync.winners or hold.payments != sync.payments:
            hold_ok = False
    checks.append(_check("lambda=0 clearing equals the synchronous baseline",
                         lam_zero_ok, f"{trials} paired instances"))
    checks.append(_check("holdback equals the synchronous baseline",
                         hold_ok, f"{trials} paired instances"))

    bids = [Bid(1, 100.0, 100.0, 0, 0.0), Bid(2, 120.0, 120.0, 0, 0.0)]
    profile = example_profile([10.0, 0.0])
    crit = critical_value(1, bids, profile, DiscountParams(0.05))
    paid = timing_rent_example().payments[0]
    checks.append(_check("critical value equals the clearing payment",
                         abs(crit - 100.0 * math.exp(-0.5)) < 1e-9
                         and abs(crit - paid) < 1e-9,
                         f"{crit:.4f} vs paid {paid:.4f}"))
    solo = lia_single([Bid(7, 42.0, 42.0, 0, 0.0)], example_profile([1.0]),
                      LAMBDA_1PS)
    checks.append(_check("lone feasible bid wins and pays nothing",
                         solo.winners == (7,) and solo.payments == (0.0,),
                         str(solo.payments)))

    arr = np.array([5.0, 9.0])
    prof2 = example_profile([5.0, 1.0], horizon_time=10.0)
    b2 = [Bid(0, 10.0, 10.0, 0, 0.0), Bid(1, 700.0, 700.0, 0, 0.0)]
    fast = fast_vcg(b2, prof2, arr)
    checks.append(_check("arrival order beats value under fast clearing",
                         fast.winners == (0,) and fast.payments == (0.0,)
                         and fast.decision_time == 5.0, str(fast.to_dict())))
    tie = fast_vcg([Bid(0, 7.0, 7.0, 0, 0.0), Bid(1, 4.0, 4.0, 0, 0.0)],
                   example_profile([1.0, 1.0], 10.0), np.array([3.0, 3.0]))
    checks.append(_check("simultaneous arrivals clear by second price",
                         tie.winners == (0,) and tie.payments == (4.0,),
                         str(tie.to_dict())))

    rng = np.random.default_rng(seed + 1)
    demo_ok = True
    for _ in range(1000):
        theta = float(rng.uniform(1.0, 1000.0))
        s = float(rng.uniform(1.0, 60.0))
        s_red = float(rng.uniform(0.0, s * 0.95))
        lam = float(rng.uniform(0.005, 0.1))
        rep = endogenous_slack_demo(theta, s, s_red, DiscountParams(lam))
        if not rep.utility_at_reduced_slack > rep.utility_at_slack == 0.0:
            demo_ok = False
    checks.append(_check("slack reduction always profits in the construction",
                         demo_ok, "1000 random draws"))
    return checks


# ---------------------------------------------------------------------------
# simulation statistics


STARLINK_SWEEP_MECHS = ("lia:0.5", "lia:1", "lia:2", "sync_vcg", "holdback",
                        "fast_vcg", "batch_vcg:10", "batch_vcg:50")


def starlink_sweep_records(instances: int = 1000, jobs: int = 1):
    cfg = H.SweepConfig(topologies=["starlink200"], n_list=[10, 20, 30, 40, 50],
                        instances=instances, mechanisms=list(STARLINK_SWEEP_MECHS))
    return H.run_sweep(cfg, jobs=jobs)


def _mean(records, metric, **filters) -> float:
    vals = [getattr(r, metric) for r in records
            if all(getattr(r, k) == v for k, v in filters.items())]
    arr = np.array([v for v in vals if v is not None], dtype=float)
    return float(np.nanmean(arr))


def _lai_of(records, mechanism, n=50, lambda_per_s=None) -> float:
    sel = {"mechanism": mechanism, "n": n}
    if lambda_per_s is not None:
        sel["lambda_per_s"] = lambda_per_s
    return max(0.0, _mean(records, "lai_sup", **sel))


def starlink_sweep_checks(records) -> list[Check]:
    checks = []
    checks.append(_band("starlink n=50 welfare ratio",
                        _mean(records, "sw_ratio_all", mechanism="lia",
                              lambda_per_s=1.0, n=50), 0.997, 0.005))
    checks.append(_band("starlink clearing latency, slack-discounted",
                        _mean(records, "clearing_latency_ms", mechanism="lia",
                              lambda_per_s=1.0, n=50), 68.97, 2.0))
    checks.append(_band("starlink clearing latency, synchronous",
                        _mean(records, "clearing_latency_ms",
                              mechanism="sync_vcg", n=50), 69.21, 2.0))
    checks.append(_band("fast clearing welfare collapse",
                        _mean(records, "sw_ratio_all", mechanism="fast_vcg",
                              n=50), 0.505, 0.05))
    fast_lai = _lai_of(records, "fast_vcg")
    checks.append(_check("fast clearing timing rent",
                         abs(fast_lai - 314.95) <= 0.15 * 314.95,
                         f"{fast_lai:.1f} within 15% of 314.95"))
    for lam in (0.5, 1.0, 2.0):
        lai = _lai_of(records, "lia", lambda_per_s=lam)
        checks.append(_check(f"discounted clearing rent-free at {lam}/s",
                             lai == 0.0, f"population index {lai}"))
    sync_lai = _lai_of(records, "sync_vcg")
    checks.append(_check("fast rent dwarfs any synchronous residual",
                         fast_lai > 100.0 * sync_lai,
                         f"{fast_lai:.1f} > 100 x {sync_lai:.4f}"))
    checks.append(_band("batched clearing welfare (50 ms window)",
                        _mean(records, "sw_ratio_all",
                              mechanism="batch_vcg:50", n=50), 0.994, 0.01))
    checks.append(_band("batched clearing latency (50 ms window)",
                        _mean(records, "clearing_latency_ms",
                              mechanism="batch_vcg:50", n=50), 66.24, 3.0))

    d_sync = H.paired_difference(records, {"mechanism": "sync_vcg"},
                                 {"mechanism": "lia", "lambda_per_s": 1.0})
    checks.append(_band("paired welfare gap to full waiting",
                        float(d_sync.mean()), 0.00137, 0.001))
    d_fast = H.paired_difference(records, {"mechanism": "lia",
                                           "lambda_per_s": 1.0},
                                 {"mechanism": "fast_vcg"})
    checks.append(_band("paired welfare gain over fast clearing",
                        float(d_fast.mean()), 0.473, 0.03))

    # per-instance waiting order: fast <= batch <= sync, discounted <= sync
    by_key: dict = {}
    for r in records:
        by_key.setdefault(r.key(), {})[r.mechanism] = r.clearing_latency_ms
    ordered = all(
        row["fast_vcg"] <= row["batch_vcg:10"] + 1e-9
        and row["batch_vcg:10"] <= row["batch_vcg:50"] + 1e-9
        and row["batch_vcg:50"] <= row["sync_vcg"] + 1e-9
        and row["lia"] <= row["sync_vcg"] + 1e-9
        for row in by_key.values())
    checks.append(_check("waiting order holds on every instance", ordered,
                         f"{len(by_key)} instances"))

    hold_ok = all(
        a.sw_ratio_all == b.sw_ratio_all and a.rev_ratio == b.rev_ratio
        for a, b in zip(
            sorted((r for r in records if r.mechanism == "sync_vcg"),
                   key=lambda r: r.key()),
            sorted((r for r in records if r.mechanism == "holdback"),
                   key=lambda r: r.key())))
    checks.append(_check("holdback pairs exactly with the synchronous run",
                         hold_ok, "all instances"))
    return checks


def market_depth_checks(jobs: int = 1, instances: int = 1000,
                        large_instances: int = 200) -> list[Check]:
    checks = []
    cfg = H.SweepConfig(topologies=["internet100"], n_list=[50],
                        instances=instances, mechanisms=["lia:1"])
    recs = H.run_sweep(cfg, jobs=jobs)
    checks.append(_band("internet n=50 welfare ratio",
                        _mean(recs, "sw_ratio_all"), 0.9988, 0.004))
    checks.append(_check("internet rent-free at n=50",
                         _lai_of(recs, "lia", lambda_per_s=1.0) == 0.0, "index 0"))

    cfg = H.SweepConfig(topologies=["dsn30"], n_list=[10, 50],
                        instances=instances, mechanisms=["lia:1"])
    recs = H.run_sweep(cfg, jobs=jobs)
    checks.append(_band("deep-space n=10 welfare ratio",
                        _mean(recs, "sw_ratio_all", n=10), 0.769, 0.05))
    checks.append(_band("deep-space n=50 welfare ratio",
                        _mean(recs, "sw_ratio_all", n=50), 0.946, 0.03))

    large = H.run_large(H.SweepConfig(mechanisms=["lia:1"], timing_rents=False),
                        n=1000, instances=large_instances, jobs=jobs)
    for kind, center, tol in (("starlink200", 0.998, 0.004),
                              ("internet100", 0.9992, 0.003),
                              ("dsn30", 0.996, 0.005)):
        checks.append(_band(f"large-market welfare, {kind}",
                            _mean(large, "sw_ratio_all", topology=kind),
                            center, tol))
    times = np.array([r.compute_time_ms for r in large])
    checks.append(_check("winner determination under 1 ms at n=1000",
                         float(np.median(times)) <= 1.0,
                         f"median {np.median(times):.3f} ms"))
    return checks


def robustness_checks(jobs: int = 1, instances: int = 250) -> list[Check]:
    checks = []
    cfg = H.SweepConfig(topologies=["starlink200", "internet100"], n_list=[50],
                        instances=instances, mechanisms=["lia:1"])
    records = H.run_robustness(cfg, jobs=jobs)
    base = {(r.topology, r.seed): (r.sw_ratio_all, r.rev_ratio)
            for r in records if r.error_model == "none"}
    for model in H.ROBUSTNESS_MODELS:
        swr_all, lai_all = [], []
        for eps in H.ROBUSTNESS_EPSILONS:
            rows = [r for r in records
                    if (r.error_model, r.epsilon_ms) == (model, eps)
                    or (eps == 0.0 and r.error_model == "none")]
            swr_all.append(_mean(rows, "sw_ratio_all"))
            lai_all.append(max(0.0, float(np.nanmean(
                [r.lai_sup for r in rows]))))
        checks.append(_check(f"welfare robust under {model} noise",
                             min(swr_all) >= 0.99,
                             f"min mean ratio {min(swr_all):.4f} over eps<=10"))
        checks.append(_check(f"rent-free under {model} noise",
                             max(lai_all) == 0.0, f"max index {max(lai_all)}"))
    bias_rows = [r for r in records if r.error_model == "clock_bias"]
    exact = all((r.sw_ratio_all, r.rev_ratio) == base[(r.topology, r.seed)]
                for r in bias_rows)
    checks.append(_check("common clock bias never changes the outcome", exact,
                         f"{len(bias_rows)} noisy records vs baseline"))
    return checks


def run_verification(jobs: int = 1, log=print) -> list[Check]:
    checks = []
    log("== worked examples ==")
    checks += _run(arithmetic_checks(), log)
    log("== topology calibration ==")
    checks += _run(topology_checks(), log)
    log("== horizon policy ==")
    checks += _run(horizon_checks(), log)
    log("== mechanism equivalences ==")
    checks += _run(mechanism_checks(), log)
    log("== constellation sweep ==")
    checks += _run(starlink_sweep_checks(starlink_sweep_records(jobs=jobs)), log)
    log("== market depth ==")
    checks += _run(market_depth_checks(jobs=jobs), log)
    log("== noise robustness ==")
    checks += _run(robustness_checks(jobs=jobs), log)
    failed = [c for c in checks if not c.ok]
    log(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return checks


def _run(checks: list[Check], log) -> list[Check]:
    for c in checks:
        log(f"  {'PASS' if c.ok else 'FAIL'}  {c.name}: {c.detail}")
    return checks
