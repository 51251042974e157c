"""Batch command-line entry point.

Subcommands: ``topology`` (gen/inspect), ``sweep``, ``robustness``,
``large``, ``lai``, ``verify``.  Exit codes: 0 ok, 1 usage, 2 bad config,
3 assertion or verification failure.  The environment variable ``LIA_OUT``
overrides the output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import harness as H
from . import metrics as M
from . import verify as V
from .harness import ConfigError, SweepAssertionError, SweepConfig
from .topology import GENERATED_KINDS, Topology, distances_to_horizon, generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_ASSERTION = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="lia", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="sweep config JSON")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes")
        p.add_argument("--quiet", action="store_true")

    topo = sub.add_parser("topology", help="generate or inspect a topology")
    tsub = topo.add_subparsers(dest="topology_command", required=True)
    tgen = tsub.add_parser("gen")
    tgen.add_argument("--kind", required=True, choices=GENERATED_KINDS)
    tgen.add_argument("--seed", type=int, default=1)
    tgen.add_argument("--out", required=True, help="output JSON path")
    tins = tsub.add_parser("inspect")
    tins.add_argument("--in", dest="path", help="topology JSON to inspect")
    tins.add_argument("--kind", choices=GENERATED_KINDS)
    tins.add_argument("--seed", type=int, default=1)

    for name in ("sweep", "robustness", "large"):
        common(sub.add_parser(name))

    lai = sub.add_parser("lai", help="timing-rent curves per mechanism")
    common(lai)
    lai.add_argument("--samples", type=int, default=2000,
                     help="instances per curve")

    ver = sub.add_parser("verify", help="golden examples and property suites")
    ver.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ver.add_argument("--quiet", action="store_true")
    return parser


def _load_config(args) -> SweepConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                config = SweepConfig.from_json(fh.read())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}")
    else:
        config = SweepConfig()
    if args.seed is not None:
        config = config.replaced(master_seed=args.seed)
    return config


def _out_dir(args) -> str:
    out = os.environ.get("LIA_OUT", args.out)
    os.makedirs(out, exist_ok=True)
    return out


def _write(path: str, text: str, quiet: bool) -> None:
    with open(path, "w") as fh:
        fh.write(text)
    if not quiet:
        print(f"wrote {path}")


def _summary_doc(config: SweepConfig, records) -> dict:
    doc = {"config": {
        "topologies": list(config.topologies), "n_list": list(config.n_list),
        "mechanisms": [m.tag for m in config.mechanisms],
        "instances": config.instances, "master_seed": config.master_seed,
        "error_model": config.error_model.variant,
        "epsilon_ms": config.error_model.epsilon_ms,
    }, "groups": H.summarize(records)}
    paired = {}
    tags = {m.tag: m for m in config.mechanisms}
    reference = next((t for t in ("sync_vcg", "holdback") if t in tags), None)
    if reference:
        for tag, spec in tags.items():
            if tag == reference:
                continue
            sel_a = {"mechanism": reference}
            sel_b = {"mechanism": spec.kind}
            if spec.lambda_per_s is not None:
                sel_b["lambda_per_s"] = spec.lambda_per_s
            if spec.kind == "batch_vcg":
                sel_b = {"mechanism": tag}
            try:
                diffs = H.paired_difference(records, sel_a, sel_b)
            except ValueError:
                continue
            lo, hi, mean = M.bootstrap_ci(diffs, resamples=2000, seed=7)
            paired[f"{reference}-minus-{tag}"] = {
                "mean": mean, "ci95": [lo, hi], "instances": len(diffs)}
    doc["paired_sw_ratio_all"] = paired
    return doc


def _print_comparison(records, config: SweepConfig) -> None:
    n = max(config.n_list)
    print(f"\nmechanism comparison at n={n}:")
    print(f"{'mechanism':>16} {'SW/OPT_all':>11} {'rent (sup g)':>13} "
          f"{'latency ms':>11}")
    for spec in config.mechanisms:
        rows = [r for r in records if r.mechanism == spec.tag and r.n == n]
        if not rows:
            continue
        swr = np.mean([r.sw_ratio_all for r in rows])
        lai = max(0.0, float(np.nanmean([r.lai_sup for r in rows])))
        lat = np.mean([r.clearing_latency_ms for r in rows])
        print(f"{spec.tag:>16} {swr:>11.4f} {lai:>13.4f} {lat:>11.2f}")


def _run_batch(args, runner) -> int:
    config = _load_config(args)
    out = _out_dir(args)
    records = runner(config, args.jobs, out)
    _write(os.path.join(out, "records.csv"), H.records_to_csv(records),
           args.quiet)
    _write(os.path.join(out, "timings.csv"), H.timings_to_csv(records),
           args.quiet)
    summary = _summary_doc(config, records)
    _write(os.path.join(out, "summary.json"),
           json.dumps(summary, indent=1, sort_keys=True), args.quiet)
    if not args.quiet:
        _print_comparison(records, config)
    return EXIT_OK


def cmd_sweep(args) -> int:
    return _run_batch(args, lambda cfg, jobs, out:
                      H.run_sweep(cfg, jobs=jobs, assert_dir=out))


def cmd_robustness(args) -> int:
    return _run_batch(args, lambda cfg, jobs, out:
                      H.run_robustness(cfg, jobs=jobs, assert_dir=out))


def cmd_large(args) -> int:
    return _run_batch(args, lambda cfg, jobs, out:
                      H.run_large(cfg, jobs=jobs, assert_dir=out))


def cmd_lai(args) -> int:
    config = _load_config(args)
    if not config.mechanisms:
        raise ConfigError("timing-rent curves need at least one mechanism")
    out = _out_dir(args)
    n = max(config.n_list)
    lines = ["topology,mechanism,lambda,delta_ms,g_mean,g_ci_lo,g_ci_hi"]
    for kind in config.topologies:
        sampler, topology = H.make_sampler(
            kind, config.topology_seed, n,
            emission_window=config.emission_window_ms.get(kind),
            target_feasible=config.target_feasible,
            value_range=config.value_range,
            pilot_seed=np.random.SeedSequence([config.master_seed, 0xCA1]))
        span = topology.delay_span()
        grid = M.reduction_grid(span[1] - span[0])
        for spec in config.mechanisms:
            factory = (lambda case, s=spec:
                       lambda prof, arr: H.evaluate(s, case, prof, arr))
            curve = M.lai_curve(factory, sampler, grid, args.samples,
                                np.random.SeedSequence(
                                    [config.master_seed, 0x1a1,
                                     hashable_tag(kind, spec.tag)]))
            for j, delta in enumerate(curve.delta_grid):
                if curve.counts[j] == 0:
                    continue
                gains = curve.gain_samples[:, j]
                gains = gains[~np.isnan(gains)]
                lo, hi, mean = M.bootstrap_ci(gains, resamples=2000, seed=j)
                lam = "" if spec.lambda_per_s is None else repr(spec.lambda_per_s)
                lines.append(f"{kind},{spec.tag},{lam},{delta!r},"
                             f"{mean!r},{lo!r},{hi!r}")
            if not args.quiet:
                sup = M.lai_index(curve)
                print(f"{kind} {spec.tag}: population index {sup:.4f}")
    _write(os.path.join(out, "lai_curves.csv"), "\n".join(lines) + "\n",
           args.quiet)
    return EXIT_OK


def hashable_tag(kind: str, tag: str) -> int:
    import zlib
    return zlib.crc32(f"{kind}/{tag}".encode())


def cmd_topology(args) -> int:
    if args.topology_command == "gen":
        topology = generate(args.kind, args.seed)
        with open(args.out, "w") as fh:
            fh.write(topology.to_json())
        print(f"wrote {args.out}")
        return EXIT_OK
    if args.path:
        with open(args.path) as fh:
            topology = Topology.from_json(fh.read())
    elif args.kind:
        topology = generate(args.kind, args.seed)
    else:
        raise ConfigError("inspect needs --in or --kind")
    delays = np.array([l.delay for l in topology.links])
    mn, mx = topology.delay_span()
    dm = distances_to_horizon(topology, 0)
    finite = dm.dist[np.isfinite(dm.dist)]
    print(f"kind: {topology.kind}  seed: {topology.seed}")
    print(f"nodes: {len(topology.nodes)}  links: {len(topology.links)}  "
          f"regions: {topology.region_count}")
    print(f"link delay ms: min {delays.min():.3f}  "
          f"median {np.median(delays):.3f}  max {delays.max():.3f}")
    print(f"shortest one-way delay ms: min {mn:.3f}  max {mx:.3f}")
    print(f"delay to clearing site ms: min {finite[finite > 0].min():.3f}  "
          f"median {np.median(finite):.3f}  max {finite.max():.3f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    log = (lambda *a, **k: None) if args.quiet else print
    checks = V.run_verification(jobs=args.jobs, log=log)
    failed = [c for c in checks if not c.ok]
    if failed:
        for c in failed:
            print(f"FAIL {c.name}: {c.detail}", file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"topology": cmd_topology, "sweep": cmd_sweep,
                "robustness": cmd_robustness, "large": cmd_large,
                "lai": cmd_lai, "verify": cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepAssertionError as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
