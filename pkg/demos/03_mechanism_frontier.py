"""Welfare / fairness / latency trade-off across mechanisms.

A small paired sweep on the LEO constellation: every mechanism sees the
same instances, so the comparison needs no variance correction.
"""

import numpy as np

from liasim.harness import SweepConfig, paired_difference, run_sweep

config = SweepConfig(
    topologies=["starlink200"], n_list=[50], instances=300,
    mechanisms=["lia:0.5", "lia:1", "lia:2", "sync_vcg", "holdback",
                "fast_vcg", "batch_vcg:10", "batch_vcg:50"],
    master_seed=11)
records = run_sweep(config, jobs=2)

print(f"{'mechanism':>14} {'SW/OPT_all':>11} {'rent sup g':>11} "
      f"{'latency ms':>11}")
for spec in config.mechanisms:
    rows = [r for r in records if r.mechanism == spec.tag]
    swr = np.mean([r.sw_ratio_all for r in rows])
    rent = max(0.0, float(np.nanmean([r.lai_sup for r in rows])))
    lat = np.mean([r.clearing_latency_ms for r in rows])
    print(f"{spec.tag:>14} {swr:>11.4f} {rent:>11.3f} {lat:>11.2f}")

gap = paired_difference(records, {"mechanism": "sync_vcg"},
                        {"mechanism": "lia", "lambda_per_s": 1.0})
fast = paired_difference(records, {"mechanism": "lia", "lambda_per_s": 1.0},
                         {"mechanism": "fast_vcg"})
print(f"\npaired welfare gap to full waiting:   {gap.mean():+.5f}")
print(f"paired welfare gain over fast clears: {fast.mean():+.4f}")
print("\nslack discounting pays a hair of welfare for zero timing rent,")
print("while clearing earlier than the synchronized horizon.")
