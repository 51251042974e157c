"""Timing-rent curves: what is a millisecond of delay advantage worth?

Estimates the expected utility gain from shaving delay, per mechanism, by
paired counterfactuals (one designated bid is advanced, everything else held
fixed).  Under fast clearing the curve climbs steeply; under slack-discounted
clearing every counterfactual gain is nonpositive.
"""

import numpy as np

from liasim.harness import MechanismSpec, evaluate, make_sampler
from liasim.metrics import lai_curve, lai_index, reduction_grid

sampler, topology = make_sampler("starlink200", topology_seed=1, n=50)
span = topology.delay_span()
grid = reduction_grid(span[1] - span[0])

for spec in (MechanismSpec("fast_vcg"), MechanismSpec("sync_vcg"),
             MechanismSpec("lia", lambda_per_s=1.0)):
    factory = (lambda case, s=spec:
               lambda prof, arr: evaluate(s, case, prof, arr))
    curve = lai_curve(factory, sampler, grid, samples=800, seed=5)
    print(f"\n{spec.tag}: population rent index {lai_index(curve):.3f}")
    for delta, g, count in zip(curve.delta_grid, curve.g_values, curve.counts):
        if count == 0:
            continue
        bar = "#" * int(max(0.0, g) / 8.0)
        print(f"  advance {delta:>7.2f} ms: mean gain {g:>8.3f}  {bar}")
