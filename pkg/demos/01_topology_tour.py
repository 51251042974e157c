"""Tour of the three synthetic delay environments.

Generates each topology, reports its delay spectrum, and shows the
earliest-arrival map that every auction instance is built on.
"""

import numpy as np

from liasim import distances_to_horizon, generate

for kind in ("starlink200", "internet100", "dsn30"):
    topology = generate(kind, seed=1)
    mn, mx = topology.delay_span()
    print(f"\n=== {kind} ===")
    print(f"{len(topology)} nodes, {len(topology.links)} directed links, "
          f"{topology.region_count} regions")
    print(f"shortest one-way delay: {mn:.3f} ms .. {mx:,.3f} ms")

    delay_map = distances_to_horizon(topology, 0)
    dist = np.delete(delay_map.dist, 0)
    finite = dist[np.isfinite(dist)]
    print(f"delay to the clearing site: median {np.median(finite):,.2f} ms, "
          f"p95 {np.quantile(finite, 0.95):,.2f} ms")

    # a bid emitted now at the farthest node arrives this much later
    far = int(np.argmax(np.where(np.isfinite(dist), dist, -1))) + 1
    print(f"farthest site {far} needs {delay_map.dist[far]:,.2f} ms "
          f"to reach the clearing site")

doc = generate("dsn30", 1).to_json()
print(f"\nserialized dsn30 topology: {len(doc):,} bytes of JSON")
