import numpy as np
import pytest
from conftest import brute_force_delay, random_topology

from liasim.topology import (C_KM_PER_MS, Link, Node, Topology,
                             distances_to_horizon, earliest_arrival, generate,
                             generate_dsn, generate_internet,
                             generate_starlink)

BANDS = {
    "starlink200": ((1.5, 2.5), (40.0, 55.0)),
    "internet100": ((0.0, 1.0), (70.0, 100.0)),
    "dsn30": ((0.0, 2.0), (3.0e6, 4.6e6)),
}


@pytest.fixture(scope="module")
def starlink():
    return generate_starlink(1)


@pytest.mark.parametrize("kind", list(BANDS))
def test_delay_span_calibration(kind):
    topo = generate(kind, 1)
    (min_lo, min_hi), (max_lo, max_hi) = BANDS[kind]
    mn, mx = topo.delay_span()
    assert min_lo <= mn <= min_hi
    assert max_lo <= mx <= max_hi


def test_generator_counts(starlink):
    assert len(starlink) == 200
    assert starlink.region_count == 10
    assert len(generate_internet(1)) == 100
    assert len(generate_dsn(1)) == 30


def test_links_respect_light_speed(starlink):
    pos = starlink.positions
    for link in starlink.links[:2000]:
        straight = np.linalg.norm(pos[link.src] - pos[link.dst])
        assert link.delay >= straight / C_KM_PER_MS * (1 - 1e-12)


def test_internet_colocated_pair_sits_at_floor():
    topo = generate_internet(1)
    mn, _ = topo.delay_span()
    assert mn == 0.3


def test_dsn_anchor_delays():
    topo = generate_dsn(3)
    dm = distances_to_horizon(topo, 0)
    mars_links = [l.delay for l in topo.links
                  if l.src == 0 and 4.0e5 < l.delay < 6.0e5]
    assert min(mars_links) == 498_000.0
    finite = dm.dist[np.isfinite(dm.dist)]
    assert finite.max() == pytest.approx(4_416_000.0, abs=1.0)
    assert dm.dist[0] == 0.0


def test_distance_to_self_is_zero(starlink):
    dm = distances_to_horizon(starlink, 7)
    assert dm.dist[7] == 0.0


def test_two_node_single_link():
    topo = Topology("custom", 0, 1,
                    [Node(0, (0.0, 0.0, 0.0), 0), Node(1, (1.0, 0.0, 0.0), 0)],
                    [Link(1, 0, 10.0)])
    dm = distances_to_horizon(topo, 0)
    assert dm.dist[1] == 10.0
    assert dm.dist[0] == 0.0


def test_unreachable_node_maps_to_infinity():
    topo = Topology("custom", 0, 1,
                    [Node(0, (0.0, 0.0, 0.0), 0), Node(1, (1.0, 0.0, 0.0), 0),
                     Node(2, (2.0, 0.0, 0.0), 0)],
                    [Link(1, 0, 5.0), Link(0, 2, 3.0)])
    dm = distances_to_horizon(topo, 0)
    assert dm.dist[1] == 5.0
    assert np.isinf(dm.dist[2])
    assert earliest_arrival(topo, 2, 1.0, dm) == np.inf


def test_invalid_horizon_node_rejected(starlink):
    with pytest.raises(ValueError):
        distances_to_horizon(starlink, 200)


def test_shortest_paths_match_exhaustive_enumeration():
    rng = np.random.default_rng(42)
    for _ in range(60):
        n = int(rng.integers(2, 9))
        topo = random_topology(rng, n, edge_prob=float(rng.uniform(0.2, 0.8)))
        dm = distances_to_horizon(topo, 0)
        for v in range(n):
            assert dm.dist[v] == brute_force_delay(topo, v, 0)


def test_starlink_subgraph_matches_enumeration(starlink):
    keep = list(range(6))
    nodes = [Node(i, starlink.nodes[i].position, 0) for i in keep]
    links = [l for l in starlink.links if l.src in keep and l.dst in keep]
    sub = Topology("custom", 0, 1, nodes, links)
    dm = distances_to_horizon(sub, 0)
    for v in keep:
        assert dm.dist[v] == brute_force_delay(sub, v, 0)


def test_internet_five_node_dijkstra_matches_floyd_warshall():
    topo = generate_internet(1)
    keep = [0, 7, 30, 61, 95]
    remap = {old: new for new, old in enumerate(keep)}
    nodes = [Node(remap[i], topo.nodes[i].position, 0) for i in keep]
    links = [Link(remap[l.src], remap[l.dst], l.delay) for l in topo.links
             if l.src in remap and l.dst in remap]
    sub = Topology("custom", 0, 1, nodes, links)

    fw = np.full((5, 5), np.inf)
    np.fill_diagonal(fw, 0.0)
    for l in links:
        fw[l.src, l.dst] = min(fw[l.src, l.dst], l.delay)
    for k in range(5):
        for i in range(5):
            for j in range(5):
                fw[i, j] = min(fw[i, j], fw[i, k] + fw[k, j])
    assert np.allclose(sub.all_pairs_shortest(), fw, rtol=1e-12, atol=0.0)


def test_relaxation_optimality_over_every_link(starlink):
    dm = distances_to_horizon(starlink, 0)
    src = np.array([l.src for l in starlink.links])
    dst = np.array([l.dst for l in starlink.links])
    delay = np.array([l.delay for l in starlink.links])
    assert np.all(dm.dist[src] <= delay + dm.dist[dst] + 1e-12)


def test_earliest_arrival_is_additive(starlink):
    dm = distances_to_horizon(starlink, 0)
    assert earliest_arrival(starlink, 5, 5.0, dm) == 5.0 + dm.dist[5]
    assert earliest_arrival(starlink, 0, 0.0, dm) == 0.0
    # unit slope in emission time
    base = earliest_arrival(starlink, 9, 3.0, dm)
    assert earliest_arrival(starlink, 9, 4.5, dm) == base + 1.5


def test_band_calibration_over_100_consecutive_seeds():
    for kind, ((min_lo, min_hi), (max_lo, max_hi)) in BANDS.items():
        for seed in range(100):
            mn, mx = generate(kind, seed).delay_span()
            assert min_lo <= mn <= min_hi, (kind, seed)
            assert max_lo <= mx <= max_hi, (kind, seed)


def test_json_round_trip():
    topo = generate_dsn(5)
    clone = Topology.from_json(topo.to_json())
    assert clone.kind == topo.kind and clone.seed == topo.seed
    assert clone.region_count == topo.region_count
    assert [n.position for n in clone.nodes] == [n.position for n in topo.nodes]
    assert [(l.src, l.dst, l.delay) for l in clone.links] == \
        [(l.src, l.dst, l.delay) for l in topo.links]


def test_faster_than_light_link_rejected():
    with pytest.raises(ValueError):
        Topology("custom", 0, 1,
                 [Node(0, (0.0, 0.0, 0.0), 0), Node(1, (3000.0, 0.0, 0.0), 0)],
                 [Link(0, 1, 1.0)])  # 3000 km in 1 ms
