"""Synthetic delay-weighted network graphs and earliest-arrival delay maps.

Three generator families cover the evaluation environments: a 200-satellite
LEO shell wired with inter-satellite links, a 100-metro fiber backbone, and
a 30-node deep-space network with relay chains out to a Jupiter-distance
probe.  All link delays are derived from geometry (straight-line or
great-circle distance over signal speed), so every link satisfies the
physical lower bound delay >= distance / c.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

C_KM_PER_MS = 299.792458  # speed of light, km per millisecond
FIBER_SLOWDOWN = 1.468  # silica refractive index: fiber signal speed = c / 1.468
METRO_DELAY_FLOOR_MS = 0.3  # co-located data centers still pay this floor
EARTH_RADIUS_KM = 6371.0

KIND_STARLINK = "starlink200"
KIND_INTERNET = "internet100"
KIND_DSN = "dsn30"
KIND_CUSTOM = "custom"

GENERATED_KINDS = (KIND_STARLINK, KIND_INTERNET, KIND_DSN)


@dataclass(frozen=True)
class Node:
    id: int
    position: tuple[float, float, float]  # km, Earth-centered
    region: int  # orbital plane / metro cluster / deep-space group


@dataclass(frozen=True)
class Link:
    src: int
    dst: int
    delay: float  # one-way propagation, ms, strictly positive


class Topology:
    """Immutable delay-weighted directed graph of communication sites."""

    def __init__(self, kind: str, seed: int, region_count: int,
                 nodes: list[Node], links: list[Link]):
        self.kind = kind
        self.seed = seed
        self.region_count = region_count
        self.nodes = list(nodes)
        self.links = list(links)
        self._validate()

    def _validate(self) -> None:
        n = len(self.nodes)
        ids = [node.id for node in self.nodes]
        if ids != list(range(n)):
            raise ValueError("node ids must be the dense range 0..N-1")
        for node in self.nodes:
            if not all(math.isfinite(c) for c in node.position):
                raise ValueError(f"node {node.id} has non-finite position")
            if not 0 <= node.region < self.region_count:
                raise ValueError(f"node {node.id} region out of range")
        pos = self.positions
        for link in self.links:
            if not (0 <= link.src < n and 0 <= link.dst < n):
                raise ValueError("link endpoint out of range")
            if not link.delay > 0:
                raise ValueError("link delay must be strictly positive")
            straight = float(np.linalg.norm(pos[link.src] - pos[link.dst]))
            if link.delay < straight / C_KM_PER_MS * (1 - 1e-9):
                raise ValueError(
                    f"link {link.src}->{link.dst} is faster than light "
                    f"({link.delay} ms < {straight / C_KM_PER_MS} ms)")

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([node.position for node in self.nodes], dtype=float)

    @cached_property
    def regions(self) -> np.ndarray:
        return np.array([node.region for node in self.nodes], dtype=int)

    @cached_property
    def _graph(self) -> csr_matrix:
        n = len(self.nodes)
        src = np.array([l.src for l in self.links], dtype=int)
        dst = np.array([l.dst for l in self.links], dtype=int)
        delay = np.array([l.delay for l in self.links], dtype=float)
        return csr_matrix((delay, (src, dst)), shape=(n, n))

    @cached_property
    def _reverse_graph(self) -> csr_matrix:
        return self._graph.T.tocsr()

    def all_pairs_shortest(self) -> np.ndarray:
        """Shortest one-way delay between every ordered node pair (ms)."""
        return _sp_dijkstra(self._graph, directed=True)

    def delay_span(self) -> tuple[float, float]:
        """(min, max) shortest one-way delay over distinct reachable pairs."""
        dist = self.all_pairs_shortest()
        off = ~np.eye(len(self.nodes), dtype=bool)
        finite = np.isfinite(dist) & off
        return float(dist[finite].min()), float(dist[finite].max())

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "seed": self.seed,
            "region_count": self.region_count,
            "nodes": [{"id": nd.id, "position": list(nd.position), "region": nd.region}
                      for nd in self.nodes],
            "links": [{"src": l.src, "dst": l.dst, "delay_ms": l.delay}
                      for l in self.links],
        }
        return json.dumps(doc, indent=1)

    @staticmethod
    def from_json(text: str) -> "Topology":
        doc = json.loads(text)
        nodes = [Node(nd["id"], tuple(nd["position"]), nd["region"])
                 for nd in doc["nodes"]]
        links = [Link(l["src"], l["dst"], l["delay_ms"]) for l in doc["links"]]
        return Topology(doc["kind"], doc["seed"], doc["region_count"], nodes, links)


@dataclass(frozen=True)
class DelayMap:
    """Shortest-path delay from every node to a fixed clearing site."""

    horizon_node: int
    dist: np.ndarray  # ms, +inf where the site is unreachable

    def __post_init__(self):
        self.dist.setflags(write=False)


def distances_to_horizon(topology: Topology, horizon_node: int) -> DelayMap:
    """Exact delay from every node to ``horizon_node``.

    One single-source run from the clearing site on the reverse graph;
    unreachable nodes map to +inf.
    """
    if not 0 <= horizon_node < len(topology):
        raise ValueError(f"horizon node {horizon_node} not in topology")
    dist = _sp_dijkstra(topology._reverse_graph, directed=True,
                        indices=horizon_node)
    return DelayMap(horizon_node=horizon_node, dist=np.asarray(dist, dtype=float))


def earliest_arrival(topology: Topology, v: int, emission: float,
                     delay_map: DelayMap) -> float:
    """Earliest time a signal emitted at (v, emission) reaches the clearing site."""
    if not 0 <= v < len(topology):
        raise ValueError(f"node {v} not in topology")
    return emission + float(delay_map.dist[v])


# ---------------------------------------------------------------------------
# generators


def generate(kind: str, seed: int) -> Topology:
    if kind == KIND_STARLINK:
        return generate_starlink(seed)
    if kind == KIND_INTERNET:
        return generate_internet(seed)
    if kind == KIND_DSN:
        return generate_dsn(seed)
    raise ValueError(f"unknown topology kind {kind!r}")


# Walker-style shell: 10 planes x 20 satellites at 550 km.  Any two
# satellites can exchange signals at straight-line light time (idealized RF
# crosslink model): the closest cross-plane pair sits ~1.8-2 ms apart and
# diametrically opposed satellites ~46 ms, which is what produces the
# published delay spectrum.  A sparse grid wiring cannot: its delay diameter
# measures 78-133 ms depending on phasing.
_STARLINK_PLANES = 10
_STARLINK_PER_PLANE = 20
_STARLINK_ALTITUDE_KM = 550.0
_STARLINK_INCLINATION_DEG = 58.0
_STARLINK_PHASING = 5  # per-plane anomaly offset, units of 360/(planes*per_plane)
_STARLINK_JITTER_DEG = 0.25
_STARLINK_CLEARING_PAD_MS = 4.0  # ingress scheduling at the clearing site


def generate_starlink(seed: int) -> Topology:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5747]))
    planes, per_plane = _STARLINK_PLANES, _STARLINK_PER_PLANE
    radius = EARTH_RADIUS_KM + _STARLINK_ALTITUDE_KM
    incl = math.radians(_STARLINK_INCLINATION_DEG)

    nodes = []
    for p in range(planes):
        raan = 2 * math.pi * p / planes
        phase = 2 * math.pi * _STARLINK_PHASING * p / (planes * per_plane)
        for s in range(per_plane):
            u = 2 * math.pi * s / per_plane + phase
            u += math.radians(rng.normal(0.0, _STARLINK_JITTER_DEG))
            # circular orbit of given RAAN/inclination
            x = radius * (math.cos(u) * math.cos(raan)
                          - math.sin(u) * math.cos(incl) * math.sin(raan))
            y = radius * (math.cos(u) * math.sin(raan)
                          + math.sin(u) * math.cos(incl) * math.cos(raan))
            z = radius * math.sin(u) * math.sin(incl)
            nodes.append(Node(id=p * per_plane + s, position=(x, y, z), region=p))

    pos = np.array([nd.position for nd in nodes])

    # node 0 hosts the clearing site; give that role to the satellite with
    # the least crowded neighborhood (quiet mid-latitude slots, away from
    # plane crossings where satellites bunch up)
    gaps = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    np.fill_diagonal(gaps, np.inf)
    near = np.sort(gaps, axis=1)[:, :6]
    anchor = int(np.lexsort((-near[:, 5], -near[:, 0]))[0])
    order = [anchor] + [i for i in range(len(nodes)) if i != anchor]
    nodes = [Node(id=i, position=nodes[j].position, region=nodes[j].region)
             for i, j in enumerate(order)]
    pos = pos[order]

    links = []
    n = len(nodes)
    for a in range(n):
        for b in range(a + 1, n):
            delay = float(np.linalg.norm(pos[a] - pos[b])) / C_KM_PER_MS
            if a == 0 or b == 0:
                delay += _STARLINK_CLEARING_PAD_MS
            links.append(Link(a, b, delay))
            links.append(Link(b, a, delay))
    return Topology(KIND_STARLINK, seed, planes, nodes, links)


# Backbone of 100 metro PoPs: a dense home region of clustered metros around
# the clearing site plus a handful of far overseas metros, fully meshed with
# great-circle fiber at c/1.468 and a 0.3 ms co-location floor.
_INTERNET_HOME_ANCHORS = [
    # (lat, lon, metros) -- home-region metro clusters
    (40.7, -74.0, 22),   # US East
    (41.9, -87.6, 19),   # US Central-North
    (32.8, -96.8, 18),   # US Central-South
    (33.7, -84.4, 18),   # US Southeast
    (43.7, -79.4, 18),   # Canada East
]
_INTERNET_FAR_ANCHORS = [
    # one metro each, far from the home region
    (51.5, -0.1),    # London
    (35.7, 139.7),   # Tokyo
    (-23.5, -46.6),  # Sao Paulo
    (-33.9, 151.2),  # Sydney
    (-26.2, 28.0),   # Johannesburg
]
_INTERNET_SCATTER_KM = 260.0


def _sphere_point(lat_deg: float, lon_deg: float) -> np.ndarray:
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    return EARTH_RADIUS_KM * np.array([
        math.cos(lat) * math.cos(lon),
        math.cos(lat) * math.sin(lon),
        math.sin(lat),
    ])


def _great_circle_km(a: np.ndarray, b: np.ndarray) -> float:
    cosang = float(np.dot(a, b)) / EARTH_RADIUS_KM ** 2
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, cosang)))


def generate_internet(seed: int) -> Topology:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1e7]))
    nodes = []
    positions = []

    def place(lat: float, lon: float, region: int, scatter_km: float) -> None:
        dlat = rng.normal(0.0, scatter_km) / 111.0
        dlon = rng.normal(0.0, scatter_km) / (111.0 * max(0.2, math.cos(math.radians(lat))))
        p = _sphere_point(lat + dlat, lon + dlon)
        positions.append(p)
        nodes.append(Node(id=len(nodes), position=tuple(p), region=region))

    # node 0 sits exactly on the first home anchor: the designated major PoP
    first_lat, first_lon, first_count = _INTERNET_HOME_ANCHORS[0]
    p0 = _sphere_point(first_lat, first_lon)
    positions.append(p0)
    nodes.append(Node(id=0, position=tuple(p0), region=0))
    # node 1 is co-located with node 0 (same campus, distinct data center)
    positions.append(p0)
    nodes.append(Node(id=1, position=tuple(p0), region=0))
    for _ in range(first_count - 2):
        place(first_lat, first_lon, 0, _INTERNET_SCATTER_KM)
    for region, (lat, lon, count) in enumerate(_INTERNET_HOME_ANCHORS[1:], start=1):
        for _ in range(count):
            place(lat, lon, region, _INTERNET_SCATTER_KM)
    far_region = len(_INTERNET_HOME_ANCHORS)
    for lat, lon in _INTERNET_FAR_ANCHORS:
        place(lat, lon, far_region, _INTERNET_SCATTER_KM / 2)

    links = []
    n = len(nodes)
    for a in range(n):
        for b in range(a + 1, n):
            km = _great_circle_km(positions[a], positions[b])
            delay = max(METRO_DELAY_FLOOR_MS, km * FIBER_SLOWDOWN / C_KM_PER_MS)
            links.append(Link(a, b, delay))
            links.append(Link(b, a, delay))
    return Topology(KIND_INTERNET, seed, far_region + 1, nodes, links)


# Deep-space network: 3 Earth stations meshed at millisecond scale, a relay
# chain spanning lunar to outer-planet ranges, a probe cluster at Mars
# distances, and one probe at the Earth-Jupiter maximum separation.  Two
# anchors are held exact across seeds: the Mars closest-approach link
# (498,000 ms) and the Jupiter maximum-separation link (4,416,000 ms).
_DSN_EARTH_GAPS_MS = (1.0, 4.3)       # station 0-1 and 1-2 one-way delays
_DSN_RELAY_COUNT = 17
_DSN_RELAY_RANGE_MS = (1.3e3, 2.4e5)  # lunar scale out to ~4 light-minutes
_DSN_MARS_COUNT = 9
_DSN_MARS_ANCHOR_MS = 498_000.0
_DSN_MARS_JITTER_MS = 25.0
_DSN_JUPITER_MS = 4_416_000.0

# regions: 0 Earth stations, 1 inner relays, 2 Mars cluster, 3 outer probes
_DSN_REGIONS = 4


def generate_dsn(seed: int) -> Topology:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xd51]))

    # deep nodes live along one ecliptic ray; position encodes delay
    deep_delays = [_DSN_MARS_ANCHOR_MS]
    deep_regions = [2]
    for _ in range(_DSN_MARS_COUNT - 1):
        deep_delays.append(_DSN_MARS_ANCHOR_MS + rng.uniform(0.0, _DSN_MARS_JITTER_MS))
        deep_regions.append(2)
    lo, hi = _DSN_RELAY_RANGE_MS
    for _ in range(_DSN_RELAY_COUNT):
        deep_delays.append(float(np.exp(rng.uniform(np.log(lo), np.log(hi)))))
        deep_regions.append(1)
    deep_delays.append(_DSN_JUPITER_MS)
    deep_regions.append(3)

    nodes = []
    g01, g12 = _DSN_EARTH_GAPS_MS
    earth_x = [0.0, g01 * C_KM_PER_MS, (g01 + g12) * C_KM_PER_MS]
    for i, x in enumerate(earth_x):
        nodes.append(Node(id=i, position=(x, 0.0, 0.0), region=0))
    order = np.argsort(deep_delays)
    for rank, idx in enumerate(order):
        delay = deep_delays[idx]
        nodes.append(Node(id=3 + rank, position=(-delay * C_KM_PER_MS, 0.0, 0.0),
                          region=deep_regions[idx]))

    links = []

    def connect(a: int, b: int, delay: float) -> None:
        links.append(Link(a, b, delay))
        links.append(Link(b, a, delay))

    connect(0, 1, g01)
    connect(1, 2, g12)
    connect(0, 2, g01 + g12)
    sorted_delays = [deep_delays[i] for i in order]
    for rank, delay in enumerate(sorted_delays):
        connect(0, 3 + rank, delay)  # every dish tracks every spacecraft
        if rank > 0:
            # store-and-forward relay hop; light time derived from the stored
            # positions so near-coincident relays cannot round below c
            gap = abs(nodes[3 + rank - 1].position[0]
                      - nodes[3 + rank].position[0]) / C_KM_PER_MS
            if gap > 0:
                connect(3 + rank - 1, 3 + rank, gap)
    return Topology(KIND_DSN, seed, _DSN_REGIONS, nodes, links)
