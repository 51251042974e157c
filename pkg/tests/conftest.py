"""Shared test helpers: independent oracles kept deliberately naive."""

from __future__ import annotations

import numpy as np

from liasim.topology import Link, Node, Topology


def brute_force_delay(topology: Topology, source: int, target: int) -> float:
    """Min over all simple paths, folding edge delays from the target side
    (the same accumulation order Dijkstra uses, so equality can be exact)."""
    adjacency: dict[int, list[tuple[int, float]]] = {}
    for link in topology.links:
        adjacency.setdefault(link.src, []).append((link.dst, link.delay))
    best = np.inf
    if source == target:
        return 0.0

    def walk(node: int, visited: frozenset, edges: tuple):
        nonlocal best
        if node == target:
            total = 0.0
            for w in reversed(edges):
                total = w + total
            best = min(best, total)
            return
        for nxt, w in adjacency.get(node, ()):
            if nxt not in visited:
                walk(nxt, visited | {nxt}, edges + (w,))

    walk(source, frozenset({source}), ())
    return best


def random_topology(rng: np.random.Generator, n_nodes: int,
                    edge_prob: float = 0.5) -> Topology:
    """Small random digraph with positive delays; node 0 reachable from all
    (extra spanning links guarantee it)."""
    nodes = [Node(i, (float(i), 0.0, 0.0), 0) for i in range(n_nodes)]
    links = []
    seen = set()

    def add(a: int, b: int, delay: float):
        if a != b and (a, b) not in seen:
            seen.add((a, b))
            links.append(Link(a, b, delay))

    for a in range(n_nodes):
        for b in range(n_nodes):
            if a != b and rng.random() < edge_prob:
                add(a, b, float(rng.uniform(0.5, 20.0)))
    for a in range(1, n_nodes):
        add(a, int(rng.integers(0, a)), float(rng.uniform(0.5, 20.0)))
    return Topology("custom", 0, 1, nodes, links)
