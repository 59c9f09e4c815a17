"""Independent oracles and generators for the graph tests.

The retained-liability oracle deliberately avoids the library's pool
equations and topological pass: it injects every direct-emission amount and
every edge liability at its node, then walks all downstream paths,
multiplying mass fractions along the way. Exponential in path count, which
is fine for the small random graphs used in tests.
"""

from __future__ import annotations

import random
from collections import defaultdict

from elia.core import EmissionFactor
from elia.graph import SupplyGraph


def oracle_retained(graph: SupplyGraph) -> dict[str, float]:
    out_edges = defaultdict(list)
    for e in graph.edges:
        out_edges[e.source].append(e)
    out_mass = {nid: sum(e.mass_kg for e in out_edges[nid]) for nid in graph.nodes}

    def distribute(start: str) -> dict[str, float]:
        landed: dict[str, float] = defaultdict(float)

        def walk(node: str, fraction: float):
            if out_mass[node] <= 0.0:
                landed[node] += fraction
                return
            for e in out_edges[node]:
                if e.mass_kg > 0.0:
                    walk(e.target, fraction * (e.mass_kg / out_mass[node]))

        walk(start, 1.0)
        return landed

    injected: dict[str, float] = defaultdict(float)
    for nid, node in graph.nodes.items():
        injected[nid] += node.direct_emissions_kg
    for e in graph.edges:
        injected[e.target] += e.edge_liability_kg

    retained = {nid: 0.0 for nid in graph.nodes}
    for start, amount in injected.items():
        if amount == 0.0:
            continue
        for node, fraction in distribute(start).items():
            retained[node] += amount * fraction
    return retained


def random_multigraph(rng: random.Random, max_nodes: int = 8, max_edges: int = 16) -> SupplyGraph:
    """Arbitrary directed multigraph: cycles, self-loops, parallel edges."""
    graph = SupplyGraph()
    n = rng.randint(0, max_nodes)
    ids = [f"m{i:02d}" for i in range(n)]
    for nid in ids:
        graph.add_node(nid, f"Company {nid}", round(rng.uniform(0, 20), 3))
    if n:
        for _ in range(rng.randint(0, max_edges)):
            source, target = rng.choice(ids), rng.choice(ids)
            provenance = rng.choice(["sampled", "table", "manual"])
            graph.add_edge(
                source,
                target,
                rng.choice(["WINE", "HANDBAG", 'PARTS "A"', "bolts, nuts", ""]),
                round(rng.uniform(0, 500), 3),
                EmissionFactor(round(rng.uniform(0, 2), 4), provenance),
            )
    return graph


def random_dag(rng: random.Random, max_nodes: int = 10, max_edges: int = 20) -> SupplyGraph:
    """A random DAG: edges only go from lower to higher node rank."""
    graph = SupplyGraph()
    n = rng.randint(1, max_nodes)
    ids = [f"n{i:02d}" for i in range(n)]
    for nid in ids:
        direct = rng.choice([0.0, 0.0, round(rng.uniform(0, 50), 3)])
        graph.add_node(nid, nid.upper(), direct)
    if n >= 2:
        for _ in range(rng.randint(0, max_edges)):
            i, j = sorted(rng.sample(range(n), 2))
            mass = rng.choice([0.0, round(rng.uniform(0.1, 100), 3)])
            factor = EmissionFactor(round(rng.uniform(0, 3), 3), "manual")
            graph.add_edge(ids[i], ids[j], f"item-{i}-{j}", mass, factor)
    return graph
