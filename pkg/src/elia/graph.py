"""Supply-chain multigraph: construction, liability propagation, queries.

Nodes are canonical companies; every shipment and every fully-resolved
transaction relation contributes one directed edge (parallel edges are kept,
never merged, so each shipment stays auditable). Edge liability is
``mass_kg * factor.per_kg_co2e``.

Propagation modes:

* ``one_hop``: a node inherits exactly the liabilities on its incoming
  edges. Nothing is passed further downstream, so transferred is 0 and
  retained = direct + inherited.
* ``full_propagation``: each node accumulates a pool
  T(u) = direct(u) + sum over incoming edges of (edge liability +
  allocated share), then passes the whole pool downstream, allocating it
  across outgoing edges proportionally to shipped mass. Nodes without
  outgoing mass retain their pool. On a DAG this is a single pass in
  topological order; with cycles it is (optionally) a damped fixed-point
  iteration.

The mass-proportional allocation rule is this library's documented
convention for multi-hop accounting; only the one-hop computation is
standard.
"""

from __future__ import annotations

import fnmatch
import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .core import EmissionFactor
from .errors import CycleError, NodeNotFoundError, UsageError
from .resolution import normalize_name
from .store import DatasetStore

MODES = ("one_hop", "full_propagation")


@dataclass
class Node:
    canonical_id: str
    display_name: str
    direct_emissions_kg: float = 0.0

    def __post_init__(self):
        if self.direct_emissions_kg < 0:
            raise ValueError("direct_emissions_kg must be >= 0")


@dataclass
class Edge:
    edge_id: str
    source: str
    target: str
    item: str
    mass_kg: float
    factor: EmissionFactor
    edge_liability_kg: float = field(init=False)

    def __post_init__(self):
        if self.mass_kg < 0:
            raise ValueError("mass_kg must be >= 0")
        self.edge_liability_kg = self.mass_kg * self.factor.per_kg_co2e


@dataclass
class SupplyGraph:
    nodes: dict[str, Node] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)

    def add_node(self, canonical_id: str, display_name: str, direct_emissions_kg: float = 0.0) -> Node:
        node = self.nodes.get(canonical_id)
        if node is None:
            node = Node(canonical_id, display_name, direct_emissions_kg)
            self.nodes[canonical_id] = node
        return node

    def add_edge(self, source: str, target: str, item: str, mass_kg: float, factor: EmissionFactor,
                 edge_id: str | None = None) -> Edge:
        if source not in self.nodes:
            raise NodeNotFoundError(f"unknown edge source: {source}")
        if target not in self.nodes:
            raise NodeNotFoundError(f"unknown edge target: {target}")
        if edge_id is None:
            edge_id = f"e{len(self.edges) + 1:06d}"
        edge = Edge(edge_id, source, target, item, mass_kg, factor)
        self.edges.append(edge)
        return edge

    def in_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.target == node_id]

    def out_edges(self, node_id: str) -> list[Edge]:
        return [e for e in self.edges if e.source == node_id]


@dataclass
class FactorSampler:
    """Seeded Gaussian emission-factor sampler, truncated at zero.

    ``factor_for`` derives a per-item stream from (seed, item), so the
    factor assigned to an item does not depend on the order items are
    encountered in; the same seed always reproduces the same factors.
    """

    mean: float = 1.0
    std: float = 0.25
    seed: int = 0

    def factor_for(self, item: str) -> EmissionFactor:
        rng = random.Random(f"{self.seed}\x1f{item}")
        return EmissionFactor(per_kg_co2e=self._draw(rng), provenance="sampled")

    def sample(self, count: int) -> list[float]:
        """Draw ``count`` values from the seed's anonymous stream."""
        rng = random.Random(self.seed)
        return [self._draw(rng) for _ in range(count)]

    def _draw(self, rng: random.Random) -> float:
        for _ in range(1000):
            value = rng.gauss(self.mean, self.std)
            if value >= 0.0:
                return value
        return 0.0  # essentially unreachable for sane (mean, std)


@dataclass
class FactorTable:
    """Ordered (item_pattern, factor) rules; first matching pattern wins.

    Patterns are case-insensitive globs. Items matching no pattern fall
    back to the sampler (or constant factor) when one is configured.
    """

    rules: list[tuple[str, EmissionFactor]] = field(default_factory=list)
    fallback: FactorSampler | EmissionFactor | None = None

    def factor_for(self, item: str) -> EmissionFactor | None:
        for pattern, factor in self.rules:
            if fnmatch.fnmatchcase(item.upper(), pattern.upper()):
                return factor
        if isinstance(self.fallback, FactorSampler):
            return self.fallback.factor_for(item)
        return self.fallback


def load_factor_table(path: str, fallback: FactorSampler | EmissionFactor | None = None) -> FactorTable:
    """Read ndjson rows {"item_pattern", "per_kg_co2e", "provenance"}."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                rules.append(
                    (
                        row["item_pattern"],
                        EmissionFactor(float(row["per_kg_co2e"]), row.get("provenance", "table")),
                    )
                )
    return FactorTable(rules=rules, fallback=fallback)


FactorSource = EmissionFactor | FactorSampler | FactorTable | Mapping[str, EmissionFactor]


def _factor_resolver(factors: FactorSource):
    if isinstance(factors, EmissionFactor):
        return lambda item: factors
    if isinstance(factors, (FactorSampler, FactorTable)):
        return factors.factor_for
    if isinstance(factors, Mapping):
        return lambda item: factors.get(item)
    raise UsageError(f"unsupported factor source: {type(factors).__name__}")


@dataclass
class BuildReport:
    skipped: list[tuple[str, str]] = field(default_factory=list)
    edges_from_records: int = 0
    edges_from_triples: int = 0


def _display_names(store: DatasetStore, alias_map: Mapping[str, str]) -> dict[str, str]:
    """Most frequent raw name per canonical id, ties by normalized form."""
    counts: dict[str, Counter] = defaultdict(Counter)
    for raw in store.referenced_names():
        cid = alias_map.get(raw)
        if cid is not None:
            counts[cid][raw] += 1
    return {
        cid: min(ctr, key=lambda raw: (-ctr[raw], normalize_name(raw), raw))
        for cid, ctr in counts.items()
    }


def build_graph(
    store: DatasetStore,
    alias_map: Mapping[str, str],
    factors: FactorSource,
    display_names: Mapping[str, str] | None = None,
) -> tuple[SupplyGraph, BuildReport]:
    """Build the multigraph from shipments and transaction triples.

    Shipments become shipper -> consignee edges weighted by shipment mass;
    fully-resolved triples become supplier -> buyer edges with zero mass
    (they carry structure, not tonnage). Records or triples whose parties
    are missing from the alias map are skipped and reported, never fatal.
    """
    resolver = _factor_resolver(factors)
    names = dict(display_names) if display_names else _display_names(store, alias_map)
    graph = SupplyGraph()
    report = BuildReport()

    def node_for(raw_name: str) -> str:
        cid = alias_map[raw_name]
        graph.add_node(cid, names.get(cid, raw_name))
        return cid

    for rec in store.records.values():
        if rec.shipper.raw_name not in alias_map:
            report.skipped.append((rec.record_id, f"unresolved shipper: {rec.shipper.raw_name}"))
            continue
        if rec.consignee.raw_name not in alias_map:
            report.skipped.append((rec.record_id, f"unresolved consignee: {rec.consignee.raw_name}"))
            continue
        factor = resolver(rec.product_desc)
        if factor is None:
            report.skipped.append((rec.record_id, f"no emission factor for: {rec.product_desc!r}"))
            continue
        source = node_for(rec.shipper.raw_name)
        target = node_for(rec.consignee.raw_name)
        graph.add_edge(source, target, rec.product_desc, rec.weight_kg, factor)
        report.edges_from_records += 1

    for triple in store.triples.values():
        tid = triple.triple_id or triple.source_id
        if triple.buyer is None or triple.supplier is None:
            report.skipped.append((tid, "incomplete relation (missing buyer or supplier)"))
            continue
        if triple.buyer.placeholder or triple.supplier.placeholder:
            report.skipped.append((tid, "unresolved placeholder party"))
            continue
        if triple.supplier.raw_name not in alias_map:
            report.skipped.append((tid, f"unresolved supplier: {triple.supplier.raw_name}"))
            continue
        if triple.buyer.raw_name not in alias_map:
            report.skipped.append((tid, f"unresolved buyer: {triple.buyer.raw_name}"))
            continue
        item = triple.item or ""
        factor = resolver(item) or EmissionFactor(0.0, "manual")
        source = node_for(triple.supplier.raw_name)
        target = node_for(triple.buyer.raw_name)
        graph.add_edge(source, target, item, 0.0, factor)
        report.edges_from_triples += 1

    return graph, report


def one_hop_inheritance(graph: SupplyGraph, node_id: str) -> float:
    """Sum of incoming edge liabilities for one node."""
    if node_id not in graph.nodes:
        raise NodeNotFoundError(f"unknown node: {node_id}")
    return sum(e.edge_liability_kg for e in graph.edges if e.target == node_id)


@dataclass
class NodeLiability:
    direct_kg: float = 0.0
    inherited_kg: float = 0.0
    transferred_kg: float = 0.0
    retained_kg: float = 0.0


@dataclass
class ELiabilityReport:
    mode: str
    residual: float
    nodes: dict[str, NodeLiability]

    def retained(self, node_id: str) -> float:
        return self._row(node_id).retained_kg

    def inherited(self, node_id: str) -> float:
        return self._row(node_id).inherited_kg

    def _row(self, node_id: str) -> NodeLiability:
        if node_id not in self.nodes:
            raise NodeNotFoundError(f"node not in report: {node_id}")
        return self.nodes[node_id]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "residual": self.residual,
            "nodes": {
                nid: {
                    "direct_kg": row.direct_kg,
                    "inherited_kg": row.inherited_kg,
                    "transferred_kg": row.transferred_kg,
                    "retained_kg": row.retained_kg,
                }
                for nid, row in sorted(self.nodes.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ELiabilityReport":
        return cls(
            mode=d["mode"],
            residual=float(d["residual"]),
            nodes={
                nid: NodeLiability(
                    direct_kg=float(row["direct_kg"]),
                    inherited_kg=float(row["inherited_kg"]),
                    transferred_kg=float(row["transferred_kg"]),
                    retained_kg=float(row["retained_kg"]),
                )
                for nid, row in d["nodes"].items()
            },
        )


def _adjacency(graph: SupplyGraph):
    incoming: dict[str, list[Edge]] = {nid: [] for nid in graph.nodes}
    outgoing: dict[str, list[Edge]] = {nid: [] for nid in graph.nodes}
    for edge in graph.edges:
        incoming[edge.target].append(edge)
        outgoing[edge.source].append(edge)
    return incoming, outgoing


def _topological_order(graph: SupplyGraph, outgoing) -> list[str] | None:
    """Kahn's algorithm with sorted tie-breaking; None when cyclic."""
    indegree = {nid: 0 for nid in graph.nodes}
    for edge in graph.edges:
        indegree[edge.target] += 1
    ready = sorted(nid for nid, deg in indegree.items() if deg == 0)
    order: list[str] = []
    while ready:
        nid = ready.pop(0)
        order.append(nid)
        newly_ready = []
        for edge in outgoing[nid]:
            indegree[edge.target] -= 1
            if indegree[edge.target] == 0:
                newly_ready.append(edge.target)
        for t in sorted(set(newly_ready)):
            if t not in ready:
                ready.append(t)
        ready.sort()
    if len(order) != len(graph.nodes):
        return None
    return order


def _find_cycle(graph: SupplyGraph, outgoing) -> list[str]:
    """One directed cycle, for the strict-mode error message."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {nid: WHITE for nid in graph.nodes}
    stack: list[str] = []

    def dfs(nid: str) -> list[str] | None:
        color[nid] = GRAY
        stack.append(nid)
        for edge in outgoing[nid]:
            nxt = edge.target
            if color[nxt] == GRAY:
                return stack[stack.index(nxt) :] + [nxt]
            if color[nxt] == WHITE:
                found = dfs(nxt)
                if found:
                    return found
        color[nid] = BLACK
        stack.pop()
        return None

    for nid in sorted(graph.nodes):
        if color[nid] == WHITE:
            found = dfs(nid)
            if found:
                return found
    return []


def propagate(
    graph: SupplyGraph,
    mode: str = "full_propagation",
    on_cycle: str = "error",
    tolerance: float = 1e-9,
    max_iterations: int = 1000,
    damping: float = 1.0,
) -> ELiabilityReport:
    """Compute per-node direct / inherited / transferred / retained totals.

    ``on_cycle`` selects strict behavior ("error", the default: raise
    CycleError naming one cycle) or damped fixed-point iteration
    ("iterate": repeat the pool equations until the largest per-node change
    drops below ``tolerance`` or ``max_iterations`` is hit; the final change
    is reported as the residual). Acyclic graphs always report residual 0.
    """
    if mode not in MODES:
        raise UsageError(f"unknown propagation mode: {mode!r} (expected one of {MODES})")
    if on_cycle not in ("error", "iterate"):
        raise UsageError(f"on_cycle must be 'error' or 'iterate', got {on_cycle!r}")

    incoming, outgoing = _adjacency(graph)

    if mode == "one_hop":
        rows = {}
        for nid, node in graph.nodes.items():
            inherited = sum(e.edge_liability_kg for e in incoming[nid])
            rows[nid] = NodeLiability(
                direct_kg=node.direct_emissions_kg,
                inherited_kg=inherited,
                transferred_kg=0.0,
                retained_kg=node.direct_emissions_kg + inherited,
            )
        return ELiabilityReport(mode=mode, residual=0.0, nodes=rows)

    order = _topological_order(graph, outgoing)
    if order is not None:
        share = _acyclic_shares(graph, incoming, outgoing, order)
        residual = 0.0
    elif on_cycle == "error":
        cycle = _find_cycle(graph, outgoing)
        raise CycleError(f"graph contains a cycle: {' -> '.join(cycle)}", cycle=cycle)
    else:
        share, residual = _fixed_point_shares(
            graph, incoming, outgoing, tolerance, max_iterations, damping
        )

    rows = {}
    for nid, node in graph.nodes.items():
        inherited = sum(e.edge_liability_kg + share[e.edge_id] for e in incoming[nid])
        transferred = sum(share[e.edge_id] for e in outgoing[nid])
        rows[nid] = NodeLiability(
            direct_kg=node.direct_emissions_kg,
            inherited_kg=inherited,
            transferred_kg=transferred,
            retained_kg=node.direct_emissions_kg + inherited - transferred,
        )
    return ELiabilityReport(mode=mode, residual=residual, nodes=rows)


def _allocate(pool: float, edges: list[Edge]) -> dict[str, float]:
    out_mass = sum(e.mass_kg for e in edges)
    if out_mass <= 0.0:
        return {e.edge_id: 0.0 for e in edges}
    return {e.edge_id: pool * (e.mass_kg / out_mass) for e in edges}


def _acyclic_shares(graph: SupplyGraph, incoming, outgoing, order) -> dict[str, float]:
    share: dict[str, float] = {e.edge_id: 0.0 for e in graph.edges}
    for nid in order:
        node = graph.nodes[nid]
        pool = node.direct_emissions_kg + sum(
            e.edge_liability_kg + share[e.edge_id] for e in incoming[nid]
        )
        share.update(_allocate(pool, outgoing[nid]))
    return share


def _fixed_point_shares(graph, incoming, outgoing, tolerance, max_iterations, damping):
    pools = {nid: 0.0 for nid in graph.nodes}
    share = {e.edge_id: 0.0 for e in graph.edges}
    residual = float("inf")
    node_ids = sorted(graph.nodes)
    for _ in range(max_iterations):
        new_pools = {}
        for nid in node_ids:
            computed = graph.nodes[nid].direct_emissions_kg + sum(
                e.edge_liability_kg + share[e.edge_id] for e in incoming[nid]
            )
            new_pools[nid] = (1.0 - damping) * pools[nid] + damping * computed
        residual = max(
            (abs(new_pools[nid] - pools[nid]) for nid in node_ids), default=0.0
        )
        pools = new_pools
        share = {}
        for nid in node_ids:
            share.update(_allocate(pools[nid], outgoing[nid]))
        if residual < tolerance:
            break
    return share, residual


@dataclass
class QueryResult:
    headers: tuple[str, ...]
    rows: list[tuple]

    def render(self) -> str:
        widths = [len(h) for h in self.headers]
        formatted = [
            tuple(f"{v:.3f}" if isinstance(v, float) else str(v) for v in row)
            for row in self.rows
        ]
        for row in formatted:
            widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(self.headers, widths)).rstrip(),
            "  ".join("-" * w for w in widths),
        ]
        for row in formatted:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        return "\n".join(lines)


def query(
    graph: SupplyGraph,
    report: ELiabilityReport | None,
    selector: str,
    **params,
) -> QueryResult:
    """Aggregate queries over a built graph (and, for some, its report).

    Selectors: ``top`` (k nodes by retained or inherited liability),
    ``breakdown`` (per-supplier contribution for a node), ``item-total``
    (summed edge liability for an item prefix), ``supplier-count``
    (distinct direct suppliers of a node).
    """
    if selector == "top":
        by = params.get("by", "retained")
        k = int(params.get("k", 10))
        if by not in ("retained", "inherited"):
            raise UsageError(f"top supports by=retained|inherited, got {by!r}")
        if report is None:
            raise UsageError("top requires a propagation report")
        ranked = sorted(
            report.nodes.items(), key=lambda kv: (-getattr(kv[1], f"{by}_kg"), kv[0])
        )[:k]
        rows = [
            (nid, graph.nodes[nid].display_name if nid in graph.nodes else nid,
             getattr(row, f"{by}_kg"))
            for nid, row in ranked
        ]
        return QueryResult(headers=("canonical_id", "display_name", f"{by}_kg"), rows=rows)

    if selector == "breakdown":
        node_id = _require_node(graph, params)
        totals: dict[str, float] = defaultdict(float)
        for edge in graph.edges:
            if edge.target == node_id:
                totals[edge.source] += edge.edge_liability_kg
        rows = [
            (src, graph.nodes[src].display_name, total)
            for src, total in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
        ]
        return QueryResult(headers=("supplier_id", "display_name", "liability_kg"), rows=rows)

    if selector == "item-total":
        prefix = params.get("prefix")
        if prefix is None:
            raise UsageError("item-total requires prefix=...")
        upper = prefix.upper()
        matched = [e for e in graph.edges if e.item.upper().startswith(upper)]
        total = sum(e.edge_liability_kg for e in matched)
        return QueryResult(
            headers=("item_prefix", "total_liability_kg", "edge_count"),
            rows=[(prefix, total, len(matched))],
        )

    if selector == "supplier-count":
        node_id = _require_node(graph, params)
        suppliers = {e.source for e in graph.edges if e.target == node_id}
        return QueryResult(
            headers=("canonical_id", "unique_suppliers"), rows=[(node_id, len(suppliers))]
        )

    raise UsageError(f"unknown query selector: {selector!r}")


def _require_node(graph: SupplyGraph, params) -> str:
    node_id = params.get("node")
    if node_id is None:
        raise UsageError("this selector requires node=...")
    if node_id not in graph.nodes:
        raise NodeNotFoundError(f"unknown node: {node_id}")
    return node_id
