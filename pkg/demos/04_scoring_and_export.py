"""
Scoring extraction quality and exporting for Gephi
===================================================

Exact-match slot scoring of predicted relations against gold labels, then
a GEXF export of a small liability graph, ready to drop into Gephi (edges
weighted by liability flow).
"""

import tempfile
from pathlib import Path

from elia import (
    EmissionFactor,
    ExportOptions,
    SupplyGraph,
    export,
    propagate,
    render_metrics_table,
    score,
)
from elia.evalkit import load_triples_flat
from elia.cli import fixtures_dir

gold = load_triples_flat(str(fixtures_dir() / "eval" / "gold.ndjson"))
predictions = load_triples_flat(str(fixtures_dir() / "eval" / "pred.ndjson"))
print(f"scoring {len(predictions)} predictions against {len(gold)} gold relations:\n")
print(render_metrics_table(score(predictions, gold)))

graph = SupplyGraph()
graph.add_node("w", "PELTER WINERY")
graph.add_node("d", "ISRAELI WINE DIRECT")
graph.add_edge("w", "d", "wine", 714.0, EmissionFactor(1.1, "table"))
report = propagate(graph)

out_dir = Path(tempfile.mkdtemp(prefix="elia-export-"))
for fmt in ("gexf", "dot", "graph_json"):
    path = out_dir / f"wine.{fmt}"
    export(graph, report, ExportOptions(format=fmt), str(path))
    print(f"\nwrote {path}")
    if fmt == "dot":
        print(path.read_text().rstrip())
