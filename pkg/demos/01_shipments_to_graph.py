"""
From shipping records to a supply graph
========================================

Parse the bundled bill-of-lading sample, canonicalize the company names,
and build the weighted supply graph. With a constant emission factor of
1.0 kg CO2e per kg, every edge's liability equals its shipped mass.
"""

from elia import EmissionFactor, build_graph, new_store, parse_bol_file, resolve
from elia.cli import fixtures_dir

records, report = parse_bol_file(str(fixtures_dir() / "bol_sample.csv"))
print(f"parsed {report.accepted} shipment rows ({report.rejected} rejected)")

store = new_store()
for record in records:
    store.add_record(record)

# group raw spellings into canonical companies
resolution = resolve(store.referenced_names(), threshold=0.8)
print(f"{len(resolution.entities)} canonical companies")

graph, _ = build_graph(store, resolution.alias_map, EmissionFactor(1.0, "manual"))
for edge in graph.edges:
    shipper = graph.nodes[edge.source].display_name
    consignee = graph.nodes[edge.target].display_name
    print(f"  {shipper} -> {consignee}: {edge.mass_kg:.0f} kg, "
          f"{edge.edge_liability_kg:.0f} kg CO2e")
