"""
Mining transaction relations from an earnings call
===================================================

Segment a transcript into sentences, keep only the ones that mention a
company, and turn each kept sentence into a (buyer, supplier, item)
relation. The offline rule-based backend stands in for a live completion
endpoint here; swap in HttpCompletionBackend for real extraction.
"""

from elia import Gazetteer, PromptConfig, RuleBasedBackend, detect_mentions, extract_batch, prefilter, segment
from elia.extraction import load_examples
from elia.cli import fixtures_dir

transcript = """
Good morning and thanks for joining. Vanguard Motor Assembly relies on
Harborline Auto Parts for door panels. Our margins held steady this
quarter. Apex Steelworks supplies steel sheet to Meridian Appliance Works.
We expect a strong spring season.
""".replace("\n", " ").strip()

gazetteer = Gazetteer(entries={
    "Vanguard Motor Assembly", "Harborline Auto Parts",
    "Apex Steelworks", "Meridian Appliance Works",
})

sentences = [detect_mentions(s, gazetteer) for s in segment(transcript, "demo-call")]
kept = prefilter(sentences)
print(f"{len(sentences)} sentences, {len(kept)} mention a company:")
for sentence in kept:
    names = ", ".join(m.surface for m in sentence.mentions)
    print(f"  [{names}] {sentence.text}")

config = PromptConfig(examples=load_examples(str(fixtures_dir() / "few_shot.ndjson")))
triples, errors = extract_batch(kept, config, RuleBasedBackend(gazetteer))
print(f"\nextracted {len(triples)} relations ({len(errors)} failures):")
for triple in triples:
    buyer = triple.buyer.raw_name if triple.buyer else "?"
    supplier = triple.supplier.raw_name if triple.supplier else "?"
    print(f"  {buyer} buys {triple.item or '?'} from {supplier}")
