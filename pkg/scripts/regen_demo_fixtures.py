#!/usr/bin/env python3
"""Rebuild the bundled demo mock responses.

Sentence ids are content hashes over (transcript id, index, text), so the
recorded-response fixture must be regenerated whenever the bundled
transcripts or the segmentation rules change. Run from the repo root:

    python scripts/regen_demo_fixtures.py
"""

from __future__ import annotations

import json

from elia.bol import normalize_product_desc, parse_bol_file
from elia.cli import fixtures_dir
from elia.store import new_store
from elia.transcripts import (
    detect_mentions,
    gazetteer_from_store,
    load_gazetteer,
    load_transcript,
    prefilter,
    segment,
)

# Response for each mention-bearing demo sentence, keyed by exact text.
RESPONSES = {
    "Vanguard Motor Assembly relies on Harborline Auto Parts for door panels.":
        "Buyer: Vanguard Motor Assembly, Supplier: Harborline Auto Parts, Item: door panels",
    "Apex Steelworks supplies steel sheet to Meridian Appliance Works.":
        "Buyer: Meridian Appliance Works, Supplier: Apex Steelworks, Item: steel sheet",
    "Homestead Retail Group buys washing machines from Meridian Appliance Works.":
        "Buyer: Homestead Retail Group, Supplier: Meridian Appliance Works, Item: washing machines",
    "Milanese Leather Co supplies the leather for our store displays.":
        "Buyer: <Your company>, Supplier: Milanese Leather Co, Item: leather",
}


def main() -> None:
    fx = fixtures_dir()
    store = new_store()
    records, _ = parse_bol_file(str(fx / "bol_demo.csv"))
    for rec in records:
        rec.product_desc = normalize_product_desc(rec.product_desc)
        store.add_record(rec)
    gaz = gazetteer_from_store(store, extra=tuple(load_gazetteer(str(fx / "gazetteer.txt")).entries))

    rows = []
    unmatched = []
    for path in sorted((fx / "transcripts").glob("*.txt")):
        transcript_id, text = load_transcript(str(path))
        sentences = [detect_mentions(s, gaz) for s in segment(text, transcript_id)]
        for sentence in prefilter(sentences):
            response = RESPONSES.get(sentence.text)
            if response is None:
                unmatched.append(sentence.text)
                continue
            rows.append({"sentence_id": sentence.id, "response_text": response})

    if unmatched:
        raise SystemExit(
            "prefiltered sentences without a scripted response:\n  " + "\n  ".join(unmatched)
        )
    out = fx / "mock_responses.ndjson"
    with open(out, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"wrote {len(rows)} recorded responses -> {out}")


if __name__ == "__main__":
    main()
