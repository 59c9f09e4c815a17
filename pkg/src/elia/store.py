"""On-disk dataset store: shipment records, sentences, triples, aliases.

Layout of a store directory:

    records.ndjson    one ShipmentRecord per line
    sentences.ndjson  one Sentence per line
    triples.ndjson    one TransactionTriple per line
    aliases.ndjson    one {"raw": ..., "canonical_id": ...} per line
    manifest.json     {"format_version": 1, "created_at": iso-8601}

The store is single-writer; loaded stores are safe to share read-only.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .core import Sentence, ShipmentRecord, TransactionTriple
from .errors import DuplicateIdError, StoreFormatError, StoreVersionError

FORMAT_VERSION = 1

RECORDS_FILE = "records.ndjson"
SENTENCES_FILE = "sentences.ndjson"
TRIPLES_FILE = "triples.ndjson"
ALIASES_FILE = "aliases.ndjson"
MANIFEST_FILE = "manifest.json"


@dataclass
class DatasetStore:
    records: dict[str, ShipmentRecord] = field(default_factory=dict)
    sentences: dict[str, Sentence] = field(default_factory=dict)
    triples: dict[str, TransactionTriple] = field(default_factory=dict)
    alias_map: dict[str, str] = field(default_factory=dict)

    def add_record(self, record: ShipmentRecord) -> str:
        if record.record_id in self.records:
            raise DuplicateIdError(f"record id already present: {record.record_id}")
        self.records[record.record_id] = record
        return record.record_id

    def add_sentence(self, sentence: Sentence) -> str:
        if sentence.id in self.sentences:
            raise DuplicateIdError(f"sentence id already present: {sentence.id}")
        self.sentences[sentence.id] = sentence
        return sentence.id

    def add_triple(self, triple: TransactionTriple) -> str:
        """Insert a triple, assigning the next counter-based id if unset."""
        if triple.triple_id is None:
            triple.triple_id = f"t{len(self.triples) + 1:06d}"
            while triple.triple_id in self.triples:
                triple.triple_id = f"t{int(triple.triple_id[1:]) + 1:06d}"
        if triple.triple_id in self.triples:
            raise DuplicateIdError(f"triple id already present: {triple.triple_id}")
        self.triples[triple.triple_id] = triple
        return triple.triple_id

    def triples_for_source(self, source_id: str) -> list[TransactionTriple]:
        return [t for t in self.triples.values() if t.source_id == source_id]

    def referenced_names(self) -> list[str]:
        """All raw company names in records and triples, with multiplicity.

        Placeholder values like ``<Your company>`` are excluded: they do not
        denote real firms and must never enter the alias map.
        """
        names: list[str] = []
        for rec in self.records.values():
            names.append(rec.shipper.raw_name)
            names.append(rec.consignee.raw_name)
        for t in self.triples.values():
            for ref in (t.buyer, t.supplier):
                if ref is not None and not ref.placeholder:
                    names.append(ref.raw_name)
        return names


def new_store() -> DatasetStore:
    return DatasetStore()


def _write_ndjson(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, separators=(", ", ": ")))
            fh.write("\n")


def _read_ndjson(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise StoreFormatError(
                    f"{path}:{lineno}: malformed line (offset {exc.pos}): {exc.msg}"
                ) from exc
    return rows


def save_store(store: DatasetStore, path: str) -> None:
    """Write the store to ``path`` (a directory, created if missing)."""
    os.makedirs(path, exist_ok=True)
    _write_ndjson(os.path.join(path, RECORDS_FILE), (r.to_dict() for r in store.records.values()))
    _write_ndjson(
        os.path.join(path, SENTENCES_FILE), (s.to_dict() for s in store.sentences.values())
    )
    _write_ndjson(os.path.join(path, TRIPLES_FILE), (t.to_dict() for t in store.triples.values()))
    _write_ndjson(
        os.path.join(path, ALIASES_FILE),
        ({"raw": raw, "canonical_id": cid} for raw, cid in store.alias_map.items()),
    )
    manifest = {
        "format_version": FORMAT_VERSION,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }
    with open(os.path.join(path, MANIFEST_FILE), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def load_store(path: str) -> DatasetStore:
    """Load a store directory; raises on malformed files or version skew."""
    manifest_path = os.path.join(path, MANIFEST_FILE)
    if not os.path.isdir(path) or not os.path.exists(manifest_path):
        raise StoreFormatError(f"{path}: not a dataset store (missing {MANIFEST_FILE})")
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise StoreFormatError(
            f"{manifest_path}:{exc.lineno}: malformed manifest (offset {exc.pos}): {exc.msg}"
        ) from exc
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise StoreVersionError(
            f"{manifest_path}: format_version {version!r} unsupported (expected {FORMAT_VERSION})"
        )

    store = DatasetStore()
    for d in _read_ndjson(os.path.join(path, RECORDS_FILE)):
        store.add_record(_from_dict_checked(ShipmentRecord, d, path, RECORDS_FILE))
    for d in _read_ndjson(os.path.join(path, SENTENCES_FILE)):
        store.add_sentence(_from_dict_checked(Sentence, d, path, SENTENCES_FILE))
    for d in _read_ndjson(os.path.join(path, TRIPLES_FILE)):
        store.add_triple(_from_dict_checked(TransactionTriple, d, path, TRIPLES_FILE))
    for d in _read_ndjson(os.path.join(path, ALIASES_FILE)):
        store.alias_map[d["raw"]] = d["canonical_id"]
    return store


def _from_dict_checked(cls, d: dict, path: str, name: str):
    try:
        return cls.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise StoreFormatError(f"{os.path.join(path, name)}: bad row {d!r}: {exc}") from exc
