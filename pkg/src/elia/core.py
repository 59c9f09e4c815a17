"""Domain types shared by every stage of the pipeline.

All types are plain dataclasses: they validate their invariants on
construction, compare by value, and serialize to flat dicts so the
newline-delimited store files stay diffable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date

ROLES = ("shipper", "consignee", "buyer", "supplier", "unknown")

FACTOR_PROVENANCES = ("sampled", "table", "manual")


def content_hash(*parts: object, prefix: str = "", length: int = 16) -> str:
    """Deterministic id from the given parts (stable across re-ingestion)."""
    payload = json.dumps([str(p) for p in parts], separators=(",", ":"))
    return prefix + hashlib.sha256(payload.encode("utf-8")).hexdigest()[:length]


def is_placeholder(text: str | None) -> bool:
    """True for angle-bracket placeholder values like ``<Your company>``."""
    if not text:
        return False
    stripped = text.strip()
    return stripped.startswith("<") and stripped.endswith(">") and len(stripped) > 2


@dataclass
class CompanyRef:
    """A company name as it appeared in a source, plus resolution state."""

    raw_name: str
    canonical_id: str | None = None
    role_hint: str = "unknown"

    def __post_init__(self):
        if not self.raw_name or not self.raw_name.strip():
            raise ValueError("CompanyRef.raw_name must be non-empty")
        self.raw_name = self.raw_name.strip()
        if self.role_hint not in ROLES:
            raise ValueError(f"unknown role_hint: {self.role_hint!r}")

    @property
    def placeholder(self) -> bool:
        return is_placeholder(self.raw_name)

    def to_dict(self) -> dict:
        return {
            "raw_name": self.raw_name,
            "canonical_id": self.canonical_id,
            "role_hint": self.role_hint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompanyRef":
        return cls(
            raw_name=d["raw_name"],
            canonical_id=d.get("canonical_id"),
            role_hint=d.get("role_hint", "unknown"),
        )


@dataclass
class ShipmentRecord:
    """One bill-of-lading row.

    ``weight_kg`` is stored in kilograms exactly as given; the sample data's
    weight column carries no unit, kilograms is the documented assumption.
    ``quantity`` is a verbatim package/piece count with no unit semantics.
    """

    shipper: CompanyRef
    consignee: CompanyRef
    product_desc: str
    quantity: int
    weight_kg: float
    shipper_address: str | None = None
    consignee_address: str | None = None
    arrival_date: date | None = None
    record_id: str = ""

    def __post_init__(self):
        if not self.product_desc or not self.product_desc.strip():
            raise ValueError("product_desc must be non-empty")
        if self.quantity < 0:
            raise ValueError("quantity must be >= 0")
        if self.weight_kg < 0:
            raise ValueError("weight_kg must be >= 0")
        if not self.record_id:
            self.record_id = content_hash(
                self.shipper.raw_name,
                self.shipper_address or "",
                self.consignee.raw_name,
                self.consignee_address or "",
                self.arrival_date.isoformat() if self.arrival_date else "",
                self.product_desc,
                self.quantity,
                repr(self.weight_kg),
                prefix="r",
            )

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "shipper": self.shipper.to_dict(),
            "shipper_address": self.shipper_address,
            "consignee": self.consignee.to_dict(),
            "consignee_address": self.consignee_address,
            "arrival_date": self.arrival_date.isoformat() if self.arrival_date else None,
            "product_desc": self.product_desc,
            "quantity": self.quantity,
            "weight_kg": self.weight_kg,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ShipmentRecord":
        return cls(
            shipper=CompanyRef.from_dict(d["shipper"]),
            consignee=CompanyRef.from_dict(d["consignee"]),
            product_desc=d["product_desc"],
            quantity=int(d["quantity"]),
            weight_kg=float(d["weight_kg"]),
            shipper_address=d.get("shipper_address"),
            consignee_address=d.get("consignee_address"),
            arrival_date=date.fromisoformat(d["arrival_date"]) if d.get("arrival_date") else None,
            record_id=d.get("record_id", ""),
        )


@dataclass
class TransactionTriple:
    """An extracted (buyer, supplier, item) relation with provenance.

    At least one of buyer/supplier/item must be non-null. ``source_id``
    points back at the sentence or record the relation came from.
    """

    buyer: CompanyRef | None
    supplier: CompanyRef | None
    item: str | None
    source_id: str
    confidence: float = 1.0
    triple_id: str | None = None

    def __post_init__(self):
        if self.buyer is None and self.supplier is None and self.item is None:
            raise ValueError("at least one of buyer/supplier/item must be non-null")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")

    @property
    def has_placeholders(self) -> bool:
        return any(
            ref is not None and ref.placeholder for ref in (self.buyer, self.supplier)
        ) or is_placeholder(self.item)

    def to_dict(self) -> dict:
        return {
            "triple_id": self.triple_id,
            "source_id": self.source_id,
            "buyer": self.buyer.to_dict() if self.buyer else None,
            "supplier": self.supplier.to_dict() if self.supplier else None,
            "item": self.item,
            "confidence": self.confidence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransactionTriple":
        return cls(
            buyer=CompanyRef.from_dict(d["buyer"]) if d.get("buyer") else None,
            supplier=CompanyRef.from_dict(d["supplier"]) if d.get("supplier") else None,
            item=d.get("item"),
            source_id=d["source_id"],
            confidence=float(d.get("confidence", 1.0)),
            triple_id=d.get("triple_id"),
        )


@dataclass(frozen=True)
class EmissionFactor:
    """kg CO2-equivalent emitted per kg shipped, with provenance."""

    per_kg_co2e: float
    provenance: str = "manual"

    def __post_init__(self):
        if self.per_kg_co2e < 0:
            raise ValueError("per_kg_co2e must be >= 0")
        if self.provenance not in FACTOR_PROVENANCES:
            raise ValueError(f"unknown factor provenance: {self.provenance!r}")

    def to_dict(self) -> dict:
        return {"per_kg_co2e": self.per_kg_co2e, "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d: dict) -> "EmissionFactor":
        return cls(per_kg_co2e=float(d["per_kg_co2e"]), provenance=d.get("provenance", "manual"))


@dataclass(frozen=True)
class Mention:
    """A detected company-name span inside a sentence."""

    start: int
    end: int
    surface: str

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError("mention span must satisfy 0 <= start < end")


@dataclass
class Sentence:
    """One transcript sentence with detected company mentions."""

    transcript_id: str
    index: int
    text: str
    mentions: list[Mention] = field(default_factory=list)
    id: str = ""

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("sentence index must be >= 0")
        if not self.id:
            self.id = content_hash(self.transcript_id, self.index, self.text, prefix="s")
        self._check_spans()

    def _check_spans(self):
        last_end = -1
        for m in self.mentions:
            if m.end > len(self.text):
                raise ValueError(f"mention span {m} exceeds text bounds")
            if m.start < last_end:
                raise ValueError("mention spans must be sorted and non-overlapping")
            if self.text[m.start : m.end] != m.surface:
                raise ValueError("mention surface does not match text span")
            last_end = m.end

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "transcript_id": self.transcript_id,
            "index": self.index,
            "text": self.text,
            "mentions": [[m.start, m.end, m.surface] for m in self.mentions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Sentence":
        return cls(
            transcript_id=d["transcript_id"],
            index=int(d["index"]),
            text=d["text"],
            mentions=[Mention(int(s), int(e), t) for s, e, t in d.get("mentions", [])],
            id=d.get("id", ""),
        )
