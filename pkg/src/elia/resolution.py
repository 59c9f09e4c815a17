"""Canonicalize company names across data sources.

Names are normalized (case, punctuation, corporate suffixes), then merged
with a union-find closure over token-set Jaccard similarity. Everything is
deterministic and order-independent so re-resolving a dataset always yields
the same canonical ids.
"""

from __future__ import annotations

import hashlib
import re
from collections import Counter
from dataclasses import dataclass, field

CORPORATE_SUFFIXES = frozenset(
    {"LTD", "INC", "LLC", "CO", "CORP", "JSC", "PLC", "GMBH", "SA", "AG", "BV", "NV", "SRL"}
)

_NON_ALNUM = re.compile(r"[^A-Z0-9]+")


@dataclass
class CanonicalEntity:
    canonical_id: str
    display_name: str
    aliases: set[str] = field(default_factory=set)
    source_count: dict[str, int] = field(default_factory=dict)


@dataclass
class ResolutionResult:
    alias_map: dict[str, str]
    entities: dict[str, CanonicalEntity]


def normalize_name(raw: str) -> str:
    """Normalized comparison form: upper-case, no punctuation, no suffixes.

    Trailing corporate-suffix tokens are dropped repeatedly (handles
    "CO LTD"). Never returns empty: if stripping suffixes would consume the
    whole name, the suffix stripping is skipped.
    """
    if not raw or not raw.strip():
        raise ValueError("name must be non-empty")
    upper = raw.upper()
    upper = _NON_ALNUM.sub(" ", upper).strip()
    tokens = upper.split()
    trimmed = list(tokens)
    while trimmed and trimmed[-1] in CORPORATE_SUFFIXES:
        trimmed.pop()
    if not trimmed:
        trimmed = tokens
    return " ".join(trimmed)


def token_jaccard(a: str, b: str) -> float:
    """Jaccard similarity of the token sets of two normalized names."""
    sa, sb = set(a.split()), set(b.split())
    if not sa and not sb:
        return 1.0
    union = sa | sb
    return len(sa & sb) / len(union)


class _UnionFind:
    def __init__(self, items):
        self.parent = {item: item for item in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic root: lexicographically smallest wins
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def canonical_id_for(normalized_form: str) -> str:
    return "c" + hashlib.sha256(normalized_form.encode("utf-8")).hexdigest()[:12]


def resolve(
    names: list[str],
    threshold: float = 0.8,
    sources: list[str] | None = None,
) -> ResolutionResult:
    """Group raw names into canonical entities.

    Names with equal normalized forms always share an entity; distinct
    normalized forms merge when their token-set Jaccard similarity reaches
    ``threshold`` (transitively, via union-find). The display name is the
    most frequent raw alias, ties broken by the lexicographically smallest.
    The canonical id hashes the cluster's smallest normalized form, so it
    does not depend on input order.
    """
    if not names:
        return ResolutionResult(alias_map={}, entities={})
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    if sources is not None and len(sources) != len(names):
        raise ValueError("sources, when given, must align with names")

    raw_counts = Counter(names)
    norm_of: dict[str, str] = {raw: normalize_name(raw) for raw in raw_counts}
    forms = sorted(set(norm_of.values()))

    uf = _UnionFind(forms)
    for i, fa in enumerate(forms):
        for fb in forms[i + 1 :]:
            if token_jaccard(fa, fb) >= threshold:
                uf.union(fa, fb)

    clusters: dict[str, list[str]] = {}
    for form in forms:
        clusters.setdefault(uf.find(form), []).append(form)

    alias_map: dict[str, str] = {}
    entities: dict[str, CanonicalEntity] = {}
    for root, member_forms in clusters.items():
        cid = canonical_id_for(min(member_forms))
        aliases = {raw for raw in raw_counts if norm_of[raw] in set(member_forms)}
        display = min(aliases, key=lambda raw: (-raw_counts[raw], normalize_name(raw), raw))
        entity = CanonicalEntity(canonical_id=cid, display_name=display, aliases=aliases)
        for raw in aliases:
            alias_map[raw] = cid
        entities[cid] = entity

    if sources is None:
        for raw, count in raw_counts.items():
            ent = entities[alias_map[raw]]
            ent.source_count["all"] = ent.source_count.get("all", 0) + count
    else:
        for raw, source in zip(names, sources):
            ent = entities[alias_map[raw]]
            ent.source_count[source] = ent.source_count.get(source, 0) + 1

    return ResolutionResult(alias_map=alias_map, entities=entities)


def apply_overrides(result: ResolutionResult, overrides: dict[str, str]) -> ResolutionResult:
    """Apply manual raw -> canonical-name overrides; they win over merges.

    The override target may be any known raw alias (the raw name joins that
    alias's entity) or a brand-new name (a fresh entity is created).
    """
    for raw, target in overrides.items():
        if target in result.alias_map:
            cid = result.alias_map[target]
        else:
            cid = canonical_id_for(normalize_name(target))
            if cid not in result.entities:
                result.entities[cid] = CanonicalEntity(
                    canonical_id=cid, display_name=target, aliases={target}
                )
                result.alias_map[target] = cid
        old_cid = result.alias_map.get(raw)
        if old_cid == cid:
            continue
        if old_cid is not None and old_cid in result.entities:
            old = result.entities[old_cid]
            old.aliases.discard(raw)
            if not old.aliases:
                del result.entities[old_cid]
        result.alias_map[raw] = cid
        result.entities[cid].aliases.add(raw)
    return result


def load_overrides(path: str) -> dict[str, str]:
    """Read a manual override file: ndjson rows {"raw": ..., "canonical": ...}."""
    import json

    overrides = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            row = json.loads(line)
            if "raw" not in row or "canonical" not in row:
                raise ValueError(f"{path}:{lineno}: override rows need 'raw' and 'canonical'")
            overrides[row["raw"]] = row["canonical"]
    return overrides
