from __future__ import annotations

import random

import pytest

from elia.resolution import (
    apply_overrides,
    normalize_name,
    resolve,
    token_jaccard,
)


def test_normalize_strips_single_suffix():
    assert normalize_name("PELTER WINERY LTD") == "PELTER WINERY"


def test_normalize_strips_stacked_suffixes():
    assert (
        normalize_name("BAODING HUANGHENG BAGS MANUFACTURING CO LTD")
        == "BAODING HUANGHENG BAGS MANUFACTURING"
    )


def test_normalize_never_empties():
    assert normalize_name("LLC") == "LLC"
    assert normalize_name("CO LTD") == "CO LTD"


def test_normalize_case_and_punctuation():
    assert normalize_name("Samsung Electronics America, Inc.") == "SAMSUNG ELECTRONICS AMERICA"


def test_normalize_is_idempotent():
    for raw in ("PELTER WINERY LTD", "a.b.c co ltd", "LLC", "Global-Trade Partners PLC"):
        once = normalize_name(raw)
        assert normalize_name(once) == once


def test_case_punct_variants_merge():
    result = resolve(
        ["Samsung Electronics America Inc", "SAMSUNG ELECTRONICS AMERICA INC."], threshold=0.9
    )
    assert len(result.entities) == 1
    ids = set(result.alias_map.values())
    assert len(ids) == 1


def test_distinct_firms_stay_apart():
    result = resolve(["PELTER WINERY LTD", "ISRAELI WINE DIRECT LLC"], threshold=0.9)
    assert len(result.entities) == 2


def _spelling_variant_fixture():
    """40 raw names: 37 distinct firms plus 3 spellings of one more firm."""
    variants = [
        "GLOBAL TEXTILE TRADING PARTNERS LTD",
        "Global Textile Trading Partners Co Ltd",
        "GLOBAL TEXTILE TRADING PARTNER INC",
    ]
    firsts = [
        "ALFA", "BRAVO", "CYGNUS", "DELTA", "ECHO", "FOXTROT", "GRANITE", "HARBOR",
        "IRIS", "JUNIPER", "KESTREL", "LUMEN", "MERIDIAN", "NIMBUS", "ONYX", "PIONEER",
        "QUARTZ", "RIDGELINE", "SABLE", "TUNDRA", "UMBER", "VERTEX", "WILLOW", "XENON",
        "YARROW", "ZEPHYR", "AMBERLY", "BOREAL", "CINDER", "DUSKFIELD", "EMBERLY",
        "FALLOWS", "GREYSTONE", "HOLLOWAY", "IRONWOOD", "JETTISON", "KILNWORTH",
    ]
    seconds = ["MINING", "SHIPPING", "FOUNDRY", "LOGISTICS", "PACKAGING", "FREIGHT"]
    others = [f"{first} {seconds[i % len(seconds)]} CORP" for i, first in enumerate(firsts)]
    return variants, others


def test_fixture_similarity_structure():
    """Exhaustive pairwise check that the constructed fixture is valid:
    the variants chain together at 0.6 while every other pair stays below."""
    variants, others = _spelling_variant_fixture()
    forms = [normalize_name(n) for n in variants]
    assert forms[0] == forms[1]  # suffix-only variation
    assert token_jaccard(forms[0], forms[2]) >= 0.6
    other_forms = [normalize_name(n) for n in others]
    for i, fa in enumerate(other_forms):
        for fb in other_forms[i + 1 :]:
            assert token_jaccard(fa, fb) < 0.6, (fa, fb)
        for fv in forms:
            assert token_jaccard(fa, fv) < 0.6, (fa, fv)


def test_spelling_variants_collapse_to_38_entities():
    variants, others = _spelling_variant_fixture()
    names = variants + others
    assert len(names) == 40
    result = resolve(names, threshold=0.6)
    assert len(result.entities) == 38
    variant_ids = {result.alias_map[v] for v in variants}
    assert len(variant_ids) == 1


def test_resolve_deterministic_and_order_independent():
    variants, others = _spelling_variant_fixture()
    names = variants + others
    base = resolve(names, threshold=0.6)
    rng = random.Random(7)
    for _ in range(3):
        shuffled = list(names)
        rng.shuffle(shuffled)
        again = resolve(shuffled, threshold=0.6)
        assert again.alias_map == base.alias_map
        assert {cid: e.display_name for cid, e in again.entities.items()} == {
            cid: e.display_name for cid, e in base.entities.items()
        }


def test_resolve_idempotent_on_display_names():
    variants, others = _spelling_variant_fixture()
    first = resolve(variants + others, threshold=0.6)
    display_names = sorted(e.display_name for e in first.entities.values())
    second = resolve(display_names, threshold=0.6)
    assert len(second.entities) == len(first.entities)


def test_display_name_most_frequent_then_lexicographic():
    result = resolve(["ACME CO", "ACME CO", "ACME CO.", "ACME"], threshold=0.9)
    (entity,) = result.entities.values()
    assert entity.display_name == "ACME CO"
    tie = resolve(["ACME LTD", "ACME INC"], threshold=0.9)
    (entity,) = tie.entities.values()
    assert entity.display_name == "ACME INC"


def test_merge_partition_matches_pairwise_similarity():
    """The partition must be exactly the transitive closure of the pairwise
    similarity relation: similar pairs share an entity, and clusters that
    stayed apart contain no cross-pair at or above the threshold."""
    rng = random.Random(42)
    vocab = ["IRON", "COPPER", "TIN", "ZINC", "GOLD", "TRADING", "MINING", "GROUP", "WORKS"]
    for _ in range(25):
        names = [
            " ".join(rng.sample(vocab, rng.randint(1, 3)))
            for _ in range(rng.randint(2, 12))
        ]
        threshold = rng.choice([0.4, 0.6, 0.8])
        result = resolve(names, threshold=threshold)
        forms = {raw: normalize_name(raw) for raw in names}
        for a in names:
            for b in names:
                sim = token_jaccard(forms[a], forms[b])
                same = result.alias_map[a] == result.alias_map[b]
                if sim >= threshold:
                    assert same, (a, b, sim)
        # cross-cluster pairs must all be dissimilar
        clusters: dict[str, list[str]] = {}
        for raw in names:
            clusters.setdefault(result.alias_map[raw], []).append(raw)
        for cid_a, members_a in clusters.items():
            for cid_b, members_b in clusters.items():
                if cid_a >= cid_b:
                    continue
                for a in members_a:
                    for b in members_b:
                        assert token_jaccard(forms[a], forms[b]) < threshold


def test_threshold_one_with_distinct_token_sets():
    rng = random.Random(9)
    vocab = [f"TOKEN{i}" for i in range(30)]
    for _ in range(10):
        count = rng.randint(1, 10)
        picks = rng.sample(vocab, count)
        names = [f"{p} HOLDINGS" for p in picks]
        result = resolve(names, threshold=1.0)
        assert len(result.entities) == len(set(names))


def test_resolve_rejects_bad_threshold():
    with pytest.raises(ValueError):
        resolve(["A CO"], threshold=1.5)


def test_empty_names_yield_empty_result():
    result = resolve([], threshold=0.8)
    assert result.alias_map == {} and result.entities == {}


def test_source_counts():
    result = resolve(
        ["ACME LTD", "ACME INC", "OTHER CORP"],
        threshold=0.9,
        sources=["bol", "transcript", "bol"],
    )
    acme = result.entities[result.alias_map["ACME LTD"]]
    assert acme.source_count == {"bol": 1, "transcript": 1}


def test_manual_overrides_win():
    result = resolve(["Samsung", "SAMSUNG ELECTRONICS AMERICA INC"], threshold=0.8)
    assert result.alias_map["Samsung"] != result.alias_map["SAMSUNG ELECTRONICS AMERICA INC"]
    merged = apply_overrides(result, {"Samsung": "SAMSUNG ELECTRONICS AMERICA INC"})
    assert merged.alias_map["Samsung"] == merged.alias_map["SAMSUNG ELECTRONICS AMERICA INC"]
    assert len(merged.entities) == 1


def test_override_to_fresh_name_creates_entity():
    result = resolve(["ACME LTD"], threshold=0.8)
    patched = apply_overrides(result, {"ACME LTD": "Acme Holdings"})
    cid = patched.alias_map["ACME LTD"]
    assert patched.entities[cid].display_name == "Acme Holdings"
    assert patched.alias_map["Acme Holdings"] == cid
