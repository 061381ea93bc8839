from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pyqu.dataset import (
    CATEGORIES,
    LabeledCommitRecord,
    ValidationError,
    cochran_sample_size,
    cohens_kappa,
    load_dataset,
    load_taxonomy,
    parse_taxonomy,
    save_dataset,
    srs_sample,
)


def test_bundled_catalog_shape():
    cat = load_taxonomy()
    assert len(cat) == 61
    assert set(cat.categories) == set(CATEGORIES) and len(CATEGORIES) == 13
    assert cat["Extract Method"].frequency == 289
    ok, message = cat.frequency_check()
    assert not ok and "2332" in message and "2338" in message
    assert all(cat.improving(qa) for qa in ("UN", "RE", "MA", "US", "MO"))


def test_catalog_entry_round_trip():
    cat = load_taxonomy()
    again = parse_taxonomy([e.to_dict() for e in cat.entries])
    assert again.entries == cat.entries
    assert again.frequency_check()[0]


@pytest.mark.parametrize(
    "entry",
    [
        {"category": "Nope", "name": "x", "frequency": 1, "improves": ["UN"]},
        {"category": CATEGORIES[0], "name": "x", "frequency": -1, "improves": ["UN"]},
        {"category": CATEGORIES[0], "name": "x", "frequency": 1, "improves": ["XX"]},
        {"category": CATEGORIES[0], "name": "x", "frequency": 1, "improves": []},
        {"category": CATEGORIES[0], "name": "x", "frequency": 1, "improves": ["UN"], "detected_by": ["grep"]},
        {"category": CATEGORIES[0], "frequency": 1, "improves": ["UN"]},
    ],
)
def test_catalog_rejects_bad_entries(entry):
    with pytest.raises(ValidationError):
        parse_taxonomy([entry])


def test_catalog_rejects_duplicates_and_versions(tmp_path):
    e = {"category": CATEGORIES[0], "name": "x", "frequency": 1, "improves": ["UN"]}
    with pytest.raises(ValidationError):
        parse_taxonomy([e, e])
    with pytest.raises(ValidationError):
        parse_taxonomy({"format_version": 2, "entries": [e]})
    bad = tmp_path / "t.json"
    bad.write_text("{oops")
    with pytest.raises(ValidationError):
        load_taxonomy(bad)
    good = tmp_path / "g.json"
    good.write_text(json.dumps({"entries": [e], "reported_total": 1}))
    assert load_taxonomy(good).frequency_check()[0]


# statistics -------------------------------------------------------------


def test_kappa_examples():
    assert cohens_kappa([[20, 5], [10, 65]]) == pytest.approx(0.625, abs=1e-12)
    assert cohens_kappa([[5, 0], [0, 5]]) == 1.0
    assert cohens_kappa([[7]]) == 1.0
    with pytest.raises(ValueError):
        cohens_kappa([[1, 2]])
    with pytest.raises(ValueError):
        cohens_kappa([[0, 0], [0, 0]])
    with pytest.raises(ValueError):
        cohens_kappa([[1, -1], [0, 1]])


matrices = st.integers(2, 4).flatmap(
    lambda k: st.lists(st.lists(st.integers(0, 50), min_size=k, max_size=k), min_size=k, max_size=k)
)


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_kappa_bounded(m):
    if sum(map(sum, m)) == 0:
        return
    try:
        k = cohens_kappa(m)
    except ValueError:
        return
    assert -1.0 - 1e-12 <= k <= 1.0 + 1e-12


@pytest.mark.parametrize(
    "population,expected",
    [(None, 385), (math.inf, 385), (3863, 350), (3999, 351), (3025, 341), (4915, 357), (2247, 329)],
)
def test_cochran(population, expected):
    assert cochran_sample_size(population) == expected


def test_cochran_other_levels_and_errors():
    assert cochran_sample_size(confidence=0.99, margin=0.05) == 664
    assert cochran_sample_size(1) == 1
    with pytest.raises(ValueError):
        cochran_sample_size(confidence=0.8)
    with pytest.raises(ValueError):
        cochran_sample_size(margin=0)


def test_srs_sample():
    items = list(range(100))
    a = srs_sample(items, 10, seed=3)
    assert a == srs_sample(items, 10, seed=3)
    assert len(set(a)) == 10
    with pytest.raises(ValueError):
        srs_sample(items, 101)


# labelled commit files -------------------------------------------------


def _records():
    return [
        LabeledCommitRecord("org/a", "abc", {"UN": True, "re": False}, ("Extract Method",), "tidy, with comma"),
        LabeledCommitRecord("org/a", "def", {"MO": True}, (), ""),
    ]


def test_dataset_round_trip(tmp_path):
    path = tmp_path / "d.csv"
    save_dataset(_records(), path, load_taxonomy())
    assert path.read_text().startswith("# format_version: 1\n")
    back = load_dataset(path, load_taxonomy())
    assert back == _records()
    assert back[0].label("re") is False and back[1].label("UN") is None


def test_dataset_errors(tmp_path):
    with pytest.raises(ValidationError):
        save_dataset(_records() + _records()[:1], tmp_path / "x.csv")
    bad = [LabeledCommitRecord("r", "s", {}, ("Not A Change",))]
    with pytest.raises(ValidationError):
        save_dataset(bad, tmp_path / "x.csv", load_taxonomy())
    path = tmp_path / "d.csv"
    save_dataset(_records(), path)
    lines = path.read_text().splitlines()
    lines[3] = lines[3].replace(",1,", ",yes,", 1)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match="line 4"):
        load_dataset(path)
    path.write_text("# format_version: 9\n")
    with pytest.raises(ValidationError, match="line 1"):
        load_dataset(path)
