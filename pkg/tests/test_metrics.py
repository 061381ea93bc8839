from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from pyqu.metrics import (
    DEFAULT_CATALOG,
    MetricVector,
    RuleCatalog,
    collect_findings,
    compute_metric_vector,
    cyclomatic_complexity,
    halstead_counts,
    halstead_volume,
    parse_source,
    read_source,
)
from pyqu.metrics.rules import ApiRule, CatalogError
from pyqu.metrics.textual import count_syllables, flesch_reading_ease

MANIFEST = json.loads((FIXTURES / "metrics" / "manifest.json").read_text())
COUNT_KEYS = {"cc", "loc", "afp", "cp_internal", "cp_external", "tc", "halstead_N", "halstead_n"}


@pytest.mark.parametrize("name", sorted(MANIFEST))
def test_fixture_manifest(name):
    expected = MANIFEST[name]
    unit = read_source(FIXTURES / "metrics" / name, name)
    assert unit.parse_ok is expected["parse_ok"]
    got = compute_metric_vector(unit).to_dict()
    ops, rands = halstead_counts(unit)
    got["halstead_N"] = sum(ops.values()) + sum(rands.values())
    got["halstead_n"] = len(ops) + len(rands)
    for key, want in expected["metrics"].items():
        if key in COUNT_KEYS:
            assert got[key] == want, key
        else:
            tol = 1e-6 if key == "cr" else 1e-9
            assert abs(got[key] - want) <= tol, (key, got[key], want)


def test_text_round_trips(tmp_path):
    raw = "x = 1\r\n# caf\xe9\r\n".encode("utf-8")
    p = tmp_path / "a.py"
    p.write_bytes(raw)
    assert read_source(p).text.encode("utf-8") == raw


def test_parse_examples():
    ok = parse_source("a.py", "x = 1\n")
    assert ok.parse_ok and ok.index.functions == ()
    assert not parse_source("b.py", "def f(:\n").parse_ok
    idx = parse_source("c.py", "class A:\n  def m(self): self.x=1\n").index
    assert len(idx.classes) == 1
    assert idx.classes[0].fields == ("x",)
    assert idx.classes[0].methods == ("m",)


def test_invalid_utf8_is_replaced():
    unit = parse_source("d.py", b"x = '\xff'\n")
    assert unit.parse_ok
    assert "\ufffd" in unit.text


@pytest.mark.parametrize(
    "src,cc",
    [
        ("def f():\n    return 1\n", 1),
        ("def f(x):\n    if x:\n        return 1\n    return 0\n", 2),
        ("def f(x):\n    for i in x:\n        if i and x:\n            pass\n    return 0\n", 4),
        ("def f(x):\n    def g():\n        if x:\n            pass\n    return g\n", 3),
        ("import os\n\n\ndef f():\n    pass\n", 1),
        ('"""Doc."""\n', 0),
        ("x = [i for i in range(3) if i if i > 1]\n", 3),
        ("try:\n    pass\nexcept A:\n    pass\nexcept B:\n    pass\n", 3),
    ],
)
def test_cyclomatic_examples(src, cc):
    assert cyclomatic_complexity(parse_source("t.py", src)) == cc


def test_halstead_examples():
    # a = b + c: operators {=, +}, operands {a, b, c}; 5 * log2(5)
    assert halstead_volume(parse_source("t.py", "a = b + c\n")) == pytest.approx(5 * math.log2(5), abs=1e-12)
    # x = x + 1: operators {=, +}, operands {x, 1}; N=5, n=4
    assert halstead_volume(parse_source("t.py", "x = x + 1\n")) == pytest.approx(10.0, abs=1e-12)
    assert halstead_volume(parse_source("t.py", "")) == 0.0


def test_halstead_ignores_docstrings():
    bare = parse_source("t.py", "def f():\n    return 1\n")
    doc = parse_source("t.py", 'def f():\n    """A long docstring."""\n    return 1\n')
    assert halstead_volume(bare) == halstead_volume(doc)


def test_readability_examples():
    one = compute_metric_vector("# The cat sat.\nx = 1\n").cr
    assert one == pytest.approx(206.835 - 1.015 * 3 - 84.6 * 1, abs=1e-9)
    two = compute_metric_vector("# The cat sat.\n# The cat sat.\nx = 1\n").cr
    assert two == pytest.approx(one, abs=1e-9)
    assert flesch_reading_ease("") == 0.0


@pytest.mark.parametrize(
    "word,n",
    [("cat", 1), ("table", 2), ("note", 1), ("free", 1), ("readability", 5), ("rhythm", 1), ("bye", 1), ("a", 1)],
)
def test_syllables(word, n):
    assert count_syllables(word) == n


def test_type_consistency_examples():
    v = compute_metric_vector('x: int = "a"\n\ndef f() -> str:\n    return 1\n')
    assert v.tc == 2
    assert compute_metric_vector("x: float = 1\ny: int = True\n").tc == 0
    assert compute_metric_vector("def f(a, b=1):\n    pass\n\nf(1)\nf(1, 2)\nf()\nf(*x)\n").tc == 1


def test_degraded_values():
    v = compute_metric_vector("def f(:\n")
    assert v.cc == 0 and v.hv == 0.0 and v.tc == 0
    assert v.d == 5.0
    assert v.ch == 1.0 and v.apifc == 1.0
    ids = [f.rule_id for f in collect_findings(parse_source("t.py", "def f(:\n"))]
    assert "E999" in ids


def test_empty_is_neutral():
    assert compute_metric_vector("") == MetricVector.neutral()


def test_metric_vector_json_round_trip():
    v = compute_metric_vector((FIXTURES / "metrics" / "cohesion_two.py").read_text())
    assert MetricVector.from_dict(json.loads(v.to_json())) == v
    assert list(json.loads(v.to_json())) == list(MetricVector.keys())
    with pytest.raises(KeyError):
        MetricVector.from_dict({"bogus": 1})


def test_cohesion_degenerate_classes():
    assert compute_metric_vector("class A:\n    pass\n").ch == 1.0
    assert compute_metric_vector("class A:\n    x = 1\n").ch == 1.0


def test_coupling_counts_imports_and_references():
    v = compute_metric_vector("import os\nimport sys\n\n\ndef f():\n    return os.sep + sys.platform\n\n\ndef g():\n    return f()\n")
    assert (v.cp_internal, v.cp_external) == (1, 4)


def test_adc_requires_annotation_and_docstring():
    src = 'def f(x: int):\n    """Doc."""\n\n\ndef g(x):\n    """Doc."""\n'
    assert compute_metric_vector(src).adc == 0.5
    assert compute_metric_vector(src).dq == 1.0


def test_api_rules_in_loop_and_deprecated():
    src = "import torch\nfrom torch.autograd import Variable\n\nv = Variable(torch.zeros(1))\nwhile True:\n    torch.manual_seed(1)\n"
    unit = parse_source("t.py", src)
    ids = sorted(f.rule_id for f in collect_findings(unit))
    assert ids == ["F303", "F304"]
    # three framework call sites: Variable, torch.zeros, torch.manual_seed
    assert compute_metric_vector(unit).apifc == pytest.approx(1 - 2 / 3)


def test_catalog_validation():
    with pytest.raises(CatalogError):
        RuleCatalog(style_rules=(("S1", "a"), ("S1", "b")))
    with pytest.raises(CatalogError):
        RuleCatalog(severity_weights={"convention": 1, "warning": 2})
    with pytest.raises(CatalogError):
        RuleCatalog(api_rules=(ApiRule("X1", "torch", "deprecated_call", "(", "x"),))
    with pytest.raises(CatalogError):
        RuleCatalog(severity_weights={"convention": 1, "warning": 0, "error": 5})


def test_catalog_weights_change_defect_score():
    heavy = RuleCatalog(severity_weights={"convention": 3.0, "warning": 2.0, "error": 5.0})
    src = "def BadName():\n    pass\n"
    assert compute_metric_vector(src, DEFAULT_CATALOG).d == 1.0
    assert compute_metric_vector(src, heavy).d == 3.0


def test_disabling_style_rule():
    cat = RuleCatalog(style_rules=tuple(r for r in DEFAULT_CATALOG.style_rules if r[0] != "S106"))
    assert compute_metric_vector("def BadName():\n    pass\n", cat).scs == 1.0


source_text = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=200)
RATIO = ("scs", "apifc", "adc", "ch", "dq")


@settings(max_examples=150, deadline=None)
@given(source_text)
def test_metrics_never_crash_and_stay_in_range(text):
    v = compute_metric_vector(text)
    for key in RATIO:
        assert 0.0 <= getattr(v, key) <= 1.0
    for key in ("cc", "hv", "loc", "ccr", "afp", "d", "cp_internal", "cp_external", "tc"):
        assert getattr(v, key) >= 0


fixture_texts = st.sampled_from(sorted(MANIFEST)).map(lambda n: (FIXTURES / "metrics" / n).read_text())


@settings(max_examples=40, deadline=None)
@given(fixture_texts, st.text(alphabet="abc xyz.", max_size=40))
def test_appending_a_comment_keeps_code_metrics(text, comment):
    unit = parse_source("t.py", text)
    if not unit.parse_ok:
        return
    commented = parse_source("t.py", text + "# " + comment.strip() + "\n")
    a, b = compute_metric_vector(unit), compute_metric_vector(commented)
    assert (a.cc, a.hv, a.loc, a.tc, a.afp) == (b.cc, b.hv, b.loc, b.tc, b.afp)
