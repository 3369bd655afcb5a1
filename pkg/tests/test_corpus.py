import pytest

from qhyp.algebra import Monomial, VAR_N, VAR_Q
from qhyp.corpus import (
    Corpus, CorpusError, ParseError, load_corpus, parse_corpus, print_corpus,
)
from qhyp.term import ProductForm, SeriesExpr

BASIC = '''
identity "q-binomial" {
  kind = summation
  section = "2.1"
  params = [a, z]
  shift = [z]
  lhs = sum(poch(a; q) / poch(q; q) * pow(z, k))
  rhs = poch_inf(a*z; q) / poch_inf(z; q)
  constraints = ["|z| < 1"]
  max_order = 1
}

identity "demo-psi" {
  kind = bilateral
  section = "2.3"
  params = [a, b, z]
  shift = [b]
  lhs = psi(1, 1; [a]; [b]; q, z)
  rhs = poch_inf(b/a; q) / (poch_inf(b; q) * poch_inf(b/(a*z); q))
  constraints = ["|z| < 1", "|b/(a*z)| < 1"]
  depends = ["q-binomial"]
  script = [fail_direct, specialize(b = q; via = "q-binomial"; map = {a = a, z = z})]
}
'''


def sides_equal(s1, s2):
    if isinstance(s1, SeriesExpr) != isinstance(s2, SeriesExpr):
        return False
    if isinstance(s1, SeriesExpr):
        return (len(s1.components) == len(s2.components)
                and all(a == b for a, b in zip(s1.components, s2.components)))
    return s1 == s2


def test_parse_basic_fields():
    c = parse_corpus(BASIC)
    e = c.by_id["q-binomial"]
    assert e.kind == "summation" and e.section == "2.1"
    assert e.params == ["a", "z"] and e.shift == ["z"]
    assert e.max_order == 1
    t = e.lhs.components[0]
    assert not t.bilateral
    assert ("a" in t.pochs[0][0].vars())
    assert isinstance(e.rhs, ProductForm) and len(e.rhs.factors) == 2
    psi = c.by_id["demo-psi"]
    assert psi.bilateral
    assert psi.depends == ["q-binomial"]
    assert psi.script[0] == ("fail_direct", {})
    name, args = psi.script[1]
    assert name == "specialize" and args["via"] == "q-binomial"
    assert args["map"]["z"] == Monomial.var("z")


def test_phi_quad_factor():
    # a 0-phi-1 carries [(-1)^k q^C(k,2)]^2
    c = parse_corpus('''
identity "x" {
  kind = summation
  section = "t"
  params = [c, z]
  shift = [c]
  lhs = phi(0, 1; []; [c]; q, z)
  rhs = 1
}
''')
    t = c.by_id["x"].lhs.components[0]
    assert t.quad == 2
    assert t.geom == Monomial.var("z")


def test_round_trip_structural():
    c = parse_corpus(BASIC)
    c2 = parse_corpus(print_corpus(c))
    assert [e.id for e in c2.entries] == [e.id for e in c.entries]
    for e1, e2 in zip(c.entries, c2.entries):
        assert sides_equal(e1.lhs, e2.lhs), e1.id
        assert sides_equal(e1.rhs, e2.rhs), e1.id
        assert e1.constraint_text == e2.constraint_text
        assert e1.script == e2.script
        assert e1.kind == e2.kind and e1.section == e2.section


def test_relations_substituted():
    c = parse_corpus('''
identity "rel" {
  kind = summation
  section = "t"
  params = [a, e, f]
  shift = [a]
  relations = [f = a*q/e]
  lhs = sum(poch(f; q) * pow(q, k))
  rhs = poch_inf(f; q)
}
''')
    e = c.by_id["rel"]
    assert e.free_params() == ["a", "e"]
    arg = e.lhs.components[0].pochs[0][0]
    assert arg == Monomial.var("a") * Monomial.var("e") ** -1 * Monomial.var(VAR_Q)
    assert "f" not in e.rhs.factors[0][0].vars()


def test_parse_error_line_col():
    bad = 'identity "x" {\n  kind = summation\n  section = "s"\n  params = [a]\n  lhs = sum(poch(a; 2))\n  rhs = 1\n}'
    with pytest.raises(ParseError) as exc:
        parse_corpus(bad)
    assert exc.value.line == 5
    assert exc.value.col > 0


def test_unknown_symbol_rejected():
    bad = BASIC.replace("pow(z, k)", "pow(w, k)")
    with pytest.raises(ParseError, match="unknown symbol"):
        parse_corpus(bad)


def test_poch_arg_must_be_monomial():
    bad = BASIC.replace("poch(a; q)", "poch(a + 1; q)")
    with pytest.raises(ParseError, match="monomial"):
        parse_corpus(bad)


def test_missing_dependency_and_cycle():
    with pytest.raises(CorpusError, match="unknown id"):
        parse_corpus(BASIC.replace('depends = ["q-binomial"]',
                                   'depends = ["nonesuch"]'))
    cyc = '''
identity "p" {
  kind = summation
  section = "t"
  params = [a]
  lhs = sum(poch(a; q))
  rhs = 1
  depends = ["r"]
}
identity "r" {
  kind = summation
  section = "t"
  params = [a]
  lhs = sum(poch(a; q))
  rhs = 1
  depends = ["p"]
}
'''
    with pytest.raises(CorpusError, match="cycle"):
        parse_corpus(cyc)


def test_proof_order_dependencies_first():
    c = parse_corpus(BASIC)
    assert c.proof_order(["demo-psi"]) == ["q-binomial", "demo-psi"]
    assert c.proof_order() == ["q-binomial", "demo-psi"]


def test_shipped_corpus_loads():
    c = load_corpus()
    assert len(c.entries) >= 40
    kinds = {e.kind for e in c.entries}
    assert kinds >= {"summation", "two-term-summation", "bilateral",
                     "transformation", "three-term-transformation",
                     "difference-zero", "script"}
    bilateral = [e for e in c.entries if e.kind == "bilateral"]
    assert len(bilateral) == 6
    sec3 = [e for e in c.entries if e.section.startswith("3")]
    assert len(sec3) >= 9
    # every entry parses back to the same structure
    c2 = parse_corpus(print_corpus(c))
    for e1, e2 in zip(c.entries, c2.entries):
        assert sides_equal(e1.lhs, e2.lhs), e1.id
        assert sides_equal(e1.rhs, e2.rhs), e1.id
