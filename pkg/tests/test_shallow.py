import json

import pytest
from hypothesis import given, settings

from bikt import fixtures
from bikt.shallow import (
    RULESETS, CheckError, PolarityMismatch, ProofFormatError, Rule, ShallowProof,
    check_instance, check_proof, display_negative, display_neutral, display_positive,
    dump_proof, expand_derived, infer, load_proof,
)
from bikt.syntax import (
    EMPTY, HOLE, Atom, Black, Comma, Dia, Fml, Polarity, Turnstile, White, comma, find_hole,
    normalize, parse_structure,
)

from strategies import contexts, small_structures

p, q = Atom("p"), Atom("q")
X, Y, Z = (Fml(Atom(n)) for n in "xyz")


def test_id_accepts_any_context():
    check_instance(Rule.Id, parse_structure("x, p |> p, y"), [], dict(A=p, X=X, Y=Y))


def test_dia_right_needs_white_bullet():
    check_instance(Rule.DiaR, Turnstile(White(X), Fml(Dia(p))), [Turnstile(X, Fml(p))],
                   dict(A=p, X=X))
    with pytest.raises(CheckError):
        check_instance(Rule.DiaR, Turnstile(X, Fml(Dia(p))), [Turnstile(X, Fml(p))],
                       dict(A=p, X=X))


def test_wrong_arity_rejected():
    with pytest.raises(CheckError):
        check_instance(Rule.Id, parse_structure("p |> p"), [parse_structure("p |> p")], dict(A=p))


def test_check_instance_normalizes_inputs():
    raw = Turnstile(Comma((Fml(p), X)), Comma((Fml(p), EMPTY, Y)))
    check_instance(Rule.Id, raw, [], dict(A=p, X=X, Y=Y))


def test_single_id_node():
    assert check_proof(infer(Rule.Id, A=p), RULESETS["base"]) == []


@pytest.mark.parametrize("name", sorted(fixtures.FIXTURES))
def test_fixtures_check_under_their_rule_set(name):
    build, rules = fixtures.FIXTURES[name]
    proof = build()
    assert check_proof(proof, RULESETS[rules]) == []
    assert not any(n.rule is Rule.Cut for n in proof.nodes())


def test_nullary_distribution_needs_e_rules():
    errs = check_proof(fixtures.white_nullary(), RULESETS["base"])
    assert errs and all(e.side == "rule" for e in errs)
    assert any("BulletTriR" in e.node for e in errs)


def test_classical_fixtures_need_inverse_rules():
    assert check_proof(fixtures.excluded_middle(), RULESETS["e"])
    assert check_proof(fixtures.dual_contradiction(), RULESETS["e"])


def test_rule_set_inclusions():
    base, e, cl = RULESETS["base"], RULESETS["e"], RULESETS["classical"]
    assert Rule.Cut not in base and Rule.Cut in RULESETS["base+cut"]
    assert e.enabled - base.enabled == {Rule.BulletTriR, Rule.CircTriR}
    assert cl.enabled - e.enabled == {Rule.SLInv, Rule.SRInv}


def test_corrupted_node_is_located():
    good = fixtures.tense_unit()
    inner = good.premises[0]
    bad_inner = ShallowProof(inner.rule, parse_structure("p |> box p"), inner.premises,
                             inner.witness)
    bad = ShallowProof(good.rule, good.conclusion, (bad_inner,), good.witness)
    errs = check_proof(bad, RULESETS["base"])
    assert any(e.node.startswith("root.0") for e in errs)


def test_height_and_cut_rank():
    proof = fixtures.tense_unit()
    assert proof.height == 5 and proof.node_count == 5 and proof.cut_rank == 0
    left = infer(Rule.Id, A=p)
    cut = infer(Rule.Cut, left, left, A=p, X1=Fml(p), Y2=Fml(p))
    assert cut.cut_rank == 1 and cut.conclusion == left.conclusion


@pytest.mark.parametrize("name", sorted(fixtures.FIXTURES))
def test_json_round_trip(name):
    build, rules = fixtures.FIXTURES[name]
    proof = build()
    text = dump_proof(proof)
    back = load_proof(text)
    assert back.conclusion == proof.conclusion and back.node_count == proof.node_count
    assert check_proof(back, RULESETS[rules]) == []
    assert dump_proof(back) == text
    doc = json.loads(text)
    assert {"rule", "conclusion", "witness", "premises"} <= set(doc)


@pytest.mark.parametrize("text", ["{}", '{"rule": "Nope", "conclusion": "p |> p"}', "[1]",
                                  '{"rule": "Id", "conclusion": "p |> (", "witness": {}}'])
def test_malformed_proof_files(text):
    with pytest.raises(ProofFormatError):
        load_proof(text)


def test_expand_derived_rules():
    base = infer(Rule.Id, A=p, X=Fml(q))
    step = infer(Rule.RpTriR, base, X1=Fml(q), X2=Fml(p), Y=Fml(p), dir="up")
    back = infer(Rule.RpTriR, step, X1=Fml(q), X2=Fml(p), Y=Fml(p))
    out = expand_derived(back)
    assert out.conclusion == back.conclusion
    assert Rule.RpTriR not in out.rules_used()
    assert check_proof(out, RULESETS["base"]) == []


def test_display_examples():
    frag = display_neutral(X, White(HOLE))
    assert len(frag) == 1 and frag.steps[0][0] is Rule.RpCirc
    assert frag.bottom == Turnstile(Black(X), HOLE)
    assert len(display_neutral(X, HOLE)) == 0
    frag = display_positive(X, Turnstile(Fml(Atom("w")), HOLE))
    assert len(frag) == 1 and frag.bottom == Turnstile(comma(X, Fml(Atom("w"))), HOLE)
    with pytest.raises(PolarityMismatch):
        display_negative(X, White(HOLE))


def _display_for(ctx):
    ctx = normalize(ctx)
    pol = find_hole(ctx).polarity if ctx != HOLE else Polarity.NEUTRAL
    builder = {Polarity.NEUTRAL: display_neutral, Polarity.POSITIVE: display_positive,
               Polarity.NEGATIVE: display_negative}[pol]
    return builder


@settings(max_examples=80, deadline=None)
@given(contexts, small_structures)
def test_display_round_trip(ctx, filler):
    for ctx_right in (True, False):
        frag = _display_for(ctx)(X, ctx, ctx_right)
        assert frag.check() == []
        loop = frag.then(frag.inverse())
        assert loop.top == loop.bottom and loop.check() == []
        concrete = frag.instantiate(normalize(Comma((filler, Z))))
        assert concrete.check() == []
