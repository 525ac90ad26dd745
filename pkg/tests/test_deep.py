import json

import pytest

from conftest import corpus_runs

from bikt.deep import (
    Calculus, DeepRule, HeadMismatch, Logic, Proved, SearchConfig, UnsupportedConnective,
    UnsupportedLanguage, applicable, compile_to_shallow, dump_proof, is_left_saturated,
    is_realised, is_right_saturated, is_saturated, proof_from_json, proof_to_json, prove,
    replay, shallow_ruleset, superset,
)
from bikt.shallow import RULESETS, Rule, check_proof, expand_derived
from bikt.syntax import (
    EMPTY, And, Atom, BBox, BDia, Black, Box, Dia, Excl, Fml, Imp, Or, Turnstile, White,
    comma, parse_formula, parse_structure, subformulas,
)

p, q, r = (Fml(Atom(n)) for n in "pqr")
RAW = SearchConfig(calculus=Calculus.RAW)


def _rules(seq, cfg=None):
    return [(i.rule, i.principal) for i in applicable(parse_structure(seq), cfg)]


def test_raw_implication_left_needs_strict_context():
    got = _rules("w[a, b -> c] |> d", RAW)
    assert got == [(DeepRule.ImpL, Fml(parse_formula("b -> c")))]


def test_black_dia_propagates_into_white_structure():
    got = _rules("emp |> (p |> w[bdia p])")
    assert [g[0] for g in got] == [DeepRule.BDiaR1]


def test_identity_only_on_axiom():
    assert [g[0] for g in _rules("p |> p")] == [DeepRule.Id]
    assert [g[0] for g in _rules("p |> p", RAW)] == [DeepRule.Id]


def test_saturation_examples():
    assert is_saturated(parse_structure("p, q |> r"))
    assert not is_saturated(parse_structure("p |> p"))
    conj = Fml(And(Atom("p"), Atom("q")))
    assert not is_left_saturated(White(conj))
    assert is_left_saturated(White(comma(conj, p, q)))
    assert not is_right_saturated(Black(Fml(Or(Atom("p"), Atom("q")))))
    with pytest.raises(HeadMismatch):
        is_saturated(p)


def test_realisation_examples():
    z, a = Fml(Atom("z")), Atom("a")
    assert is_realised(Box(a), Turnstile(EMPTY, White(Turnstile(z, Fml(a)))), "right")
    assert is_realised(BDia(a), Turnstile(Black(Turnstile(Fml(a), z)), EMPTY), "left")
    assert not is_realised(Imp(a, a), Turnstile(EMPTY, comma(z, Fml(a))), "right")
    assert is_realised(Imp(a, a), Turnstile(EMPTY, Turnstile(Fml(a), Fml(a))), "right")
    with pytest.raises(UnsupportedConnective):
        is_realised(And(a, a), EMPTY, "left")


def test_superset_examples():
    assert superset(parse_structure("p, q |> r"), parse_structure("p |> r"))
    assert not superset(parse_structure("p |> r"), parse_structure("p |> r"))
    assert superset(White(comma(p, q)), White(p))
    with pytest.raises(HeadMismatch):
        superset(White(p), Black(p))


def test_tense_unit_search():
    out = prove("p -> box bdia p")
    assert isinstance(out, Proved)
    assert {DeepRule.ImpR, DeepRule.BoxR, DeepRule.BDiaR1} <= out.proof.rules_used()
    assert replay(out.proof) == []
    shallow = compile_to_shallow(out.proof)
    assert shallow.conclusion == parse_structure("emp |> p -> box bdia p")
    assert check_proof(shallow, RULESETS["base"]) == []


def test_identity_proof_compiles_to_identity():
    out = prove(parse_structure("p |> p"))
    assert out.proof.size == 1 and out.proof.rule is DeepRule.Id
    shallow = compile_to_shallow(out.proof)
    assert shallow.rule is Rule.Id and shallow.node_count == 1


def test_white_box_propagation_gadget():
    out = prove(parse_structure("box p |> w[emp |> p]"))
    assert [n.rule for n in out.proof.nodes()] == [DeepRule.BoxL2, DeepRule.Id]
    shallow = expand_derived(compile_to_shallow(out.proof))
    assert check_proof(shallow, RULESETS["base"]) == []
    used = shallow.rules_used()
    assert {Rule.BoxL, Rule.CL, Rule.RpCirc} <= used
    assert used <= {Rule.Id, Rule.TriL, Rule.TriR, Rule.SL, Rule.SR, Rule.RpCirc, Rule.BoxL,
                    Rule.WL, Rule.CL}


def test_no_link_between_white_modalities_in_small_bounds():
    cfg = SearchConfig(max_nesting_depth=6, max_structure_size=200, max_steps=20000)
    assert not isinstance(prove("(dia p -> box q) -> box (p -> q)", cfg), Proved)


def test_step_bound_reported():
    out = prove("(p -> q -> r) -> (p -> q) -> p -> r", SearchConfig(max_steps=2))
    assert out.name == "BoundExhausted" and out.bound == "steps"


@pytest.mark.parametrize("kw", [dict(max_steps=0), dict(max_nesting_depth=0),
                                dict(extra_axioms={"X"}), dict(logic="s4")])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SearchConfig(**kw)


def test_ik_rejects_black_connectives():
    with pytest.raises(UnsupportedLanguage):
        prove("bbox p -> p", SearchConfig(logic=Logic.IK))
    with pytest.raises(UnsupportedLanguage):
        prove("p -< q", SearchConfig(logic=Logic.IK))


def test_search_is_deterministic():
    a = prove("(p -> r) -> (q -> r) -> p | q -> r")
    b = prove("(p -> r) -> (q -> r) -> p | q -> r")
    assert dump_proof(a.proof) == dump_proof(b.proof)


def test_deep_json_round_trip():
    cfg = SearchConfig(logic=Logic.IKT)
    out = prove("box (p -> q) -> dia p -> dia q", cfg)
    doc = json.loads(json.dumps(proof_to_json(out.proof, cfg)))
    back, cfg2 = proof_from_json(doc)
    assert cfg2 == cfg and back.size == out.proof.size
    assert replay(back, cfg2) == []
    with pytest.raises(ValueError):
        proof_from_json({"calculus": "shallow"})


def _proved():
    return [(e, c, o) for e, c, o in corpus_runs() if isinstance(o, Proved)]


def test_corpus_proofs_replay_and_compile():
    for entry, cfg, out in _proved():
        assert replay(out.proof, cfg) == [], entry.label
        if cfg.extra_axioms:
            continue
        shallow = compile_to_shallow(out.proof, cfg)
        assert check_proof(shallow, shallow_ruleset(cfg)) == [], entry.label
        assert shallow.conclusion == Turnstile(EMPTY, Fml(parse_formula(entry.formula)))


def test_search_branches_make_progress():
    for entry, cfg, out in _proved():
        for node in out.proof.nodes():
            assert all(c.conclusion != node.conclusion for c in node.premises), entry.label


_BLACK_RULES = {DeepRule.BBoxL1, DeepRule.BDiaR1, DeepRule.BBoxL2, DeepRule.BDiaR2,
                DeepRule.BDiaL, DeepRule.BBoxR}
_EXCL_RULES = {DeepRule.ExclL, DeepRule.ExclR, DeepRule.ExclL1}


def _has_black(s):
    if isinstance(s, Black):
        return True
    kids = getattr(s, "children", ()) or [getattr(s, a) for a in ("ante", "succ", "inner")
                                           if hasattr(s, a)]
    return any(_has_black(k) for k in kids)


def test_modularity_of_found_proofs():
    for entry, cfg, out in _proved():
        if cfg.logic is not Logic.BIKT or cfg.extra_axioms:
            continue
        subs = list(subformulas(parse_formula(entry.formula)))
        if not any(isinstance(g, Excl) for g in subs):
            assert not out.proof.rules_used() & _EXCL_RULES, entry.label
            if not any(isinstance(g, (BBox, BDia)) for g in subs):
                assert not out.proof.rules_used() & _BLACK_RULES, entry.label
                assert not any(_has_black(s) for s in out.proof.structures()), entry.label


def test_extension_proofs_replay_with_flags():
    cfg = SearchConfig(extra_axioms={"T"})
    out = prove("box p -> p", cfg)
    assert DeepRule.T_Box in out.proof.rules_used()
    assert replay(out.proof, cfg) == []
    assert replay(out.proof) != []
