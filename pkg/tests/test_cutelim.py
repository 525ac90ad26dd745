import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bikt import fixtures
from bikt.cutelim import (
    JOIN_KINDS, MultiHoleContext, PolarityClass, PolarityClassError, PositionClassError,
    UnsupportedRuleSet, eliminate_cuts, fill, is_cut_free, join_by_cut, reduce_principal,
    substitute_atomic,
)
from bikt.semantics import KripkeModel, valid_in
from bikt.shallow import RULESETS, Rule, check_proof, infer
from bikt.syntax import (
    EMPTY, HOLE, And, Atom, Box, Dia, Fml, Turnstile, White, comma, normalize, parse_structure,
)

p, q = Atom("p"), Atom("q")
x1, y1, x2, y2 = (Fml(Atom(n)) for n in ("xa", "ya", "xb", "yb"))


def _base_proofs():
    return [fixtures.tense_unit(), infer(Rule.ImpR, infer(Rule.Id, A=p), A=p, B=p)]


def test_fill_example():
    ctx = MultiHoleContext(parse_structure("[], b[[], w |> y] |> z"), PolarityClass.NEGATIVE)
    got = fill(ctx, White(Fml(Atom("u"))))
    assert got == parse_structure("w[u], b[w[u], w |> y] |> z")
    assert ctx.k == 2


def test_fill_trivial_cases():
    base = parse_structure("p |> q")
    assert fill(MultiHoleContext.classify(base), Fml(Atom("u"))) == base
    assert fill(MultiHoleContext.classify(parse_structure("p |> q, []")), EMPTY) == base


def test_polarity_class_is_verified():
    MultiHoleContext(parse_structure("p |> [], w[[]]"), PolarityClass.POSITIVE)
    MultiHoleContext(parse_structure("[], p |> q"), PolarityClass.QUASI_NEGATIVE)
    with pytest.raises(PolarityClassError):
        MultiHoleContext(parse_structure("[] |> []"), PolarityClass.POSITIVE)
    assert MultiHoleContext.classify(parse_structure("q |> w[[]]")).klass is PolarityClass.POSITIVE


def test_substitute_atomic_at_identity():
    left = infer(Rule.Id, A=p, X=Fml(q))           # p, q |> p
    target = infer(Rule.Id, A=p)                    # p |> p
    ctx = MultiHoleContext(parse_structure("p |> []"), PolarityClass.POSITIVE)
    out = substitute_atomic(left, target, ctx, p)
    assert out.conclusion == parse_structure("p |> (q |> p)")
    assert check_proof(out, RULESETS["base"]) == [] and is_cut_free(out)
    assert out.rules_used() & {Rule.TriR, Rule.RpTriR}


def test_substitute_atomic_without_positions():
    target = infer(Rule.Id, A=q)
    ctx = MultiHoleContext(parse_structure("q |> q"), PolarityClass.POSITIVE)
    assert substitute_atomic(infer(Rule.Id, A=p), target, ctx) is target


def test_substitute_atomic_through_contraction():
    left = infer(Rule.Id, A=p, X=Fml(q))
    twice = infer(Rule.WR, infer(Rule.Id, A=p), X=Fml(p), Y=Fml(p), Z=Fml(p))
    target = infer(Rule.CR, twice, X=Fml(p), Y=Fml(p))
    ctx = MultiHoleContext(parse_structure("p |> []"), PolarityClass.POSITIVE)
    out = substitute_atomic(left, target, ctx, p)
    assert check_proof(out, RULESETS["base"]) == []
    assert any(n.rule is Rule.CR and isinstance(n.witness["Y"], Turnstile) for n in out.nodes())


def test_substitute_atomic_rejects_negative_positions():
    with pytest.raises(PositionClassError):
        substitute_atomic(infer(Rule.Id, A=p), infer(Rule.Id, A=p),
                          MultiHoleContext(parse_structure("[] |> p"), PolarityClass.NEGATIVE), p)


def _and_swap_cut():
    pq, qp = And(p, q), And(q, p)
    get_q = infer(Rule.AndL, infer(Rule.Id, A=q), A=p, B=q, Y=Fml(q), i=2)
    get_p = infer(Rule.AndL, infer(Rule.Id, A=p), A=p, B=q, Y=Fml(p), i=1)
    left = infer(Rule.AndR, get_q, get_p, A=q, B=p, X=Fml(pq))
    right = infer(Rule.AndL, infer(Rule.Id, A=q), A=q, B=p, Y=Fml(q), i=1)
    return infer(Rule.Cut, left, right, A=qp, X1=Fml(pq), Y2=Fml(q))


def _models_upto(n_max, names=("p", "q")):
    """Every intuitionistic model with at most n_max worlds and empty modal relations."""
    for n in range(1, n_max + 1):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        for k in range(len(pairs) + 1):
            for le in itertools.combinations(pairs, k):
                base = KripkeModel.build(n, le=le)
                ups = [{w for w in range(n) if m >> w & 1} for m in range(1 << n)]
                ups = [u for u in ups if all(b in u for a, b in base.le if a in u)]
                for vals in itertools.product(ups, repeat=len(names)):
                    yield KripkeModel.build(n, le=le, valuation=dict(zip(names, vals)))


def test_eliminate_and_swap_cut():
    composite = _and_swap_cut()
    assert check_proof(composite, RULESETS["base+cut"]) == []
    out = eliminate_cuts(composite)
    assert is_cut_free(out) and check_proof(out, RULESETS["base"]) == []
    assert out.conclusion == parse_structure("p & q |> q")
    assert all(valid_in(m, out.conclusion) for m in _models_upto(3))


def _dia_cut():
    left = infer(Rule.DiaR, infer(Rule.Id, A=p), A=p, X=Fml(p))        # w[p] |> dia p
    left = infer(Rule.WL, left, X=White(Fml(p)), Y=x1, Z=Fml(Dia(p)))
    left = infer(Rule.WR, left, X=comma(White(Fml(p)), x1), Y=y1, Z=Fml(Dia(p)))
    inner = infer(Rule.DiaR, infer(Rule.Id, A=p), A=p, X=Fml(p))       # w[p] |> dia p
    right = infer(Rule.DiaL, inner, A=p, X=Fml(Dia(p)))                 # dia p |> dia p
    right = infer(Rule.WL, right, X=Fml(Dia(p)), Y=x2, Z=Fml(Dia(p)))
    right = infer(Rule.WR, right, X=comma(Fml(Dia(p)), x2), Y=y2, Z=Fml(Dia(p)))
    return left, right


def test_dia_reduction_shape():
    left, right = _dia_cut()
    out = reduce_principal(Dia(p), left, right)
    assert out.cut_rank < Dia(p).size
    assert out.conclusion == normalize(Turnstile(comma(White(Fml(p)), x1, x2),
                                                 comma(y1, y2, Fml(Dia(p)))))
    assert check_proof(out, RULESETS["base+cut"]) == []
    assert Rule.RpBullet in out.rules_used()
    composite = infer(Rule.Cut, left, right, A=Dia(p), X1=comma(White(Fml(p)), x1), Y1=y1,
                      X2=x2, Y2=comma(y2, Fml(Dia(p))))
    flat = eliminate_cuts(composite, debug=True)
    assert is_cut_free(flat) and flat.conclusion == composite.conclusion


def test_box_reduction_uses_white_residuation():
    c = Box(q)
    inner = infer(Rule.Id, A=q)
    left = infer(Rule.RpCirc, infer(Rule.BoxL, inner, A=q, X=Fml(q)), X=Fml(c), Y=Fml(q), dir="up")
    left = infer(Rule.RpCirc, left, X=Fml(c), Y=Fml(q))
    left = infer(Rule.BoxR, left, A=q, X=Fml(c))                        # box q |> box q
    right = infer(Rule.BoxL, inner, A=q, X=Fml(q))                      # box q |> w[q]
    out = reduce_principal(c, left, right)
    assert out.cut_rank < c.size and check_proof(out, RULESETS["base+cut"]) == []
    assert Rule.RpCirc in out.rules_used()


def test_cut_free_input_returned_unchanged():
    proof = fixtures.tense_unit()
    assert eliminate_cuts(proof) is proof


def test_classical_rule_set_is_out_of_scope():
    with pytest.raises(UnsupportedRuleSet):
        eliminate_cuts(_and_swap_cut(), RULESETS["classical"])


@pytest.mark.parametrize("kind", JOIN_KINDS)
def test_join_kinds_reduce_below_rank(kind):
    a, b = _base_proofs()
    composite = join_by_cut(a, b, kind)
    assert check_proof(composite, RULESETS["base+cut"]) == []
    cut = composite
    out = reduce_principal(cut.witness["A"], *cut.premises)
    assert out.cut_rank < cut.witness["A"].size


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(JOIN_KINDS), st.booleans(), st.booleans(), st.booleans())
def test_elimination_preserves_end_sequent(kind, swap, noise, e_side):
    a, b = _base_proofs()
    if e_side:
        a = fixtures.white_link()
    if swap:
        a, b = b, a
    rules = RULESETS["e"] if e_side else RULESETS["base"]
    composite = join_by_cut(a, b, kind, noise=noise)
    out = eliminate_cuts(composite, rules)
    assert is_cut_free(out)
    assert normalize(out.conclusion) == normalize(composite.conclusion)
    assert check_proof(out, rules) == []
    assert eliminate_cuts(out, rules) is out


def test_join_needs_closed_proofs():
    with pytest.raises(ValueError):
        join_by_cut(infer(Rule.Id, A=p), fixtures.tense_unit(), "and")
