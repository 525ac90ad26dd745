import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bikt.semantics import KripkeModel, truth_set
from bikt.syntax import (
    BOT, EMPTY, HOLE, TOP, And, Atom, BDia, Black, Box, Comma, Dia, Excl, Fml, HolePath,
    Imp, InvalidPath, Step, item_at, NoFactor, Or, ParseError, Polarity, Turnstile, White, BBox,
    is_strict, least_factor, member, normalize, parse_formula, parse_structure, plug,
    polarity_at, print_formula, print_structure, tau, tau_neg, tau_pos, toplevel,
)

from strategies import formulas, structures

p, q, r = Atom("p"), Atom("q"), Atom("r")


def test_parse_examples():
    assert parse_formula("p -> box bdia p") == Imp(p, Box(BDia(p)))
    assert parse_formula("p -> q -> r") == Imp(p, Imp(q, r))
    assert parse_formula("p -< q -< r") == Excl(Excl(p, q), r)
    assert parse_formula("p & q | r") == Or(And(p, q), r)
    assert parse_formula("neg p") == Imp(p, BOT)
    assert parse_formula("coneg p") == Excl(TOP, p)


def test_print_examples():
    assert print_formula(Imp(p, Box(BDia(p)))) == "p -> box bdia p"
    assert print_formula(p) == "p"
    assert print_formula(Excl(TOP, p)) == "true -< p"


@pytest.mark.parametrize("text", ["p ->", "(p", "p q", "box", "p & & q", "P", "emp"])
def test_parse_errors_carry_position(text):
    with pytest.raises(ParseError) as exc:
        parse_formula(text)
    assert 0 <= exc.value.position <= len(text)


def test_structure_examples():
    assert parse_structure("emp |> p -> q") == Turnstile(EMPTY, Fml(Imp(p, q)))
    s = parse_structure("b[p], (q |> r)")
    assert s == normalize(Comma((Black(Fml(p)), Turnstile(Fml(q), Fml(r)))))
    assert parse_structure("p, emp") == Fml(p)
    assert parse_structure("p, q |> r |> w[p]") == Turnstile(
        normalize(Comma((Fml(p), Fml(q)))), Turnstile(Fml(r), White(Fml(p))))


def test_normalize_examples():
    a, b, c = Fml(p), Fml(q), Fml(r)
    assert normalize(Comma((Comma((a, b)), EMPTY, c))) == normalize(Comma((a, b, c)))
    assert normalize(Comma((a, b))) == normalize(Comma((b, a)))
    assert normalize(Comma((EMPTY, EMPTY))) == EMPTY


@given(formulas)
def test_formula_round_trip(f):
    assert parse_formula(print_formula(f)) == f


@given(structures)
def test_structure_round_trip(s):
    assert parse_structure(print_structure(s)) == normalize(s)


@given(structures)
def test_normalize_idempotent(s):
    assert normalize(normalize(s)) == normalize(s)


@given(structures, structures)
def test_normalize_congruence(s, t):
    ctx = Turnstile(Comma((HOLE, s)), White(HOLE))
    assert normalize(plug(ctx, t)) == normalize(plug(normalize(ctx), normalize(t)))


@given(structures)
def test_toplevel_ignores_normalization(s):
    assert sorted(map(repr, toplevel(normalize(s)))) == sorted(map(repr, toplevel(s)))


def test_tau_rows():
    a, b = Fml(p), Fml(q)
    assert tau_neg(White(a)) == Dia(p)
    assert tau_pos(White(a)) == Box(p)
    assert tau_neg(Black(a)) == BDia(p)
    assert tau_pos(Black(a)) == BBox(p)
    assert tau_neg(Comma((a, b))) == And(p, q) or tau_neg(Comma((a, b))) == And(q, p)
    assert tau_pos(Comma((a, b))) in (Or(p, q), Or(q, p))
    assert tau_neg(Turnstile(a, b)) == Excl(p, q)
    assert tau_pos(Turnstile(a, b)) == Imp(p, q)
    assert tau_neg(EMPTY) == TOP and tau_pos(EMPTY) == BOT
    assert tau(Turnstile(EMPTY, Fml(p))) == Imp(TOP, p)


def _all_models(n: int):
    """Every model on n worlds with one atom and empty modal relations."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i < j]
    for k in range(len(pairs) + 1):
        for le in itertools.combinations(pairs, k):
            base = KripkeModel.build(n, le=le)
            for mask in range(1 << n):
                up = {w for w in range(n) if mask >> w & 1}
                if all(b in up for a, b in base.le if a in up):
                    yield KripkeModel.build(n, le=le, valuation={"p": up})


def test_tau_of_empty_antecedent_is_p_semantically():
    goal = tau(Turnstile(EMPTY, Fml(p)))
    for n in (1, 2, 3):
        for m in _all_models(n):
            assert truth_set(m, goal) == truth_set(m, p)


def test_polarity_examples():
    ctx = parse_structure("b[[], (p |> q)]")
    assert polarity_at(ctx) is Polarity.NEUTRAL
    assert polarity_at(parse_structure("b[[], (p |> q)] |> r")) is Polarity.NEGATIVE
    assert polarity_at(parse_structure("q |> []")) is Polarity.POSITIVE


@settings(max_examples=60)
@given(structures, st.lists(st.sampled_from(["comma", "white", "black", "ante", "succ"]),
                            max_size=6))
def test_polarity_stable_once_set(s, wraps):
    ctx = Turnstile(Comma((HOLE, s)), EMPTY)
    before = polarity_at(ctx)
    for w in wraps:
        if w == "comma":
            ctx = Comma((ctx, s))
        elif w == "white":
            ctx = White(ctx)
        elif w == "black":
            ctx = Black(ctx)
        elif w == "ante":
            ctx = Turnstile(ctx, s)
        else:
            ctx = Turnstile(s, ctx)
        assert polarity_at(ctx) is before


def test_strict_examples():
    assert is_strict(parse_structure("b[[]] |> r"))
    assert not is_strict(parse_structure("b[([], p) |> q] |> r"))
    assert not is_strict(HOLE)


def test_least_factor_examples():
    ctx = parse_structure("p, q |> r, b[s, (t |> u) |> []]")
    path, index = least_factor(ctx)
    filled = plug(ctx, Fml(Atom("g")))
    # the innermost factor is the turnstile inside the black bullet
    assert item_at(filled, path, index) == parse_structure("s, (t |> u) |> g")
    outer, k = path.parent, path.steps[-1].index
    assert item_at(filled, outer, k) == parse_structure("b[s, (t |> u) |> g]")
    path, index = least_factor(parse_structure("p |> []"))
    assert path == HolePath() and index == 0
    with pytest.raises(NoFactor):
        least_factor(parse_structure("p, []"))


def test_toplevel_examples():
    assert toplevel(parse_structure("d, (e |> f)")) == (Atom("d"),)
    assert toplevel(EMPTY) == ()
    assert sorted(map(print_formula, toplevel(parse_structure("p, p, w[q]")))) == ["p", "p"]


def test_member_examples():
    ab = parse_structure("p |> q")
    assert member(ab, parse_structure("p, (p |> q), w[r]"))
    assert member(ab, ab)
    assert not member(Fml(p), parse_structure("q |> p"))


def test_invalid_path():
    with pytest.raises(InvalidPath):
        polarity_at(Fml(p), HolePath((Step(3, "ante"),)))
