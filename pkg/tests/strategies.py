"""Hypothesis strategies for formulas and structures."""

from hypothesis import strategies as st

from bikt.syntax import (
    BOT, EMPTY, HOLE, TOP, And, Atom, BBox, BDia, Black, Box, Dia, Excl, Fml, Imp, Or,
    Turnstile, White, comma,
)

ATOMS = st.sampled_from([Atom("p"), Atom("q"), Atom("r")])

formulas = st.recursive(
    ATOMS | st.just(TOP) | st.just(BOT),
    lambda sub: st.one_of(
        st.builds(And, sub, sub), st.builds(Or, sub, sub),
        st.builds(Imp, sub, sub), st.builds(Excl, sub, sub),
        st.builds(Box, sub), st.builds(Dia, sub),
        st.builds(BBox, sub), st.builds(BDia, sub),
    ),
    max_leaves=8,
)

small_formulas = st.recursive(
    ATOMS | st.just(BOT),
    lambda sub: st.one_of(
        st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Imp, sub, sub),
        st.builds(Excl, sub, sub), st.builds(Box, sub), st.builds(Dia, sub),
        st.builds(BBox, sub), st.builds(BDia, sub),
    ),
    max_leaves=4,
)

structures = st.recursive(
    st.just(EMPTY) | formulas.map(Fml),
    lambda sub: st.one_of(
        st.lists(sub, min_size=2, max_size=3).map(lambda xs: comma(*xs)),
        st.builds(Turnstile, sub, sub),
        st.builds(White, sub), st.builds(Black, sub),
    ),
    max_leaves=6,
)

sequents = st.builds(Turnstile, structures, structures)


def _wrap(ctx_and_other):
    ctx, other, how = ctx_and_other
    if how == "comma":
        return comma(ctx, other)
    if how == "ante":
        return Turnstile(ctx, other)
    if how == "succ":
        return Turnstile(other, ctx)
    if how == "white":
        return White(ctx)
    return Black(ctx)


small_structures = st.recursive(
    st.just(EMPTY) | small_formulas.map(Fml),
    lambda sub: st.one_of(st.builds(lambda a, b: comma(a, b), sub, sub),
                          st.builds(Turnstile, sub, sub), st.builds(White, sub)),
    max_leaves=3,
)

contexts = st.recursive(
    st.just(HOLE),
    lambda sub: st.tuples(sub, small_structures,
                          st.sampled_from(["comma", "ante", "succ", "white", "black"])).map(_wrap),
    max_leaves=5,
)
