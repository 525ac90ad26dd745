"""Hand-written shallow derivations used as regression fixtures.

Each builder returns a kernel-checkable proof; ``FIXTURES`` maps a name to
the builder and the rule set the derivation lives in.  Steps that a textbook
derivation would merge (two implication introductions, a disjunction built
by two injections and a contraction) are spelled out rule by rule.
"""

from __future__ import annotations

from typing import Callable

from .shallow import Rule, ShallowProof, infer
from .syntax import (
    BOT, EMPTY, TOP, And, Atom, BBox, BDia, Black, Box, Dia, Excl, Fml, Imp, Or,
    Turnstile, White,
)

P, Q = Atom("p"), Atom("q")


def _id(a, x=EMPTY, y=EMPTY) -> ShallowProof:
    return infer(Rule.Id, A=a, X=x, Y=y)


def tense_unit() -> ShallowProof:
    """``▷ p → □◆p`` through one residuation step."""
    p = _id(P)
    p = infer(Rule.BDiaR, p, A=P, X=Fml(P))
    p = infer(Rule.RpCirc, p, X=Fml(P), Y=Fml(BDia(P)))
    p = infer(Rule.BoxR, p, A=BDia(P), X=Fml(P))
    return infer(Rule.ImpR, p, A=P, B=Box(BDia(P)))


def _white_distribution_tail(top: ShallowProof, a_to: Imp, goal) -> ShallowProof:
    """From ``p→G, p ▷ •goal`` down to ``▷ □(p→G) → (◇p → goal)``."""
    box = Box(a_to)
    bul = Black(Fml(goal))
    p = infer(Rule.TriR, top, X1=Fml(a_to), X2=Fml(P), Y2=bul)
    inner = Turnstile(Fml(P), bul)
    p = infer(Rule.BoxL, p, A=a_to, X=inner)
    p = infer(Rule.RpCirc, p, X=Fml(box), Y=inner, dir="up")
    p = infer(Rule.SR, p, X1=Black(Fml(box)), X2=Fml(P), Y2=bul)
    p = infer(Rule.TriR, p, X1=Fml(P), X2=Black(Fml(box)), Y2=bul)
    p = infer(Rule.BulletTriR, p, X=Fml(P), Y=Fml(box), Z=Fml(goal))
    inner = Turnstile(Fml(box), Fml(goal))
    p = infer(Rule.RpBullet, p, X=Fml(P), Y=inner, dir="up")
    p = infer(Rule.DiaL, p, A=P, X=inner)
    p = infer(Rule.SR, p, X1=Fml(Dia(P)), X2=Fml(box), Y2=Fml(goal))
    p = infer(Rule.ImpR, p, A=Dia(P), B=goal, X=Fml(box))
    return infer(Rule.ImpR, p, A=box, B=Imp(Dia(P), goal))


def white_distribution() -> ShallowProof:
    """``▷ □(p→q) → (◇p → ◇q)`` with the E rules."""
    bul = Black(Fml(Dia(Q)))
    left = infer(Rule.WR, _id(P), X=Fml(P), Y=bul, Z=Fml(P))
    right = infer(Rule.DiaR, _id(Q), A=Q, X=Fml(Q))
    right = infer(Rule.RpBullet, right, X=Fml(Q), Y=Fml(Dia(Q)))
    right = infer(Rule.WL, right, X=Fml(Q), Y=Fml(P), Z=bul)
    top = infer(Rule.ImpL, left, right, A=P, B=Q, X=Fml(P), Y=bul)
    return _white_distribution_tail(top, Imp(P, Q), Dia(Q))


def white_nullary() -> ShallowProof:
    """``▷ □(p→⊥) → (◇p → ⊥)`` with the E rules."""
    bul = Black(Fml(BOT))
    left = _id(P, y=bul)
    right = infer(Rule.BotL, X=Fml(P), Y=bul)
    top = infer(Rule.ImpL, left, right, A=P, B=BOT, X=Fml(P), Y=bul)
    return _white_distribution_tail(top, Imp(P, BOT), BOT)


def white_link() -> ShallowProof:
    """``▷ (◇p → □q) → □(p→q)`` with the E rules."""
    f = Imp(Dia(P), Box(Q))
    left = infer(Rule.DiaR, _id(P), A=P, X=Fml(P))
    left = infer(Rule.WR, left, X=White(Fml(P)), Y=White(Fml(Q)), Z=Fml(Dia(P)))
    right = infer(Rule.BoxL, _id(Q), A=Q, X=Fml(Q))
    right = infer(Rule.WL, right, X=Fml(Box(Q)), Y=White(Fml(P)), Z=White(Fml(Q)))
    p = infer(Rule.ImpL, left, right, A=Dia(P), B=Box(Q), X=White(Fml(P)), Y=White(Fml(Q)))
    p = infer(Rule.TriR, p, X1=Fml(f), X2=White(Fml(P)), Y2=White(Fml(Q)))
    p = infer(Rule.CircTriR, p, X=Fml(f), Y=Fml(P), Z=Fml(Q))
    inner = Turnstile(Fml(P), Fml(Q))
    p = infer(Rule.RpCirc, p, X=Fml(f), Y=inner, dir="up")
    p = infer(Rule.SR, p, X1=Black(Fml(f)), X2=Fml(P), Y2=Fml(Q))
    p = infer(Rule.ImpR, p, A=P, B=Q, X=Black(Fml(f)))
    p = infer(Rule.RpCirc, p, X=Fml(f), Y=Fml(Imp(P, Q)))
    p = infer(Rule.BoxR, p, A=Imp(P, Q), X=Fml(f))
    return infer(Rule.ImpR, p, A=f, B=Box(Imp(P, Q)))


def black_link() -> ShallowProof:
    """``▷ ◆(p→q) → (■p → ◆q)`` with the E rules."""
    wb = White(Fml(BDia(Q)))
    wa = White(Fml(BBox(P)))
    left = infer(Rule.BBoxL, _id(P), A=P, X=Fml(P))
    left = infer(Rule.RpBullet, left, X=Fml(BBox(P)), Y=Fml(P), dir="up")
    left = infer(Rule.WR, left, X=wa, Y=wb, Z=Fml(P))
    right = infer(Rule.BDiaR, _id(Q), A=Q, X=Fml(Q))
    right = infer(Rule.RpCirc, right, X=Fml(Q), Y=Fml(BDia(Q)))
    right = infer(Rule.WL, right, X=Fml(Q), Y=wa, Z=wb)
    p = infer(Rule.ImpL, left, right, A=P, B=Q, X=wa, Y=wb)
    imp = Imp(P, Q)
    p = infer(Rule.TriR, p, X1=Fml(imp), X2=wa, Y2=wb)
    p = infer(Rule.CircTriR, p, X=Fml(imp), Y=Fml(BBox(P)), Z=Fml(BDia(Q)))
    inner = Turnstile(Fml(BBox(P)), Fml(BDia(Q)))
    p = infer(Rule.RpCirc, p, X=Fml(imp), Y=inner, dir="up")
    p = infer(Rule.SR, p, X1=Black(Fml(imp)), X2=Fml(BBox(P)), Y2=Fml(BDia(Q)))
    p = infer(Rule.ImpR, p, A=BBox(P), B=BDia(Q), X=Black(Fml(imp)))
    p = infer(Rule.BDiaL, p, A=imp, X=Fml(Imp(BBox(P), BDia(Q))))
    return infer(Rule.ImpR, p, A=BDia(imp), B=Imp(BBox(P), BDia(Q)))


def excluded_middle() -> ShallowProof:
    """``▷ p ∨ (p → ⊥)`` with the classical rules."""
    neg = Imp(P, BOT)
    em = Or(P, neg)
    p = _id(P, y=Fml(BOT))
    p = infer(Rule.SLInv, p, Y1=Fml(P), X2=Fml(P), Y2=Fml(BOT))
    p = infer(Rule.ImpR, p, A=P, B=BOT, X=Turnstile(EMPTY, Fml(P)))
    p = infer(Rule.SL, p, Y1=Fml(P), Y2=Fml(neg))
    p = infer(Rule.OrR, p, A=P, B=neg, Y=Fml(neg), i=1)
    p = infer(Rule.OrR, p, A=P, B=neg, Y=Fml(em), i=2)
    return infer(Rule.CR, p, Y=Fml(em))


def dual_contradiction() -> ShallowProof:
    """``p ∧ (⊤ ≺ p) ▷`` with the classical rules."""
    ex = Excl(TOP, P)
    conj = And(P, ex)
    p = _id(P, x=Fml(TOP))
    p = infer(Rule.SRInv, p, X1=Fml(TOP), Y1=Fml(P), X2=Fml(P))
    p = infer(Rule.ExclL, p, A=TOP, B=P, Y=Turnstile(Fml(P), EMPTY))
    p = infer(Rule.SR, p, X1=Fml(ex), X2=Fml(P))
    p = infer(Rule.AndL, p, A=P, B=ex, X=Fml(ex), i=1)
    p = infer(Rule.AndL, p, A=P, B=ex, X=Fml(conj), i=2)
    return infer(Rule.CL, p, Y=Fml(conj))


FIXTURES: dict[str, tuple[Callable[[], ShallowProof], str]] = {
    "tense_unit": (tense_unit, "base"),
    "white_distribution": (white_distribution, "e"),
    "white_nullary": (white_nullary, "e"),
    "white_link": (white_link, "e"),
    "black_link": (black_link, "e"),
    "excluded_middle": (excluded_middle, "classical"),
    "dual_contradiction": (dual_contradiction, "classical"),
}
