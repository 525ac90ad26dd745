"""Syntactic cut elimination for the shallow calculus.

The procedure substitutes proofs for traced formula occurrences.  Occurrences
are marked with hole markers, so a marked sequent is a multi-hole context.
Walking a proof upwards, every rule is re-instantiated with the marks pushed
into its metavariables.  This is sound because each rule is closed under
substitution of structures for structure variables.  Only when a marked
occurrence becomes principal does something connective specific happen:

* positive marks (the cut formula on the right of the left premise) are
  replaced by ``X ▷ Y`` where the right premise proves ``A, X ▷ Y``;
* negative marks are replaced by a structure determined by the rule that
  introduced ``A`` on the right, and principal left rules become cuts on
  immediate subformulas.

Topmost cuts are removed one at a time; every cut created while removing a
cut on ``A`` is on a proper subformula of ``A``.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass
from typing import Callable, Mapping

from .shallow import RULESETS, Rule, RuleSet, ShallowProof, check_proof, infer, schema
from .syntax import (
    EMPTY, HOLE, TOP, And, Atom, BBox, BDia, Bot, Black, Box, Comma, Dia, Excl, Fml,
    Formula, Hole, HolePath, Imp, Or, Polarity, Structure, Top, Turnstile, White,
    comma, items, normalize, plug,
)

__all__ = [
    "PolarityClass", "MultiHoleContext", "PositionClassError", "PolarityClassError",
    "NotPrincipal", "UnsupportedRuleSet", "fill", "hole_paths", "substitute_atomic",
    "principal_reduction", "reduce_principal", "eliminate_cuts", "is_cut_free",
    "join_by_cut", "JOIN_KINDS",
]


class PositionClassError(ValueError):
    """Marked occurrences in the wrong polarity class for a substitution."""


class PolarityClassError(ValueError):
    """A context whose holes do not fit the class a reduction requires."""


class NotPrincipal(Exception):
    """The proof does not end by introducing the cut formula; keep tracing."""


class UnsupportedRuleSet(ValueError):
    pass


class PolarityClass(enum.Enum):
    POSITIVE = "positive"
    QUASI_POSITIVE = "quasi-positive"
    NEGATIVE = "negative"
    QUASI_NEGATIVE = "quasi-negative"
    NEUTRAL = "neutral"


_ALLOWED = {
    PolarityClass.POSITIVE: {Polarity.POSITIVE},
    PolarityClass.QUASI_POSITIVE: {Polarity.POSITIVE, Polarity.NEUTRAL},
    PolarityClass.NEGATIVE: {Polarity.NEGATIVE},
    PolarityClass.QUASI_NEGATIVE: {Polarity.NEGATIVE, Polarity.NEUTRAL},
    PolarityClass.NEUTRAL: {Polarity.NEUTRAL},
}


def hole_paths(s: Structure) -> list[HolePath]:
    """Addresses of every hole marker; each path ends at the hole's slot."""
    out: list[HolePath] = []

    def go(slot, path):
        for i, it in enumerate(slot):
            if isinstance(it, Hole):
                out.append(path)
            elif isinstance(it, Turnstile):
                go(items(it.ante), path.child(i, "ante"))
                go(items(it.succ), path.child(i, "succ"))
            elif isinstance(it, (White, Black)):
                go(items(it.inner), path.child(i, "inner"))

    go(items(s), HolePath())
    return out


@dataclass(frozen=True)
class MultiHoleContext:
    """A structure with ``k`` hole markers, each standing for one occurrence."""

    base: Structure
    klass: PolarityClass = PolarityClass.NEUTRAL

    def __post_init__(self):
        object.__setattr__(self, "base", normalize(self.base))
        bad = [p for p in self.positions if p.polarity not in _ALLOWED[self.klass]]
        if bad:
            raise PolarityClassError(
                f"hole at {_path_str(bad[0])} is {bad[0].polarity.value}, "
                f"not allowed in a {self.klass.value} context")

    @property
    def positions(self) -> list[HolePath]:
        return hole_paths(self.base)

    @property
    def k(self) -> int:
        return len(self.positions)

    @classmethod
    def classify(cls, base: Structure) -> "MultiHoleContext":
        """The context with the most specific class its holes admit."""
        pols = {p.polarity for p in hole_paths(normalize(base))}
        for kl in (PolarityClass.POSITIVE, PolarityClass.NEGATIVE, PolarityClass.NEUTRAL,
                   PolarityClass.QUASI_POSITIVE, PolarityClass.QUASI_NEGATIVE):
            if pols <= _ALLOWED[kl]:
                return cls(base, kl)
        raise PolarityClassError("holes of mixed polarity")


def _path_str(p: HolePath) -> str:
    return "/".join(f"{s.index}{s.kind[0]}" for s in p.steps) or "top"


def fill(ctx: MultiHoleContext, filler: Structure) -> Structure:
    """Replace every hole by ``filler``; the result is normalized."""
    return plug(ctx.base, filler)


def is_cut_free(p: ShallowProof) -> bool:
    return all(n.rule is not Rule.Cut for n in p.nodes())


# ---------------------------------------------------------------------------
# re-instantiating a rule around marked occurrences


class _Meta(Formula):
    """Placeholder for a structure variable inside a rule template."""

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_key", (-1, name))
        object.__setattr__(self, "_hash", hash((-1, name)))

    def __repr__(self):
        return f"<meta {self.name}>"


_NON_STRUCT = {"A", "B", "i", "dir"}


class _NoMatch(Exception):
    pass


def _env(w: Mapping) -> dict[str, Structure]:
    out = {}
    for k, v in w.items():
        if k in _NON_STRUCT:
            continue
        out[k] = normalize(Fml(v) if isinstance(v, Formula) else v)
    return out


def _inst(t: Structure, env: Mapping[str, Structure]) -> Structure:
    if isinstance(t, Fml) and isinstance(t.f, _Meta):
        return env.get(t.f.name, EMPTY)
    if isinstance(t, Comma):
        return comma(*(_inst(c, env) for c in t.children))
    if isinstance(t, Turnstile):
        return Turnstile(comma(_inst(t.ante, env)), comma(_inst(t.succ, env)))
    if isinstance(t, White):
        return White(comma(_inst(t.inner, env)))
    if isinstance(t, Black):
        return Black(comma(_inst(t.inner, env)))
    return t


def _is_meta(t: Structure) -> bool:
    return isinstance(t, Fml) and isinstance(t.f, _Meta)


class _Matcher:
    def __init__(self, a: Formula, old: Mapping[str, Structure]):
        self.plain = Fml(a)
        self.old = old
        self.new: dict[str, Structure] = {}
        self.principal = 0

    def unmark(self, m: Structure) -> Structure:
        return plug(m, self.plain)

    def slot(self, t_items, m_items):
        rest = list(m_items)
        metas = []
        for t in t_items:
            if _is_meta(t):
                metas.append(t.f.name)
                continue
            want = _inst(t, self.old)
            cands = [j for j, m in enumerate(rest) if self.unmark(m) == want]
            if not cands:
                raise _NoMatch
            if isinstance(t, Fml):
                # a marked copy is principal only if no unmarked copy is left
                plain = [j for j in cands if not isinstance(rest[j], Hole)]
                j = plain[0] if plain else cands[0]
                if isinstance(rest[j], Hole):
                    self.principal += 1
                rest.pop(j)
            else:
                self.item(t, rest.pop(cands[0]))
        if len(metas) == 1:
            self.new[metas[0]] = comma(*rest)
            return
        for v in metas:
            take = []
            for o in items(self.old.get(v, EMPTY)):
                j = next((j for j, m in enumerate(rest) if self.unmark(m) == o), None)
                if j is None:
                    raise _NoMatch
                take.append(rest.pop(j))
            self.new[v] = comma(*take)
        if rest:
            raise _NoMatch

    def item(self, t, m):
        if type(t) is not type(m):
            raise _NoMatch
        if isinstance(t, Turnstile):
            self.slot(items(t.ante), items(m.ante))
            self.slot(items(t.succ), items(m.succ))
        else:
            self.slot(items(t.inner), items(m.inner))


def _rewitness(p: ShallowProof, marked: Structure, a: Formula) -> tuple[dict, int]:
    """Witness for ``p``'s rule whose conclusion is the marked sequent.

    Returns the witness and the number of marks matched to the rule's own
    formula positions (principal marks).
    """
    w = dict(p.witness)
    old = _env(w)
    meta_w = {k: (v if k in _NON_STRUCT else Fml(_Meta(k))) for k, v in w.items()}
    _, template = schema(p.rule, meta_w)
    mt = _Matcher(a, old)
    try:
        mt.item(template, normalize(marked))
    except _NoMatch:
        raise ValueError(f"{p.rule.value}: marked sequent does not fit the rule") from None
    for k in old:
        w[k] = mt.new.get(k, EMPTY)
    got = schema(p.rule, w)[1]
    if (got != normalize(marked) if not mt.principal
            else mt.unmark(got) != mt.unmark(normalize(marked))):
        raise ValueError(f"{p.rule.value}: marks could not be placed")
    return w, mt.principal


def _filled(w: Mapping, by: Structure) -> dict:
    return {k: (plug(v, by) if isinstance(v, Structure) and k not in _NON_STRUCT else v)
            for k, v in w.items()}


Hook = Callable[[ShallowProof, dict, dict], ShallowProof]


def _trace(p: ShallowProof, marked: Structure, a: Formula, by: Structure, hook: Hook,
           memo: dict) -> ShallowProof:
    """Proof of ``marked`` with every hole replaced by ``by``."""
    marked = normalize(marked)
    if not hole_paths(marked):
        return p
    key = (id(p), marked)
    if key in memo:
        return memo[key]
    w, principal = _rewitness(p, marked, a)
    if principal:
        out = hook(p, w, _filled(w, by))
    else:
        prem = schema(p.rule, w)[0]
        subs = [_trace(c, m, a, by, hook, memo) for c, m in zip(p.premises, prem)]
        out = infer(p.rule, *subs, **_filled(w, by))
    memo[key] = out
    return out


# ---------------------------------------------------------------------------
# small derivations


def _t(a, s) -> Turnstile:
    return Turnstile(comma(a), comma(s))


def _wl(p: ShallowProof, extra: Structure) -> ShallowProof:
    if extra == EMPTY:
        return p
    c = p.conclusion
    return infer(Rule.WL, p, X=c.ante, Y=extra, Z=c.succ)


def _wr(p: ShallowProof, extra: Structure) -> ShallowProof:
    if extra == EMPTY:
        return p
    c = p.conclusion
    return infer(Rule.WR, p, X=c.ante, Y=extra, Z=c.succ)


def _minus(s: Structure, take: Structure) -> Structure:
    rest = list(items(s))
    for t in items(take):
        rest.remove(t)
    return comma(*rest)


def _push_right(p: ShallowProof, left: Structure) -> ShallowProof:
    """From ``L, X ▷ Y`` derive ``L ▷ (X ▷ Y)``."""
    c = p.conclusion
    return infer(Rule.RpTriR, p, X1=left, X2=_minus(c.ante, left), Y=c.succ, dir="up")


def _pack_left(p: ShallowProof, u: Structure, v: Structure) -> ShallowProof:
    """From ``U ▷ V, Z`` derive ``(U ▷ V) ▷ Z``."""
    c = p.conclusion
    return infer(Rule.RpTriL, p, X1=u, X2=v, Y=_minus(c.succ, v), dir="up")


def _unpack_left(p: ShallowProof) -> ShallowProof:
    """From ``(U ▷ V) ▷ Z`` derive ``U ▷ V, Z``."""
    c = p.conclusion
    t = c.ante
    return infer(Rule.RpTriL, p, X1=t.ante, X2=t.succ, Y=c.succ)


def _cut(a: Formula, left: ShallowProof, right: ShallowProof) -> ShallowProof:
    lc, rc = left.conclusion, right.conclusion
    return infer(Rule.Cut, left, right, A=a, X1=lc.ante, Y1=_minus(lc.succ, Fml(a)),
                 X2=_minus(rc.ante, Fml(a)), Y2=rc.succ)


def _contract(p: ShallowProof, left: Structure, right: Structure) -> ShallowProof:
    """Merge one duplicated copy of ``left`` (antecedent) and ``right`` (succedent)."""
    c = p.conclusion
    if left != EMPTY:
        rest = _minus(c.ante, comma(left, left))
        p = infer(Rule.CL, p, X=rest, Y=left, Z=c.succ)
        c = p.conclusion
    if right != EMPTY:
        rest = _minus(c.succ, comma(right, right))
        p = infer(Rule.CR, p, X=c.ante, Y=right, Z=rest)
    return p


# ---------------------------------------------------------------------------
# negative substitutions: the cut formula was introduced on the right


@dataclass
class _Intro:
    """The last step of a proof introducing ``a`` on the right."""

    a: Formula
    rule: Rule
    subs: tuple[ShallowProof, ...]
    u: Structure
    v: Structure
    i: int = 1

    @property
    def packs(self) -> bool:
        return self.rule in (Rule.OrR, Rule.AndR, Rule.ExclR)

    @property
    def replacement(self) -> Structure:
        """What replaces each traced antecedent occurrence of ``a``."""
        if self.packs:
            return _t(self.u, self.v)
        if self.rule is Rule.DiaR:
            return White(self.u)
        if self.rule is Rule.BDiaR:
            return Black(self.u)
        if self.rule is Rule.TopR:
            return EMPTY
        return self.u

    @property
    def left(self) -> Structure:
        """Antecedent of the introduced sequent."""
        if self.rule is Rule.TopR:
            return self.u
        return self.replacement if not self.packs else self.u

    def identity(self) -> ShallowProof:
        """A proof of ``replacement ▷ a``."""
        r = self.rule
        if r is Rule.TopR:
            return infer(Rule.TopR)
        if r in (Rule.OrR, Rule.AndR, Rule.ExclR):
            extra = {"i": self.i} if r is Rule.OrR else {}
            p = infer(r, *self.subs, A=self.a.l, B=self.a.r, X=self.u, Y=self.v, **extra)
            return _pack_left(p, self.u, self.v)
        if r is Rule.ImpR:
            return infer(r, *self.subs, A=self.a.l, B=self.a.r, X=self.u)
        return infer(r, *self.subs, A=self.a.a, X=self.u)


def _intro_of(a: Formula, p: ShallowProof) -> _Intro:
    w = p.witness
    r = p.rule
    expect = {Rule.OrR: Or, Rule.AndR: And, Rule.ImpR: Imp, Rule.ExclR: Excl,
              Rule.BoxR: Box, Rule.BBoxR: BBox, Rule.DiaR: Dia, Rule.BDiaR: BDia}
    if r is Rule.TopR and isinstance(a, Top):
        c = p.conclusion
        return _Intro(a, r, (), normalize(c.ante), _minus(c.succ, Fml(TOP)))
    if r not in expect or not isinstance(a, expect[r]):
        raise NotPrincipal(f"{r.value} does not introduce {a}")
    env = _env(w)
    if r in (Rule.BoxR, Rule.BBoxR, Rule.DiaR, Rule.BDiaR):
        if w.get("A") != a.a:
            raise NotPrincipal(f"{r.value} introduces a different formula")
    elif (w.get("A"), w.get("B")) != (a.l, a.r):
        raise NotPrincipal(f"{r.value} introduces a different formula")
    v = env.get("Y", EMPTY)
    if r is Rule.ImpR:
        v = EMPTY  # context weakened by the rule, not needed below
    return _Intro(a, r, tuple(p.premises), env.get("X", EMPTY), v, w.get("i", 1))


_LEFT_OF = {Or: Rule.OrL, And: Rule.AndL, Imp: Rule.ImpL, Excl: Rule.ExclL,
            Box: Rule.BoxL, BBox: Rule.BBoxL, Dia: Rule.DiaL, BDia: Rule.BDiaL}


def _negative_hook(intro: _Intro, memo: dict) -> Hook:
    a = intro.a
    by = intro.replacement

    def rec(p, marked):
        return _trace(p, marked, a, by, hook, memo)

    def hook(p: ShallowProof, w: dict, wf: dict) -> ShallowProof:
        r = p.rule
        if r is Rule.Id:
            out = intro.identity()
            return _wr(_wl(out, wf.get("X", EMPTY)), wf.get("Y", EMPTY))
        if _LEFT_OF.get(type(a)) is not r:
            raise ValueError(f"{r.value} cannot be principal for a traced {a}")
        prem = schema(r, w)[0]
        x, y = wf.get("X", EMPTY), wf.get("Y", EMPTY)
        if r in (Rule.OrL, Rule.AndL):
            k = (intro.i if r is Rule.OrL else w["i"])
            if r is Rule.OrL:
                sub = rec(p.premises[k - 1], prem[k - 1])
                rho = intro.subs[0]
            else:
                sub = rec(p.premises[0], prem[0])
                rho = intro.subs[k - 1]
            part = a.l if k == 1 else a.r
            return _cut(part, _pack_left(rho, intro.u, intro.v), sub)
        if r is Rule.ImpL:
            s1, s2 = rec(p.premises[0], prem[0]), rec(p.premises[1], prem[1])
            c1 = _cut(a.r, intro.subs[0], s2)
            c2 = _cut(a.l, s1, c1)
            return _contract(c2, x, y)
        if r is Rule.ExclL:
            s = rec(p.premises[0], prem[0])
            rho1, rho2 = intro.subs
            c1 = _cut(a.r, s, rho2)
            c2 = _cut(a.l, rho1, c1)
            c3 = _contract(c2, intro.u, intro.v)
            return _wl(_pack_left(c3, intro.u, intro.v), x)
        s = rec(p.premises[0], prem[0])
        u = intro.u
        if r is Rule.BoxL:
            left = infer(Rule.RpCirc, intro.subs[0], X=u, Y=Fml(a.a), dir="up")
            c = _cut(a.a, left, s)
            return infer(Rule.RpCirc, c, X=u, Y=x)
        if r is Rule.BBoxL:
            left = infer(Rule.RpBullet, intro.subs[0], X=u, Y=Fml(a.a), dir="up")
            c = _cut(a.a, left, s)
            return infer(Rule.RpBullet, c, X=u, Y=x)
        if r is Rule.DiaL:
            right = infer(Rule.RpBullet, s, X=Fml(a.a), Y=x)
            c = _cut(a.a, intro.subs[0], right)
            return infer(Rule.RpBullet, c, X=u, Y=x, dir="up")
        # BDiaL
        right = infer(Rule.RpCirc, s, X=Fml(a.a), Y=x)
        c = _cut(a.a, intro.subs[0], right)
        return infer(Rule.RpCirc, c, X=u, Y=x, dir="up")

    return hook


def principal_reduction(a: Formula, intro: ShallowProof, target: ShallowProof,
                        ctx: MultiHoleContext) -> ShallowProof:
    """Substitute for negative occurrences of ``a`` introduced on the right by ``intro``.

    ``intro`` must end with the right rule for ``a``'s main connective (or
    ``TopR`` for ``true``).  ``target`` proves ``fill(ctx, a)``.  The result
    proves ``fill(ctx, R)``: ``R`` is ``U ▷ V`` for disjunction, conjunction and
    exclusion, ``U`` for implication and the boxes, and ``∘U``/``•U`` for the
    diamonds, with ``U``, ``V`` read off the premises of ``intro``.  New cuts
    are on immediate subformulas of ``a`` only.
    """
    if ctx.klass not in (PolarityClass.NEGATIVE, PolarityClass.QUASI_NEGATIVE):
        raise PolarityClassError(f"need a negative context, got {ctx.klass.value}")
    if not isinstance(ctx.base, Turnstile):
        raise PolarityClassError("context must be a whole sequent")
    info = _intro_of(a, intro)
    if fill(ctx, Fml(a)) != normalize(target.conclusion):
        raise ValueError("context does not match the target's end sequent")
    memo: dict = {}
    return _trace(target, ctx.base, a, info.replacement, _negative_hook(info, memo), memo)


# ---------------------------------------------------------------------------
# positive substitutions: occurrences of A are replaced by X ▷ Y


def _positive_hook(a: Formula, right: ShallowProof, memo: dict) -> Hook:
    rc = right.conclusion
    xa, ya = _minus(rc.ante, Fml(a)), normalize(rc.succ)
    by = _t(xa, ya)
    displayed = _t(comma(HOLE, xa), ya)

    def hook(p: ShallowProof, w: dict, wf: dict) -> ShallowProof:
        r = p.rule
        if r is Rule.Id:
            out = _push_right(right, Fml(a))
            return _wr(_wl(out, wf.get("X", EMPTY)), wf.get("Y", EMPTY))
        if r is Rule.TopR:
            info = _Intro(a, r, (), wf.get("X", EMPTY), wf.get("Y", EMPTY))
        else:
            prem = schema(r, w)[0]
            subs = tuple(_trace(c, m, a, by, hook, memo) for c, m in zip(p.premises, prem))
            rebuilt = infer(r, *subs, **{**wf, "Y": EMPTY} if r is Rule.ImpR else wf)
            info = _intro_of(a, rebuilt)
        theta = principal_reduction(a, _closing(info), right,
                                    MultiHoleContext(displayed, PolarityClass.NEGATIVE))
        if info.packs:
            return _unpack_left(_push_right(theta, info.replacement))
        if info.left != info.replacement:
            theta = _wl(theta, info.left)
        out = _push_right(theta, info.left)
        extra = wf.get("Y", EMPTY) if r in (Rule.ImpR, Rule.TopR) else EMPTY
        return _wr(out, extra)

    return hook


def _closing(info: _Intro) -> ShallowProof:
    """A proof ending with ``info``'s rule, fed back to ``principal_reduction``."""
    if info.rule is Rule.TopR:
        return infer(Rule.TopR, X=info.u, Y=info.v)
    if info.rule is Rule.OrR:
        return infer(Rule.OrR, *info.subs, A=info.a.l, B=info.a.r, X=info.u, Y=info.v, i=info.i)
    if info.rule in (Rule.AndR, Rule.ExclR):
        return infer(info.rule, *info.subs, A=info.a.l, B=info.a.r, X=info.u, Y=info.v)
    if info.rule is Rule.ImpR:
        return infer(Rule.ImpR, *info.subs, A=info.a.l, B=info.a.r, X=info.u)
    return infer(info.rule, *info.subs, A=info.a.a, X=info.u)


def _positive(a: Formula, right: ShallowProof, target: ShallowProof,
              ctx: MultiHoleContext) -> ShallowProof:
    if ctx.klass not in (PolarityClass.POSITIVE, PolarityClass.QUASI_POSITIVE):
        raise PositionClassError(f"need positive occurrences, got {ctx.klass.value}")
    if fill(ctx, Fml(a)) != normalize(target.conclusion):
        raise ValueError("context does not match the target's end sequent")
    rc = normalize(right.conclusion)
    if not isinstance(rc, Turnstile) or Fml(a) not in items(rc.ante):
        raise ValueError(f"right proof must have {a} in its antecedent")
    memo: dict = {}
    by = _t(_minus(rc.ante, Fml(a)), rc.succ)
    return _trace(target, ctx.base, a, by, _positive_hook(a, right, memo), memo)


def substitute_atomic(cutfree_left: ShallowProof, target: ShallowProof,
                      positions: MultiHoleContext, atom: Atom | None = None) -> ShallowProof:
    """Replace the marked occurrences of an atom ``p`` by ``X ▷ Y``.

    ``cutfree_left`` proves ``p, X ▷ Y``; ``target`` proves
    ``fill(positions, p)`` and every marked position must be positive.
    """
    try:
        ctx = MultiHoleContext(positions.base, PolarityClass.POSITIVE)
    except PolarityClassError as e:
        raise PositionClassError(str(e)) from None
    if not is_cut_free(cutfree_left) or not is_cut_free(target):
        raise ValueError("both proofs must be cut-free")
    lc = normalize(cutfree_left.conclusion)
    if atom is None:
        cands = {it.f for it in items(lc.ante) if isinstance(it, Fml) and isinstance(it.f, Atom)
                 and fill(ctx, it) == normalize(target.conclusion)}
        if ctx.k == 0:
            return target
        if len(cands) != 1:
            raise ValueError("cannot determine the substituted atom")
        atom = cands.pop()
    if not isinstance(atom, Atom):
        raise ValueError("substitute_atomic needs an atom")
    return _positive(atom, cutfree_left, target, ctx)


# ---------------------------------------------------------------------------
# cuts


def reduce_principal(cut_formula: Formula, left: ShallowProof, right: ShallowProof,
                     ctx: tuple[Structure, Structure] | None = None) -> ShallowProof:
    """Remove one cut whose premises are ``left`` (``X1 ▷ Y1, A``) and ``right`` (``A, X2 ▷ Y2``).

    The cut formula is traced through ``left`` until it is introduced; each
    introduction is replaced by a substitution into ``right``.  The result
    proves ``X1, X2 ▷ Y1, Y2`` and all its cuts are on proper subformulas of
    ``cut_formula``.  ``ctx`` optionally gives ``(X1 ▷ Y1, X2 ▷ Y2)``.
    """
    a = cut_formula
    lc, rc = normalize(left.conclusion), normalize(right.conclusion)
    x1, y1 = lc.ante, _minus(lc.succ, Fml(a))
    x2, y2 = _minus(rc.ante, Fml(a)), rc.succ
    if ctx is not None and (normalize(ctx[0]), normalize(ctx[1])) != (_t(x1, y1), _t(x2, y2)):
        raise ValueError("contexts do not match the premises")
    marked = _t(x1, comma(y1, HOLE))
    mctx = MultiHoleContext(marked, PolarityClass.POSITIVE)
    if isinstance(a, Atom) and is_cut_free(left) and is_cut_free(right):
        psi = substitute_atomic(right, left, mctx, a)
    else:
        psi = _positive(a, right, left, mctx)
    return infer(Rule.SR, psi, X1=x1, Y1=y1, X2=x2, Y2=y2)


def _normal(p: ShallowProof) -> ShallowProof:
    memo: dict[int, ShallowProof] = {}

    def go(n):
        if id(n) not in memo:
            memo[id(n)] = ShallowProof(n.rule, normalize(n.conclusion),
                                       tuple(go(c) for c in n.premises), dict(n.witness))
        return memo[id(n)]

    return go(p)


def eliminate_cuts(p: ShallowProof, rules: RuleSet | None = None,
                   debug: bool = False) -> ShallowProof:
    """A cut-free proof of the same end sequent, removing topmost cuts first.

    ``rules`` is the cut-free rule set the input uses (base or e); the output
    is valid for it.  A cut-free input is returned unchanged.  With ``debug``
    every intermediate proof is checked.
    """
    rules = rules or RULESETS["base"]
    if Rule.SLInv in rules or Rule.SRInv in rules:
        raise UnsupportedRuleSet("cut elimination is provided for the base and e rule sets")
    rules = rules.without_cut()
    with_cut = rules.with_cut()
    if is_cut_free(p):
        return p
    errs = check_proof(p, with_cut)
    if errs:
        raise ValueError(f"input proof is not valid: {errs[0]}")
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, 20000))
    try:
        memo: dict[int, ShallowProof] = {}

        def elim(n: ShallowProof) -> ShallowProof:
            if id(n) in memo:
                return memo[id(n)]
            subs = tuple(elim(c) for c in n.premises)
            if n.rule is Rule.Cut:
                out = reduce_principal(n.witness["A"], subs[0], subs[1])
                if debug:
                    bad = check_proof(out, with_cut)
                    assert not bad, bad
                    assert out.cut_rank < n.witness["A"].size
                out = elim(out)
            elif all(s is c for s, c in zip(subs, n.premises)):
                out = n
            else:
                out = ShallowProof(n.rule, n.conclusion, subs, n.witness)
            memo[id(n)] = out
            return out

        out = elim(_normal(p))
    finally:
        sys.setrecursionlimit(old)
    if debug:
        bad = check_proof(out, rules)
        assert not bad, bad
    return out


# ---------------------------------------------------------------------------
# composite proofs for exercising elimination

JOIN_KINDS = ("atom", "atom-id", "or", "and", "imp", "excl", "box", "bbox", "dia", "bdia")


def _noise_right(p: ShallowProof, c: Fml, extra: Structure, dup: bool) -> ShallowProof:
    """Weaken, display ``c`` alone and back, optionally contract a copy of ``c``."""
    p = _wr(p, extra)
    s = p.conclusion
    rest = _minus(s.succ, c)
    if rest != EMPTY:
        p = infer(Rule.RpTriL, p, X1=s.ante, X2=rest, Y=c, dir="up")
        p = infer(Rule.RpTriL, p, X1=s.ante, X2=rest, Y=c)
    if dup:
        s = p.conclusion
        p = infer(Rule.CR, _wr(p, c), X=s.ante, Y=c, Z=_minus(s.succ, c))
    return p


def _noise_left(p: ShallowProof, c: Fml, extra: Structure, dup: bool) -> ShallowProof:
    p = _wl(p, extra)
    s = p.conclusion
    rest = _minus(s.ante, c)
    if rest != EMPTY:
        p = infer(Rule.RpTriR, p, X1=c, X2=rest, Y=s.succ, dir="up")
        p = infer(Rule.RpTriR, p, X1=c, X2=rest, Y=s.succ)
    if dup:
        s = p.conclusion
        p = infer(Rule.CL, _wl(p, c), X=_minus(s.ante, c), Y=c, Z=s.succ)
    return p


def join_by_cut(p: ShallowProof, q: ShallowProof, kind: str, atom: Formula | None = None,
                extra: Formula | None = None, noise: bool = False) -> ShallowProof:
    """One cut joining proofs ``p`` of ``▷ F`` and ``q`` of ``▷ G``.

    ``kind`` picks the cut formula's main connective (see ``JOIN_KINDS``);
    both premises introduce it as principal, except for ``atom``, where it is
    weakened on both sides.  ``atom`` names the atom used by the atomic kinds
    and ``extra`` the second component for ``or``/``imp``.  With ``noise`` the
    premises also pass through weakening, display moves and contraction.
    """
    pc, qc = p.conclusion, q.conclusion
    if pc.ante != EMPTY or qc.ante != EMPTY or len(items(pc.succ)) != 1 or len(items(qc.succ)) != 1:
        raise ValueError("join_by_cut needs two proofs of the form ▷ F")
    f, g = pc.succ.f, qc.succ.f
    atom = atom or Atom("p")
    h = extra or atom
    if kind == "atom":
        a, left, right = atom, _wr(p, Fml(atom)), _wl(q, Fml(atom))
    elif kind == "atom-id":
        a, left, right = atom, _wr(infer(Rule.Id, A=atom), Fml(f)), _wl(q, Fml(atom))
    elif kind == "or":
        a = Or(f, h)
        left = infer(Rule.OrR, p, A=f, B=h, i=1)
        right = infer(Rule.OrL, _wl(q, Fml(f)), _wl(q, Fml(h)), A=f, B=h, Y=qc.succ)
    elif kind == "and":
        a = And(f, g)
        left = infer(Rule.AndR, p, q, A=f, B=g)
        right = infer(Rule.AndL, _wl(q, Fml(g)), A=f, B=g, Y=qc.succ, i=2)
    elif kind == "imp":
        a = Imp(h, f)
        left = infer(Rule.ImpR, _wl(p, Fml(h)), A=h, B=f)
        right = infer(Rule.ImpL, _wr(q, Fml(h)), _wl(q, Fml(f)), A=h, B=f, Y=qc.succ)
    elif kind == "excl":
        a = Excl(f, Bot())
        left = infer(Rule.ExclR, p, infer(Rule.BotL), A=f, B=Bot())
        right = infer(Rule.ExclL, _wl(_wr(q, Fml(Bot())), Fml(f)), A=f, B=Bot(), Y=qc.succ)
    elif kind in ("box", "bbox"):
        white = kind == "box"
        a = Box(f) if white else BBox(f)
        shell = (Black if white else White)(EMPTY)
        rp = Rule.RpCirc if white else Rule.RpBullet
        up = infer(rp, _wl(p, shell), X=EMPTY, Y=Fml(f))
        left = infer(Rule.BoxR if white else Rule.BBoxR, up, A=f)
        right = infer(Rule.BoxL if white else Rule.BBoxL, _wl(q, Fml(f)), A=f, X=qc.succ)
    elif kind in ("dia", "bdia"):
        white = kind == "dia"
        a = Dia(f) if white else BDia(f)
        left = infer(Rule.DiaR if white else Rule.BDiaR, p, A=f)
        shell = (White if white else Black)(Fml(f))
        right = infer(Rule.DiaL if white else Rule.BDiaL, _wl(q, shell), A=f, X=qc.succ)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if noise:
        left = _noise_right(left, Fml(a), Fml(h), dup=True)
        right = _noise_left(right, Fml(a), Fml(h), dup=True)
    return _cut(a, left, right)
