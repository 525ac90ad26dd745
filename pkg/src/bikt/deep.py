"""Deep inference calculus, saturation-based proof search and compilation.

Two calculi are available.  ``Calculus.RAW`` applies the deep rules in the
literal form where rules fire at any hole of matching polarity, the
implication-left and exclusion-right rules need a strict context, and the
modal rules build bare ``∘A``/``•A`` structures.  ``Calculus.SEARCH`` is the
refined search system: it adds the derived rules that copy the consequent of
an implication (and the antecedent of an exclusion) in place, keeps every
created modal structure in the shape ``∘(X ▷ Y)``, and blocks any rule that
would not enlarge the least enclosing factor.

Every rule of both systems keeps its conclusion inside each premise (the
premise only gains material), so a backward search never has to retract a
choice: it repeatedly applies the first applicable rule in a fixed priority
order until every branch closes, a branch saturates, or a bound is hit.

The order is axioms, then non-branching static rules, then branching static
rules, then propagation, then realisation (the rules that create new nested
structure).  A realisation rule is only considered when no static or
propagation rule applies anywhere in the sequent, which makes the factor it
fires in saturated and propagated.

Proofs found by either calculus compile to shallow proofs checked by
:mod:`bikt.shallow`.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence
from functools import lru_cache

from .shallow import Rule, RuleSet, RULESETS, ShallowProof, display, infer
from .syntax import (
    BOT, EMPTY, TOP, And, BBox, BDia, Black, Box, Dia, Excl, Fml, Formula, HolePath,
    Imp, Or, Polarity, Step, Structure, Turnstile, White, _rebuild, _sub_slot, comma,
    items, normalize, parse_formula, parse_structure, print_structure, subformulas,
)

__all__ = [
    "DeepRule", "Logic", "Calculus", "SearchConfig", "Inst", "DeepProof",
    "Proved", "NotProvedSaturated", "BoundExhausted", "Outcome",
    "applicable", "is_saturated", "is_left_saturated", "is_right_saturated",
    "is_realised", "superset", "prove", "replay", "compile_to_shallow",
    "CompileError", "ReplayError", "UnsupportedConnective", "HeadMismatch",
    "UnsupportedLanguage", "proof_to_json", "proof_from_json", "nesting_depth",
    "shallow_ruleset", "dump_proof",
]


class DeepRule(enum.Enum):
    Id = "Id"
    BotL = "BotL"
    TopR = "TopR"
    TriL1 = "TriL1"
    TriR1 = "TriR1"
    TriL2 = "TriL2"
    TriR2 = "TriR2"
    BoxL1 = "BoxL1"
    DiaR1 = "DiaR1"
    BBoxL1 = "BBoxL1"
    BDiaR1 = "BDiaR1"
    BBoxL2 = "BBoxL2"
    DiaR2 = "DiaR2"
    BoxL2 = "BoxL2"
    BDiaR2 = "BDiaR2"
    OrL = "OrL"
    OrR = "OrR"
    AndL = "AndL"
    AndR = "AndR"
    ExclL = "ExclL"
    ImpR = "ImpR"
    ImpL = "ImpL"
    ExclR = "ExclR"
    DiaL = "DiaL"
    BoxR = "BoxR"
    BDiaL = "BDiaL"
    BBoxR = "BBoxR"
    ExclL1 = "ExclL1"
    ImpR1 = "ImpR1"
    T_Box = "T_Box"
    T_Dia = "T_Dia"
    Four_BoxL = "Four_BoxL"
    Four_DiaR = "Four_DiaR"
    B_BoxL = "B_BoxL"
    B_DiaR = "B_DiaR"
    # equal-relation mode: transcriptions of the two turnstile-distribution rules
    E_CircL = "E_CircL"
    E_BulletL = "E_BulletL"
    E_CircR = "E_CircR"
    E_BulletR = "E_BulletR"
    # classical mode: merging a nested turnstile into its parent
    MergeL = "MergeL"
    MergeR = "MergeR"


E_RULES = frozenset({DeepRule.E_CircL, DeepRule.E_BulletL, DeepRule.E_CircR,
                     DeepRule.E_BulletR})
EXTENSION_RULES = frozenset({DeepRule.T_Box, DeepRule.T_Dia, DeepRule.Four_BoxL,
                             DeepRule.Four_DiaR, DeepRule.B_BoxL, DeepRule.B_DiaR})


class Logic(enum.Enum):
    BIKT = "bikt"
    IKT = "ikt"
    IK = "ik"
    KT = "kt"


class Calculus(enum.Enum):
    SEARCH = "dbikt1"
    RAW = "dbikt"


AXIOM_FLAGS = ("T", "4", "B")


@dataclass(frozen=True)
class SearchConfig:
    logic: Logic = Logic.BIKT
    extra_axioms: frozenset = frozenset()
    calculus: Calculus = Calculus.SEARCH
    max_nesting_depth: int = 8
    max_structure_size: int = 400
    max_steps: int = 100000

    def __post_init__(self):
        object.__setattr__(self, "logic", Logic(self.logic))
        object.__setattr__(self, "calculus", Calculus(self.calculus))
        object.__setattr__(self, "extra_axioms", frozenset(self.extra_axioms))
        bad = self.extra_axioms - set(AXIOM_FLAGS)
        if bad:
            raise ValueError(f"unknown axiom flags {sorted(bad)}")
        for name in ("max_nesting_depth", "max_structure_size", "max_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    @property
    def e_mode(self) -> bool:
        return self.logic is not Logic.BIKT

    @property
    def classical(self) -> bool:
        return self.logic is Logic.KT

    def scaled(self, k: int) -> "SearchConfig":
        return SearchConfig(self.logic, self.extra_axioms, self.calculus,
                            self.max_nesting_depth * k, self.max_structure_size * k,
                            self.max_steps * k)

    def with_calculus(self, calculus: Calculus) -> "SearchConfig":
        return SearchConfig(self.logic, self.extra_axioms, calculus, self.max_nesting_depth,
                            self.max_structure_size, self.max_steps)


class CompileError(Exception):
    pass


class ReplayError(Exception):
    pass


class UnsupportedConnective(ValueError):
    pass


class HeadMismatch(ValueError):
    pass


class UnsupportedLanguage(ValueError):
    pass


# ---------------------------------------------------------------------------
# rule instances


@dataclass(frozen=True, eq=False)
class Inst:
    """A rule instance on a concrete sequent.

    ``hole`` is the slot holding ``principal``; ``anchor`` is the slot the
    compiler displays, and ``prem_anchors`` are the same slot after each
    premise's edit.  ``added`` lists what each premise gains.
    """

    rule: DeepRule
    hole: HolePath
    principal: Structure
    premises: tuple[Structure, ...]
    anchor: HolePath
    prem_anchors: tuple[HolePath, ...] = ()
    added: tuple[tuple[Structure, ...], ...] = ()
    shape: str = "add"
    aux: tuple = ()

    def key(self) -> tuple:
        return (self.rule, self.hole, self.principal, self.premises)


def _edit(root: Structure, path: HolePath, fn) -> tuple[Structure, HolePath]:
    """Rebuild ``root`` with the slot at ``path`` mapped by ``fn``; also return
    the slot's path in the rebuilt structure (sorting may move items)."""

    def go(slot: tuple[Structure, ...], steps: tuple[Step, ...]):
        if not steps:
            return comma(*fn(slot)), ()
        st = steps[0]
        node = slot[st.index]
        inner, sub = go(items(_sub_slot(node, st.kind)), steps[1:])
        new_node = _rebuild(node, st.kind, inner)
        new = comma(*slot[: st.index], *slot[st.index + 1:], new_node)
        return new, (Step(items(new).index(new_node), st.kind),) + sub

    new_root, steps = go(items(root), path.steps)
    return new_root, HolePath(steps)


def _sibling(path: HolePath, kind: str) -> HolePath:
    last = path.steps[-1]
    return HolePath(path.steps[:-1] + (Step(last.index, kind),))


def _apply_edits(seq: Structure, anchor: HolePath, edits) -> tuple[Structure, HolePath]:
    """``edits`` is a list of ``(where, op, items)``; ``where`` is ``None`` for
    the anchor slot or ``"ante"``/``"succ"`` for a side of the anchor's
    turnstile."""
    cur, anc = seq, anchor
    for where, op, new in edits:
        path = anc if where is None else _sibling(anc, where)
        if op == "add":
            fn = lambda its, new=new: list(its) + list(new)
        elif op == "wrap_succ":
            fn = lambda its, new=new: [Turnstile(comma(*its), comma(*new))]
        elif op == "wrap_ante":
            fn = lambda its, new=new: [Turnstile(comma(*new), comma(*its))]
        else:
            raise ValueError(op)
        cur, np = _edit(cur, path, fn)
        anc = np if where is None else _sibling(np, anc.steps[-1].kind)
    return cur, anc


def _make(rule, seq, hole, principal, anchor, premise_edits, shape="add", aux=()) -> Inst:
    prems, anchors, added = [], [], []
    for edits in premise_edits:
        p, a = _apply_edits(seq, anchor, edits)
        prems.append(p)
        anchors.append(a)
        added.append(tuple(x for _, _, new in edits for x in new))
    return Inst(rule, hole, principal, tuple(prems), anchor, tuple(anchors),
                tuple(added), shape, aux)


# ---------------------------------------------------------------------------
# structure queries


def _fset(its: Iterable[Structure]) -> set[Formula]:
    return {i.f for i in its if isinstance(i, Fml)}


def _missing(its: Sequence[Structure], new: Iterable[Structure]) -> list[Structure]:
    have = set(its)
    out = []
    for n in new:
        if n not in have and n not in out:
            out.append(n)
    return out


def _merge_missing(its: Sequence[Structure], new: Iterable[Structure]) -> list[Structure]:
    """Like ``_missing`` but a turnstile extended by one already present counts as there."""
    return [n for n in _missing(its, new)
            if not (isinstance(n, Turnstile) and _covered(n, its))]


def _content_sides(k: Structure) -> tuple[tuple[Structure, ...], tuple[Structure, ...]]:
    """Left and right items of a bullet's content: its turnstile sides, or
    the bare content on both sides when it is not a single turnstile."""
    if isinstance(k, Turnstile):
        return items(k.ante), items(k.succ)
    return items(k), items(k)


def _premise_depth(inst: Inst) -> int:
    return max((nesting_depth(p) for p in inst.premises), default=0)


@lru_cache(maxsize=1 << 16)
def nesting_depth(s: Structure) -> int:
    """Longest chain of nested ▷/∘/• connectives."""
    if isinstance(s, Turnstile):
        return 1 + max(nesting_depth(s.ante), nesting_depth(s.succ))
    if isinstance(s, (White, Black)):
        return 1 + nesting_depth(s.inner)
    if hasattr(s, "children"):
        return max((nesting_depth(c) for c in s.children), default=0)
    return 0


def _walk(root: Structure) -> Iterator[tuple[HolePath, tuple[Structure, ...]]]:
    """All slots in pre-order, outer slots first."""
    stack = [(HolePath(), items(root))]
    while stack:
        path, its = stack.pop()
        yield path, its
        kids = []
        for i, it in enumerate(its):
            if isinstance(it, Turnstile):
                kids.append((path.child(i, "ante"), items(it.ante)))
                kids.append((path.child(i, "succ"), items(it.succ)))
            elif isinstance(it, (White, Black)):
                kids.append((path.child(i, "inner"), items(it.inner)))
        stack.extend(reversed(kids))


@lru_cache(maxsize=256)
def _walk_list(root: Structure) -> tuple:
    return tuple(_walk(root))


@lru_cache(maxsize=256)
def _tris(root: Structure) -> tuple:
    """Every turnstile node as (ante path, succ path, node)."""
    return tuple(_tris_gen(root))


def _tris_gen(root: Structure) -> Iterator[tuple[HolePath, HolePath, Turnstile]]:
    for path, its in _walk_list(root):
        for i, it in enumerate(its):
            if isinstance(it, Turnstile):
                yield path.child(i, "ante"), path.child(i, "succ"), it


def _left_known(c: Structure) -> set[Formula]:
    """Formulas already on the left of a turnstile in ``c`` or reachable
    through successive right sides."""
    out: set[Formula] = set()
    for t in items(c):
        if isinstance(t, Turnstile):
            out |= _fset(items(t.ante)) | _left_known(t.succ)
    return out


def _right_known(c: Structure) -> set[Formula]:
    out: set[Formula] = set()
    for t in items(c):
        if isinstance(t, Turnstile):
            out |= _fset(items(t.succ)) | _right_known(t.ante)
    return out


def is_saturated(s: Structure) -> bool:
    """Closure of the two sides of ``X ▷ Y`` under the static conditions."""
    if not isinstance(s, Turnstile):
        raise HeadMismatch("saturation is defined for turnstile structures")
    x, y = _fset(items(s.ante)), _fset(items(s.succ))
    if x & y:
        return False
    for f in x:
        if isinstance(f, And) and not (f.l in x and f.r in x):
            return False
        if isinstance(f, Or) and not (f.l in x or f.r in x):
            return False
        if isinstance(f, Imp) and not (f.l in y or f.r in x):
            return False
        if isinstance(f, Excl) and f.l not in x:
            return False
    for f in y:
        if isinstance(f, And) and not (f.l in y or f.r in y):
            return False
        if isinstance(f, Or) and not (f.l in y and f.r in y):
            return False
        if isinstance(f, Excl) and not (f.l in y or f.r in x):
            return False
        if isinstance(f, Imp) and f.r not in y:
            return False
    return True


def _bullet_content(s: Structure) -> set[Formula]:
    if not isinstance(s, (White, Black)):
        raise HeadMismatch("left/right saturation is defined for ∘/• structures")
    return _fset(items(s.inner))


def is_left_saturated(s: Structure) -> bool:
    x = _bullet_content(s)
    for f in x:
        if isinstance(f, And) and not (f.l in x and f.r in x):
            return False
        if isinstance(f, Or) and not (f.l in x or f.r in x):
            return False
        if isinstance(f, Excl) and f.l not in x:
            return False
        if isinstance(f, Imp) and f.r not in x:
            return False
    return True


def is_right_saturated(s: Structure) -> bool:
    y = _bullet_content(s)
    for f in y:
        if isinstance(f, And) and not (f.l in y or f.r in y):
            return False
        if isinstance(f, Or) and not (f.l in y and f.r in y):
            return False
        if isinstance(f, Imp) and f.r not in y:
            return False
        if isinstance(f, Excl) and f.l not in y:
            return False
    return True


def is_realised(f: Formula, factor: Structure, side: str) -> bool:
    """Whether ``f`` already has a witnessing child in ``factor``.

    ``side`` is ``"left"`` or ``"right"``.  When ``factor`` is a turnstile the
    matching side is inspected; a bullet is inspected through its content;
    any other structure is taken as the collection of items itself.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if isinstance(factor, Turnstile):
        its = items(factor.ante if side == "left" else factor.succ)
    elif isinstance(factor, (White, Black)):
        its = items(factor.inner)
    else:
        its = items(normalize(factor))
    return _realised_in(f, its)


def _realised_in(f: Formula, its: Sequence[Structure]) -> bool:
    if isinstance(f, (Imp, Excl)):
        return any(isinstance(i, Turnstile) and f.l in _fset(items(i.ante))
                   and f.r in _fset(items(i.succ)) for i in its)
    # which bullet colour witnesses the formula, and which side of a nested
    # turnstile must carry the body
    table = {Box: (White, "succ"), Dia: (White, "ante"),
             BBox: (Black, "succ"), BDia: (Black, "ante")}
    if type(f) not in table:
        raise UnsupportedConnective(f"no realisation clause for {f}")
    colour, side = table[type(f)]
    for i in its:
        if isinstance(i, colour):
            k = i.inner
            body = items(getattr(k, side)) if isinstance(k, Turnstile) else items(k)
            if f.a in _fset(body):
                return True
    return False


def superset(a: Structure, b: Structure) -> bool:
    """``a ⊃ b``: some toplevel set of ``a`` strictly contains that of ``b``."""
    if isinstance(a, Turnstile) and isinstance(b, Turnstile):
        xa, xb = _fset(items(a.ante)), _fset(items(b.ante))
        ya, yb = _fset(items(a.succ)), _fset(items(b.succ))
        return (xa > xb) or (ya > yb)
    if type(a) is type(b) and isinstance(a, (White, Black)):
        return _fset(items(a.inner)) > _fset(items(b.inner))
    raise HeadMismatch(f"cannot compare {a!r} with {b!r}")


# ---------------------------------------------------------------------------
# enumeration


class _Enum:
    """Generates the rule instances of one sequent, phase by phase."""

    def __init__(self, seq: Structure, cfg: SearchConfig, strict: bool = True):
        self.seq = seq
        self.cfg = cfg
        self.strict = strict
        self.search = cfg.calculus is Calculus.SEARCH

    def phases(self) -> list[Iterator[Inst]]:
        strict = self.branching(strict_forms=True)
        if not self.search and self.strict:
            strict = self._closing_first(strict)
        return [self.axioms(), self.static(), self.branching(), self.propagation(),
                strict, self.realisation()]

    def _closing_first(self, insts: Iterator[Inst]) -> Iterator[Inst]:
        """Raw search only: prefer instances whose premises close at once."""
        def open_premises(inst):
            return sum(next(_Enum(p, self.cfg).axioms(), None) is None for p in inst.premises)
        yield from sorted(insts, key=open_premises)

    def all(self) -> Iterator[Inst]:
        *early, late = self.phases()
        for ph in early:
            yield from ph
        # new structure is created breadth first: shallowest result first
        ranked = sorted(enumerate(late), key=lambda t: (_premise_depth(t[1]), t[0]))
        for _, inst in ranked:
            yield inst

    # -- helpers -----------------------------------------------------------

    def _slots(self):
        for path, its in _walk_list(self.seq):
            if path.steps:
                yield path, its, path.polarity

    def _add(self, rule, hole, principal, anchor, new, where=None, shape="add", aux=()):
        return _make(rule, self.seq, hole, principal, anchor, [[(where, "add", tuple(new))]],
                     shape, aux)

    # -- phase 0 -----------------------------------------------------------

    def axioms(self) -> Iterator[Inst]:
        for a_path, _, t in _tris(self.seq):
            common = _fset(items(t.ante)) & _fset(items(t.succ))
            if common:
                f = min(common)
                yield Inst(DeepRule.Id, a_path, Fml(f), (), a_path)
        for path, its, pol in self._slots():
            if pol is Polarity.NEGATIVE and Fml(BOT) in its:
                yield Inst(DeepRule.BotL, path, Fml(BOT), (), path)
            if pol is Polarity.POSITIVE and Fml(TOP) in its:
                yield Inst(DeepRule.TopR, path, Fml(TOP), (), path)

    # -- phase 1 -----------------------------------------------------------

    def static(self) -> Iterator[Inst]:
        ext = self.cfg.extra_axioms
        for path, its, pol in self._slots():
            for it in its:
                if not isinstance(it, Fml):
                    continue
                f = it.f
                new = None
                if pol is Polarity.NEGATIVE:
                    if isinstance(f, And):
                        rule, new = DeepRule.AndL, [Fml(f.l), Fml(f.r)]
                    elif isinstance(f, Excl) and self.search:
                        rule, new = DeepRule.ExclL1, [Fml(f.l)]
                    elif isinstance(f, Box) and "T" in ext:
                        rule, new = DeepRule.T_Box, [Fml(f.a)]
                elif pol is Polarity.POSITIVE:
                    if isinstance(f, Or):
                        rule, new = DeepRule.OrR, [Fml(f.l), Fml(f.r)]
                    elif isinstance(f, Imp) and self.search:
                        rule, new = DeepRule.ImpR1, [Fml(f.r)]
                    elif isinstance(f, Dia) and "T" in ext:
                        rule, new = DeepRule.T_Dia, [Fml(f.a)]
                if new is None:
                    continue
                miss = _missing(its, new)
                if miss or not self.strict:
                    yield self._add(rule, path, it, path, miss)
        if self.cfg.classical:
            yield from self._merges()

    def _merges(self) -> Iterator[Inst]:
        for a_path, s_path, t in _tris(self.seq):
            a_its, s_its = items(t.ante), items(t.succ)
            for rule, side in ((DeepRule.MergeL, a_its), (DeepRule.MergeR, s_its)):
                hole = a_path if rule is DeepRule.MergeL else s_path
                for c in side:
                    if not isinstance(c, Turnstile):
                        continue
                    ma = _merge_missing(a_its, items(c.ante))
                    ms = _merge_missing(s_its, items(c.succ))
                    if ma or ms or not self.strict:
                        yield _make(rule, self.seq, hole, c, a_path,
                                    [[(None, "add", tuple(ma)), ("succ", "add", tuple(ms))]],
                                    shape="merge")

    # -- phase 2 -----------------------------------------------------------

    def branching(self, strict_forms: bool = False) -> Iterator[Inst]:
        """Branching rules; the strict-context forms of →L and ≺R come in a
        later pass (``strict_forms``) because they freeze the slot's content."""
        for path, its, pol in self._slots():
            tri_side = path.steps[-1].kind in ("ante", "succ")
            use_tri = self.search and tri_side
            for it in its:
                if not isinstance(it, Fml):
                    continue
                f = it.f
                if strict_forms:
                    if pol is Polarity.NEGATIVE and isinstance(f, Imp) and not use_tri:
                        yield from self._imp_left_strict(path, its, it)
                    elif pol is Polarity.POSITIVE and isinstance(f, Excl) and not use_tri:
                        yield from self._excl_right_strict(path, its, it)
                    continue
                if pol is Polarity.NEGATIVE and isinstance(f, Or):
                    ok = Fml(f.l) not in its and Fml(f.r) not in its
                    if ok or not self.strict:
                        yield _make(DeepRule.OrL, self.seq, path, it, path,
                                    [[(None, "add", tuple(_missing(its, [Fml(f.l)])))],
                                     [(None, "add", tuple(_missing(its, [Fml(f.r)])))]],
                                    shape="branch")
                elif pol is Polarity.POSITIVE and isinstance(f, And):
                    ok = Fml(f.l) not in its and Fml(f.r) not in its
                    if ok or not self.strict:
                        yield _make(DeepRule.AndR, self.seq, path, it, path,
                                    [[(None, "add", tuple(_missing(its, [Fml(f.l)])))],
                                     [(None, "add", tuple(_missing(its, [Fml(f.r)])))]],
                                    shape="branch")
                elif pol is Polarity.NEGATIVE and isinstance(f, Imp) and use_tri:
                    yield from self._imp_left_tri(path, its, it)
                elif pol is Polarity.POSITIVE and isinstance(f, Excl) and use_tri:
                    yield from self._excl_right_tri(path, its, it)

    def _other_side(self, path: HolePath) -> tuple[Structure, ...]:
        kind = "succ" if path.steps[-1].kind == "ante" else "ante"
        from .syntax import slot_items
        return slot_items(self.seq, _sibling(path, kind))

    def _imp_left_tri(self, path, its, it):
        f = it.f
        succ = self._other_side(path)
        ma = _missing(succ, [Fml(f.l)])
        mb = _missing(its, [Fml(f.r)])
        if (ma and mb) or not self.strict:
            yield _make(DeepRule.ImpL, self.seq, path, it, path,
                        [[("succ", "add", tuple(ma))], [(None, "add", tuple(mb))]],
                        shape="imp_tri")

    def _excl_right_tri(self, path, its, it):
        f = it.f
        ante = self._other_side(path)
        ma = _missing(its, [Fml(f.l)])
        mb = _missing(ante, [Fml(f.r)])
        if (ma and mb) or not self.strict:
            yield _make(DeepRule.ExclR, self.seq, path, it, path,
                        [[(None, "add", tuple(ma))], [("ante", "add", tuple(mb))]],
                        shape="excl_tri")

    def _imp_left_strict(self, path, its, it):
        f = it.f
        here = _fset(its)
        blocked = Fml(f.r) in its or any(
            Fml(f.l) in items(t.succ) and here <= _fset(items(t.ante))
            for t in _nested(its, "ante"))
        if path.steps[-1].kind == "ante" and Fml(f.l) in self._other_side(path):
            blocked = True
        if not blocked or not self.strict:
            yield _make(DeepRule.ImpL, self.seq, path, it, path,
                        [[(None, "wrap_succ", (Fml(f.l),))], [(None, "add", (Fml(f.r),))]],
                        shape="imp_strict")

    def _excl_right_strict(self, path, its, it):
        f = it.f
        here = _fset(its)
        blocked = Fml(f.l) in its or any(
            Fml(f.r) in items(t.ante) and here <= _fset(items(t.succ))
            for t in _nested(its, "succ"))
        if path.steps[-1].kind == "succ" and Fml(f.r) in self._other_side(path):
            blocked = True
        if not blocked or not self.strict:
            yield _make(DeepRule.ExclR, self.seq, path, it, path,
                        [[(None, "add", (Fml(f.l),))], [(None, "wrap_ante", (Fml(f.r),))]],
                        shape="excl_strict")

    # -- phase 3 -----------------------------------------------------------

    def propagation(self) -> Iterator[Inst]:
        yield from self._prop_slots()
        yield from self._prop_tris()

    def _copy_out(self, rule, path, its, child, body):
        """Copy formulas of a child's side into the child's own slot."""
        for f in sorted(body):
            if Fml(f) not in its or not self.strict:
                yield self._add(rule, path, child, path, [Fml(f)] if Fml(f) not in its else [])

    def _prop_slots(self):
        ext = self.cfg.extra_axioms
        for path, its, pol in self._slots():
            neg = pol is Polarity.NEGATIVE
            tri_side = path.steps[-1].kind != "inner"
            for c in its:
                if isinstance(c, Turnstile) and tri_side:
                    side = items(c.ante) if neg else items(c.succ)
                    rule = DeepRule.TriL1 if neg else DeepRule.TriR1
                    yield from self._copy_out(rule, path, its, c, _fset(side))
                elif isinstance(c, (White, Black)):
                    left, right = _content_sides(c.inner)
                    black = isinstance(c, Black)
                    if neg:
                        want = Box if black else BBox
                        rule = DeepRule.BoxL1 if black else DeepRule.BBoxL1
                        body = {f.a for f in _fset(left) if isinstance(f, want)}
                        yield from self._copy_out(rule, path, its, c, body)
                        if not black and "B" in ext:
                            body = {f.a for f in _fset(left) if isinstance(f, Box)}
                            yield from self._copy_out(DeepRule.B_BoxL, path, its, c, body)
                    else:
                        want = Dia if black else BDia
                        rule = DeepRule.DiaR1 if black else DeepRule.BDiaR1
                        body = {f.a for f in _fset(right) if isinstance(f, want)}
                        yield from self._copy_out(rule, path, its, c, body)
                        if not black and "B" in ext:
                            body = {f.a for f in _fset(right) if isinstance(f, Dia)}
                            yield from self._copy_out(DeepRule.B_DiaR, path, its, c, body)

    def _prop_tris(self):
        ext = self.cfg.extra_axioms
        for a_path, s_path, t in _tris(self.seq):
            a_its, s_its = items(t.ante), items(t.succ)
            a_f, s_f = _fset(a_its), _fset(s_its)
            # nested turnstiles
            for j, c in enumerate(s_its):
                if isinstance(c, Turnstile):
                    have = set(items(c.ante))
                    for f in sorted(a_f):
                        if Fml(f) not in have or not self.strict:
                            yield self._add(DeepRule.TriL2, a_path, Fml(f),
                                            s_path.child(j, "ante"),
                                            [Fml(f)] if Fml(f) not in have else [])
            for j, c in enumerate(a_its):
                if isinstance(c, Turnstile):
                    have = set(items(c.succ))
                    for f in sorted(s_f):
                        if Fml(f) not in have or not self.strict:
                            yield self._add(DeepRule.TriR2, s_path, Fml(f),
                                            a_path.child(j, "succ"),
                                            [Fml(f)] if Fml(f) not in have else [])
            # bullets: formula pushed from this turnstile into a bullet child
            pushes = []
            for f in sorted(a_f):
                if isinstance(f, Box):
                    pushes.append((DeepRule.BoxL2, White, "succ", f.a, True))
                    if "4" in ext:
                        pushes.append((DeepRule.Four_BoxL, White, "succ", f, True))
                elif isinstance(f, BBox):
                    pushes.append((DeepRule.BBoxL2, Black, "succ", f.a, True))
            for f in sorted(s_f):
                if isinstance(f, Dia):
                    pushes.append((DeepRule.DiaR2, White, "ante", f.a, False))
                    if "4" in ext:
                        pushes.append((DeepRule.Four_DiaR, White, "ante", f, False))
                elif isinstance(f, BDia):
                    pushes.append((DeepRule.BDiaR2, Black, "ante", f.a, False))
            for rule, colour, where, body, to_left in pushes:
                src_path = a_path if to_left else s_path
                src = Fml(body) if rule in (DeepRule.Four_BoxL, DeepRule.Four_DiaR) else None
                principal = self._principal_for(rule, body)
                b_slot, b_its = (s_path, s_its) if where == "succ" else (a_path, a_its)
                for j, b in enumerate(b_its):
                    if not isinstance(b, colour):
                        continue
                    inst = self._push(rule, src_path, principal, b_slot.child(j, "inner"),
                                      b.inner, Fml(body), to_left)
                    if inst is not None:
                        yield inst

    @staticmethod
    def _principal_for(rule, body):
        if rule is DeepRule.BoxL2:
            return Fml(Box(body))
        if rule is DeepRule.BBoxL2:
            return Fml(BBox(body))
        if rule is DeepRule.DiaR2:
            return Fml(Dia(body))
        if rule is DeepRule.BDiaR2:
            return Fml(BDia(body))
        return Fml(body)

    def _push(self, rule, hole, principal, inner_path, k, n, to_left):
        if self.search and isinstance(k, Turnstile):
            side = "ante" if to_left else "succ"
            have = items(k.ante if to_left else k.succ)
            if n in have and self.strict:
                return None
            return self._add(rule, hole, principal, inner_path.child(0, side),
                             [] if n in have else [n])
        known = _left_known(k) if to_left else _right_known(k)
        if isinstance(n, Fml) and n.f in known and self.strict:
            return None
        op = "wrap_ante" if to_left else "wrap_succ"
        return _make(rule, self.seq, hole, principal, inner_path, [[(None, op, (n,))]],
                     shape="wrap")

    # -- phase 4 -----------------------------------------------------------

    def _gate(self, path: HolePath) -> bool:
        """Saturation of the least factor (only checked by the refined search)."""
        if not (self.search and self.strict):
            return True
        from .syntax import item_at
        factor = item_at(self.seq, path.parent, path.steps[-1].index)
        if isinstance(factor, Turnstile):
            return is_saturated(factor)
        if path.polarity is Polarity.NEGATIVE:
            return is_left_saturated(factor)
        return is_right_saturated(factor)

    def realisation(self) -> Iterator[Inst]:
        for path, its, pol in self._slots():
            for it in its:
                if not isinstance(it, Fml):
                    continue
                f = it.f
                new = None
                if pol is Polarity.POSITIVE:
                    if isinstance(f, Imp):
                        rule, new = DeepRule.ImpR, Turnstile(comma(f.l), comma(f.r))
                    elif isinstance(f, Box):
                        rule = DeepRule.BoxR
                        new = White(Turnstile(EMPTY, comma(f.a)) if self.search else comma(f.a))
                    elif isinstance(f, BBox):
                        rule = DeepRule.BBoxR
                        new = Black(Turnstile(EMPTY, comma(f.a)) if self.search else comma(f.a))
                elif pol is Polarity.NEGATIVE:
                    if isinstance(f, Excl):
                        rule, new = DeepRule.ExclL, Turnstile(comma(f.l), comma(f.r))
                    elif isinstance(f, Dia):
                        rule = DeepRule.DiaL
                        new = White(Turnstile(comma(f.a), EMPTY) if self.search else comma(f.a))
                    elif isinstance(f, BDia):
                        rule = DeepRule.BDiaL
                        new = Black(Turnstile(comma(f.a), EMPTY) if self.search else comma(f.a))
                if new is None:
                    continue
                if self.strict and (_realised_in(f, its) or not self._gate(path)
                                    or self._merged_already(path, its, f)
                                    or self._realised_above(path, f)):
                    continue
                yield self._add(rule, path, it, path, [new])
        if self.cfg.e_mode:
            yield from self._e_rules()

    def _realised_above(self, path: HolePath, f: Formula) -> bool:
        """Raw search: a copy pushed into a nested turnstile shares the
        witness of the enclosing occurrence, so it need not be realised again."""
        if self.search or not isinstance(f, (Imp, Excl)):
            return False
        from .syntax import slot_items
        mine = "succ" if isinstance(f, Imp) else "ante"
        other = "ante" if mine == "succ" else "succ"
        while len(path.steps) >= 2 and path.steps[-1].kind == mine:
            up = path.parent
            if up.steps[-1].kind != other:
                return False
            path = _sibling(up, mine)
            its = slot_items(self.seq, path)
            if Fml(f) not in its:
                return False
            if _realised_in(f, its):
                return True
        return False

    def _merged_already(self, path: HolePath, its, f: Formula) -> bool:
        """Classically a realisation would be merged straight back, so it is
        redundant once both halves sit on the two sides of the slot."""
        if not (self.cfg.classical and isinstance(f, (Imp, Excl))):
            return False
        kind = path.steps[-1].kind
        if kind == "inner":
            return False
        other = _fset(self._other_side(path))
        here = _fset(its)
        ante, succ = (here, other) if kind == "ante" else (other, here)
        return f.l in ante and f.r in succ

    def _e_rules(self) -> Iterator[Inst]:
        for a_path, s_path, t in _tris(self.seq):
            a_its, s_its = items(t.ante), items(t.succ)
            a_f, s_f = _fset(a_its), _fset(s_its)
            for j, b in enumerate(a_its):
                if not isinstance(b, (White, Black)):
                    continue
                white = isinstance(b, White)
                # a ∘ child meets □ on the left; a • child meets ■
                p = sorted(f for f in a_f if isinstance(f, Box if white else BBox))
                q = sorted(f for f in s_f if isinstance(f, Dia if white else BDia))
                if not p and not q:
                    continue
                op = Black if white else White
                x = Turnstile(op(Turnstile(comma(*p), EMPTY)) if p else EMPTY,
                              op(Turnstile(EMPTY, comma(*q))) if q else EMPTY)
                rule = DeepRule.E_CircL if white else DeepRule.E_BulletL
                inner = a_path.child(j, "inner")
                k = b.inner
                if isinstance(k, Turnstile) and self.search:
                    have = items(k.succ)
                    if self.strict and _covered(x, have):
                        continue
                    yield self._add(rule, a_path, b, inner.child(0, "succ"),
                                    [] if x in have else [x], aux=("e_left",))
                else:
                    if self.strict and _covered(x, _right_chain_items(k)):
                        continue
                    yield _make(rule, self.seq, a_path, b, inner,
                                [[(None, "wrap_succ", (x,))]], shape="wrap", aux=("e_left",))
            for j, b in enumerate(s_its):
                if not isinstance(b, (White, Black)):
                    continue
                colour = type(b)
                rule = DeepRule.E_CircR if colour is White else DeepRule.E_BulletR
                # bare content on the right reads as (∅ ▷ content)
                d0 = b.inner if isinstance(b.inner, Turnstile) else Turnstile(EMPTY, b.inner)
                for chain in _succ_chains(d0, self.cfg.max_nesting_depth):
                    u = sorted(set().union(*(_fset(items(d.ante)) for d in chain)))
                    if not u:
                        continue
                    v = sorted(_fset(items(chain[-1].succ)))
                    x = Turnstile(colour(Turnstile(comma(*u), EMPTY)),
                                  colour(Turnstile(EMPTY, comma(*v))) if v else EMPTY)
                    if self.strict and _covered(x, s_its):
                        continue
                    yield self._add(rule, s_path, b, s_path, [] if x in s_its else [x],
                                    aux=("e_right", tuple(chain)))


def _nested(its: Iterable[Structure], side: str) -> Iterator[Turnstile]:
    """Turnstiles among ``its`` and, recursively, on the given side of those."""
    todo = [t for t in its if isinstance(t, Turnstile)]
    while todo:
        t = todo.pop()
        yield t
        todo.extend(c for c in items(getattr(t, side)) if isinstance(c, Turnstile))


def _has(its: Iterable[Structure], y: Structure, side: str) -> bool:
    """``y`` is in ``its`` or, recursively, on the same side of a nested turnstile."""
    for t in its:
        if t == y:
            return True
        if isinstance(t, Turnstile):
            if isinstance(y, Turnstile) and _extends(t, y):
                return True
            if _has(items(getattr(t, side)), y, side):
                return True
    return False


def _extends(t: Turnstile, x: Turnstile) -> bool:
    return (all(_has(items(t.ante), y, "ante") for y in items(x.ante))
            and all(_has(items(t.succ), y, "succ") for y in items(x.succ)))


def _covered(x: Turnstile, its: Iterable[Structure]) -> bool:
    """Some turnstile among ``its`` already extends both sides of ``x``."""
    return any(isinstance(t, Turnstile) and _extends(t, x) for t in its)


def _right_chain_items(k: Structure) -> set[Structure]:
    out: set[Structure] = set()
    while isinstance(k, Turnstile):
        out |= set(items(k.succ))
        k = k.ante
    return out


def _succ_chains(d0: Turnstile, limit: int) -> Iterator[tuple[Turnstile, ...]]:
    stack = [(d0,)]
    while stack:
        chain = stack.pop()
        yield chain
        if len(chain) >= limit:
            continue
        kids = [c for c in items(chain[-1].succ) if isinstance(c, Turnstile)]
        stack.extend(chain + (c,) for c in reversed(kids))


def applicable(seq: Structure, cfg: SearchConfig | None = None) -> list[Inst]:
    """Every rule instance the selected calculus permits on ``seq``."""
    cfg = cfg or SearchConfig()
    seq = normalize(seq)
    if not isinstance(seq, Turnstile):
        raise ValueError("the sequent must be a turnstile structure")
    return list(_Enum(seq, cfg).all())


# ---------------------------------------------------------------------------
# proofs and outcomes


@dataclass(frozen=True, eq=False)
class DeepProof:
    rule: DeepRule
    conclusion: Structure
    hole: HolePath
    principal: Structure
    premises: tuple["DeepProof", ...] = ()
    inst: Inst | None = field(default=None, compare=False)

    def nodes(self) -> Iterator["DeepProof"]:
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(n.premises)

    def rules_used(self) -> set[DeepRule]:
        return {n.rule for n in self.nodes()}

    @property
    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def structures(self) -> Iterator[Structure]:
        for n in self.nodes():
            yield n.conclusion


@dataclass(frozen=True)
class Proved:
    proof: DeepProof
    steps: int

    @property
    def name(self) -> str:
        return "Proved"


@dataclass(frozen=True)
class NotProvedSaturated:
    sequent: Structure
    steps: int

    @property
    def name(self) -> str:
        return "NotProvedSaturated"


@dataclass(frozen=True)
class BoundExhausted:
    bound: str
    steps: int
    sequent: Structure | None = None

    @property
    def name(self) -> str:
        return "BoundExhausted"


Outcome = Proved | NotProvedSaturated | BoundExhausted


def _check_language(goal: Structure, cfg: SearchConfig) -> None:
    if cfg.logic is not Logic.IK:
        return
    from .syntax import Fml as _F
    stack = [goal]
    while stack:
        s = stack.pop()
        if isinstance(s, Black):
            raise UnsupportedLanguage("logic ik has no black structures")
        if isinstance(s, _F):
            for g in subformulas(s.f):
                if isinstance(g, (BBox, BDia, Excl)):
                    raise UnsupportedLanguage(f"logic ik does not allow {g}")
        for attr in ("ante", "succ", "inner"):
            if hasattr(s, attr):
                stack.append(getattr(s, attr))
        if hasattr(s, "children"):
            stack.extend(s.children)


def _goal_sequent(goal: Formula | Structure | str) -> Structure:
    if isinstance(goal, str):
        try:
            goal = parse_formula(goal)
        except SyntaxError:
            goal = parse_structure(goal)
    if isinstance(goal, Formula):
        return Turnstile(EMPTY, Fml(goal))
    seq = normalize(goal)
    if not isinstance(seq, Turnstile):
        raise ValueError("a structure goal must be a turnstile")
    return seq


class _Node:
    __slots__ = ("seq", "inst", "kids")

    def __init__(self, seq):
        self.seq = seq
        self.inst = None
        self.kids = []


def prove(goal: Formula | Structure | str, cfg: SearchConfig | None = None) -> Outcome:
    """Backward proof search for ``goal`` (formulas are searched as ``∅ ▷ A``)."""
    cfg = cfg or SearchConfig()
    seq = _goal_sequent(goal)
    _check_language(seq, cfg)
    root = _Node(seq)
    stack = [root]
    steps = 0
    while stack:
        node = stack.pop()
        inst, hit = _choose(node.seq, cfg)
        if inst is None:
            if hit:
                return BoundExhausted(hit, steps, node.seq)
            return NotProvedSaturated(node.seq, steps)
        steps += 1
        if steps > cfg.max_steps:
            return BoundExhausted("steps", steps - 1, node.seq)
        node.inst = inst
        node.kids = [_Node(p) for p in inst.premises]
        stack.extend(reversed(node.kids))
    return Proved(_freeze(root), steps)


def _choose(seq: Structure, cfg: SearchConfig) -> tuple[Inst | None, str | None]:
    hit = None
    for inst in _Enum(seq, cfg).all():
        bad = None
        for p in inst.premises:
            if p.size > cfg.max_structure_size:
                bad = "size"
                break
            if nesting_depth(p) > cfg.max_nesting_depth:
                bad = "depth"
                break
        if bad is None:
            return inst, None
        hit = hit or bad
    return None, hit


def _freeze(root: _Node) -> DeepProof:
    done: dict[int, DeepProof] = {}
    stack = [(root, False)]
    while stack:
        n, ready = stack.pop()
        if ready:
            i = n.inst
            done[id(n)] = DeepProof(i.rule, n.seq, i.hole, i.principal,
                                    tuple(done[id(k)] for k in n.kids), i)
        else:
            stack.append((n, True))
            stack.extend((k, False) for k in n.kids)
    return done[id(root)]


# ---------------------------------------------------------------------------
# replay


def _find_inst(node: DeepProof, cfg: SearchConfig) -> Inst:
    prem = tuple(p.conclusion for p in node.premises)
    if node.inst is not None and node.inst.premises == prem and node.inst.rule is node.rule:
        want = node.inst.key()
    else:
        want = (node.rule, node.hole, node.principal, prem)
    for inst in _Enum(node.conclusion, cfg, strict=False).all():
        if inst.rule is node.rule and inst.key() == want:
            return inst
    raise ReplayError(f"{node.rule.value} does not produce the recorded premises")


def replay(dp: DeepProof, cfg: SearchConfig | None = None) -> list[str]:
    """Re-derive every node's premises; returns failures labelled by node path."""
    cfg = cfg or SearchConfig()
    errors = []
    stack = [(dp, "root")]
    while stack:
        n, where = stack.pop()
        try:
            _find_inst(n, cfg)
        except ReplayError as e:
            errors.append(f"{where}:{n.rule.value}: {e}")
        stack.extend((c, f"{where}.{k}") for k, c in enumerate(n.premises))
    return sorted(errors)


# ---------------------------------------------------------------------------
# compilation to the shallow calculus


def _minus(side: Sequence[Structure], take: Iterable[Structure]) -> list[Structure]:
    rest = list(side)
    for t in take:
        rest.remove(t)
    return rest


def _sides(s: Structure) -> tuple[list[Structure], list[Structure]]:
    return list(items(s.ante)), list(items(s.succ))


def _weaken_left(p: ShallowProof, extra: Sequence[Structure]) -> ShallowProof:
    if not extra:
        return p
    return infer(Rule.WL, p, X=p.conclusion.ante, Y=comma(*extra), Z=p.conclusion.succ)


def _weaken_right(p: ShallowProof, extra: Sequence[Structure]) -> ShallowProof:
    if not extra:
        return p
    return infer(Rule.WR, p, X=p.conclusion.ante, Y=comma(*extra), Z=p.conclusion.succ)


def _lift_neg(p: ShallowProof, q: Structure, n: Structure, v: Structure) -> ShallowProof | None:
    """From ``n ▷ v`` derive ``q ▷ v``; ``None`` when ``q`` cannot yield ``n``."""
    if isinstance(q, Fml):
        f = q.f
        if isinstance(f, And) and n in (Fml(f.l), Fml(f.r)):
            return infer(Rule.AndL, p, A=f.l, B=f.r, X=EMPTY, Y=v, i=1 if n == Fml(f.l) else 2)
        if isinstance(f, Excl):
            if n == Fml(f.l):
                p = infer(Rule.WR, p, X=n, Y=Fml(f.r), Z=v)
                return infer(Rule.ExclL, p, A=f.l, B=f.r, X=EMPTY, Y=v)
            if n == Turnstile(comma(f.l), comma(f.r)):
                p = infer(Rule.RpTriL, p, X1=Fml(f.l), X2=Fml(f.r), Y=v)
                return infer(Rule.ExclL, p, A=f.l, B=f.r, X=EMPTY, Y=v)
        if isinstance(f, (Dia, BDia)):
            colour, rp, rule = ((White, Rule.RpBullet, Rule.DiaL) if isinstance(f, Dia)
                                else (Black, Rule.RpCirc, Rule.BDiaL))
            if n == colour(Fml(f.a)):
                return infer(rule, p, A=f.a, X=v)
            t = Turnstile(comma(f.a), EMPTY)
            if n == colour(t):
                p = infer(rp, p, X=t, Y=v)
                other = Black(v) if colour is White else White(v)
                p = infer(Rule.RpTriL, p, X1=Fml(f.a), X2=EMPTY, Y=other)
                p = infer(rp, p, X=Fml(f.a), Y=v, dir="up")
                return infer(rule, p, A=f.a, X=v)
        return None
    if isinstance(q, Turnstile):
        ante = items(q.ante)
        if n not in ante:
            return None
        p = infer(Rule.WL, p, X=n, Y=comma(*_minus(ante, [n])), Z=v)
        p = infer(Rule.WR, p, X=q.ante, Y=q.succ, Z=v)
        return infer(Rule.TriL, p, X2=q.ante, Y2=q.succ, Y1=v)
    if isinstance(q, (White, Black)) and isinstance(n, Fml):
        # •(□A,…) yields A; ∘(■A,…) yields A
        box, rule_l, rp, colour = ((Box, Rule.BoxL, Rule.RpCirc, White) if isinstance(q, Black)
                                   else (BBox, Rule.BBoxL, Rule.RpBullet, Black))
        k = q.inner
        left, _ = _content_sides(k)
        if Fml(box(n.f)) not in left:
            return None
        p = infer(rule_l, p, A=n.f, X=v)
        cv = colour(v)
        p = _weaken_left(p, _minus(left, [Fml(box(n.f))]))
        if isinstance(k, Turnstile):
            p = _weaken_right(p, items(k.succ))
            p = infer(Rule.TriL, p, X2=k.ante, Y2=k.succ, Y1=cv)
        return infer(rp, p, X=k, Y=v, dir="up")
    return None


def _lift_pos(p: ShallowProof, q: Structure, n: Structure, v: Structure) -> ShallowProof | None:
    """From ``v ▷ n`` derive ``v ▷ q``; ``None`` when ``q`` cannot yield ``n``."""
    if isinstance(q, Fml):
        f = q.f
        if isinstance(f, Or) and n in (Fml(f.l), Fml(f.r)):
            return infer(Rule.OrR, p, A=f.l, B=f.r, X=v, Y=EMPTY, i=1 if n == Fml(f.l) else 2)
        if isinstance(f, Imp):
            if n == Fml(f.r):
                p = infer(Rule.WL, p, X=v, Y=Fml(f.l), Z=n)
                return infer(Rule.ImpR, p, A=f.l, B=f.r, X=v, Y=EMPTY)
            if n == Turnstile(comma(f.l), comma(f.r)):
                p = infer(Rule.RpTriR, p, X1=v, X2=Fml(f.l), Y=Fml(f.r))
                return infer(Rule.ImpR, p, A=f.l, B=f.r, X=v, Y=EMPTY)
        if isinstance(f, (Box, BBox)):
            colour, rp, rule = ((White, Rule.RpCirc, Rule.BoxR) if isinstance(f, Box)
                                else (Black, Rule.RpBullet, Rule.BBoxR))
            if n == colour(Fml(f.a)):
                return infer(rule, p, A=f.a, X=v)
            t = Turnstile(EMPTY, comma(f.a))
            if n == colour(t):
                p = infer(rp, p, X=v, Y=t, dir="up")
                other = Black(v) if colour is White else White(v)
                p = infer(Rule.RpTriR, p, X1=other, X2=EMPTY, Y=Fml(f.a))
                p = infer(rp, p, X=v, Y=Fml(f.a))
                return infer(rule, p, A=f.a, X=v)
        return None
    if isinstance(q, Turnstile):
        succ = items(q.succ)
        if n not in succ:
            return None
        p = infer(Rule.WR, p, X=v, Y=comma(*_minus(succ, [n])), Z=n)
        p = infer(Rule.WL, p, X=v, Y=q.ante, Z=q.succ)
        return infer(Rule.TriR, p, X1=v, X2=q.ante, Y2=q.succ)
    if isinstance(q, (White, Black)) and isinstance(n, Fml):
        # •(…▷◇A) yields A; ∘(…▷◆A) yields A
        dia, rule_r, rp, colour = ((Dia, Rule.DiaR, Rule.RpBullet, White) if isinstance(q, Black)
                                   else (BDia, Rule.BDiaR, Rule.RpCirc, Black))
        k = q.inner
        _, right = _content_sides(k)
        if Fml(dia(n.f)) not in right:
            return None
        p = infer(rule_r, p, A=n.f, X=v)
        cv = colour(v)
        p = _weaken_right(p, _minus(right, [Fml(dia(n.f))]))
        if isinstance(k, Turnstile):
            p = _weaken_left(p, items(k.ante))
            p = infer(Rule.TriR, p, X1=cv, X2=k.ante, Y2=k.succ)
        return infer(rp, p, X=v, Y=k)
    return None


def _absorb(p: ShallowProof, n: Structure, sources: Sequence[Structure], negative: bool,
            lift=None) -> ShallowProof:
    """Remove the added item ``n`` using one of ``sources`` on the same side."""
    ante, succ = _sides(p.conclusion)
    side = ante if negative else succ
    other = comma(*(succ if negative else ante))
    if n in sources:
        rest = _minus(side, [n, n])
        if negative:
            return infer(Rule.CL, p, X=comma(*rest), Y=n, Z=other)
        return infer(Rule.CR, p, X=other, Y=n, Z=comma(*rest))
    for q in sources:
        if q not in side or q == n:
            continue
        rest = comma(*_minus(side, [n, q]))
        qr = comma(q, rest)
        if negative:
            v = Turnstile(qr, other)
            p1 = infer(Rule.RpTriR, p, X1=n, X2=qr, Y=other, dir="up")
            try:
                p2 = (lift or _lift_neg)(p1, q, n, v)
            except Exception:
                p2 = None
            if p2 is None:
                continue
            p3 = infer(Rule.RpTriR, p2, X1=q, X2=qr, Y=other)
            return infer(Rule.CL, p3, X=rest, Y=q, Z=other)
        v = Turnstile(other, qr)
        p1 = infer(Rule.RpTriL, p, X1=other, X2=qr, Y=n, dir="up")
        try:
            p2 = (lift or _lift_pos)(p1, q, n, v)
        except Exception:
            p2 = None
        if p2 is None:
            continue
        p3 = infer(Rule.RpTriL, p2, X1=other, X2=qr, Y=q)
        return infer(Rule.CR, p3, X=other, Y=q, Z=rest)
    raise CompileError(f"no source yields {print_structure(n)}")


def _reshape_neg(p, item, new_body, extra, rest, succ, colour):
    """Replace the left item ``colour(P ▷ ∅)`` by ``colour(P, extra)``."""
    inner = item.inner
    body = inner.ante
    k = Turnstile(comma(*rest), succ) if rest else succ
    if rest:
        p = infer(Rule.RpTriR, p, X1=item, X2=comma(*rest), Y=succ, dir="up")
    rp = Rule.RpCirc if colour is Black else Rule.RpBullet
    op = White if colour is Black else Black
    p = infer(rp, p, X=inner, Y=k)
    p = infer(Rule.RpTriL, p, X1=body, X2=EMPTY, Y=op(k))
    p = _weaken_left(p, extra)
    p = infer(rp, p, X=new_body, Y=k, dir="up")
    if rest:
        p = infer(Rule.RpTriR, p, X1=colour(new_body), X2=comma(*rest), Y=succ)
    return p


def _reshape_pos(p, item, new_body, extra, ante, rest, colour):
    """Replace the right item ``colour(∅ ▷ Q)`` by ``colour(Q, extra)``."""
    inner = item.inner
    body = inner.succ
    j = Turnstile(ante, comma(*rest)) if rest else ante
    if rest:
        p = infer(Rule.RpTriL, p, X1=ante, X2=comma(*rest), Y=item, dir="up")
    rp = Rule.RpBullet if colour is Black else Rule.RpCirc
    op = White if colour is Black else Black
    p = infer(rp, p, X=j, Y=inner, dir="up")
    p = infer(Rule.RpTriR, p, X1=op(j), X2=EMPTY, Y=body)
    p = _weaken_right(p, extra)
    p = infer(rp, p, X=j, Y=new_body)
    if rest:
        p = infer(Rule.RpTriL, p, X1=ante, X2=comma(*rest), Y=colour(new_body))
    return p


def _split_x(x: Turnstile):
    xa = x.ante if not isinstance(x.ante, type(EMPTY)) else None
    xs = x.succ if not isinstance(x.succ, type(EMPTY)) else None
    return xa, xs


def _unwrap_x(p, v, x, left_body, left_extra, right_body, right_extra, colour):
    """From ``v ▷ (c(P▷∅) ▷ c(∅▷Q))`` reach ``v ▷ (c L ▷ c R)``."""
    xa, xs = _split_x(x)
    p = infer(Rule.RpTriR, p, X1=v, X2=x.ante, Y=x.succ)
    cl, cr = colour(left_body), colour(right_body)
    if xa is not None:
        p = _reshape_neg(p, xa, left_body, left_extra, list(items(v)), x.succ, colour)
    else:
        p = infer(Rule.WL, p, X=v, Y=cl, Z=x.succ)
    ante = comma(cl, v)
    if xs is not None:
        p = _reshape_pos(p, xs, right_body, right_extra, ante, [], colour)
    else:
        p = infer(Rule.WR, p, X=ante, Y=cr, Z=EMPTY)
    return infer(Rule.RpTriR, p, X1=v, X2=cl, Y=cr, dir="up")


def _formula_items(s: Structure) -> list[Structure]:
    return [i for i in items(s) if isinstance(i, Fml)]


def _lift_e_left(p: ShallowProof, q: Structure, n: Structure, v: Structure):
    """Lift for the rules that push upward through a bullet child on the left:
    from ``v ▷ x`` derive ``v ▷ q`` with ``q`` the parent's residue."""
    if not isinstance(n, Turnstile) or not isinstance(q, (White, Black)):
        return None
    colour = type(q)
    xa, xs = _split_x(n)
    if (xa is not None and not isinstance(xa, colour)) or (xs is not None and not isinstance(xs, colour)):
        return None
    pbody = list(items(xa.inner.ante)) if xa is not None else []
    qbody = list(items(xs.inner.succ)) if xs is not None else []
    k = q.inner
    options = []
    if isinstance(k, Turnstile):
        options.append((k.ante, k.succ, True))
    options.append((EMPTY, k, False))
    for r0, s0, is_tri in options:
        try:
            le = _minus(items(r0), pbody)
            re = _minus(items(s0), qbody)
        except ValueError:
            continue
        p1 = _unwrap_x(p, v, n, r0, le, s0, re, colour)
        rule = Rule.BulletTriR if colour is Black else Rule.CircTriR
        p1 = infer(rule, p1, X=v, Y=r0, Z=s0)
        if not is_tri:
            rp = Rule.RpBullet if colour is Black else Rule.RpCirc
            op = White if colour is Black else Black
            t = Turnstile(EMPTY, s0)
            p1 = infer(rp, p1, X=v, Y=t, dir="up")
            p1 = infer(Rule.RpTriR, p1, X1=op(v), X2=EMPTY, Y=s0)
            p1 = infer(rp, p1, X=v, Y=s0)
        return p1
    return None


def _lift_e_right(chain):
    def lift(p: ShallowProof, q: Structure, n: Structure, v: Structure):
        if not isinstance(q, (White, Black)):
            return None
        bare = not isinstance(q.inner, Turnstile)
        if chain[0] != (Turnstile(EMPTY, q.inner) if bare else q.inner):
            return None
        colour = type(q)
        xa, xs = _split_x(n)
        u = xa.inner.ante
        vv = xs.inner.succ if xs is not None else EMPTY
        p = _unwrap_x(p, v, n, u, [], vv, [], colour)
        rule = Rule.BulletTriR if colour is Black else Rule.CircTriR
        p = infer(rule, p, X=v, Y=u, Z=vv)
        rp = Rule.RpBullet if colour is Black else Rule.RpCirc
        ov = (White if colour is Black else Black)(v)
        p = infer(rp, p, X=v, Y=Turnstile(u, vv), dir="up")
        p = infer(Rule.RpTriR, p, X1=ov, X2=u, Y=vv)
        # distribute the antecedent formulas over the chain levels
        levels: list[list[Structure]] = [[] for _ in chain]
        for it in items(u):
            for lvl, d in enumerate(chain):
                if it in items(d.ante):
                    levels[lvl].append(it)
                    break
        cur_succ = list(items(vv))
        for lvl in range(len(chain) - 1, -1, -1):
            d = chain[lvl]
            outer = [ov] + [x for l in levels[:lvl] for x in l]
            p = _weaken_right(p, _minus(items(d.succ), cur_succ))
            p = _weaken_left(p, _minus(items(d.ante), levels[lvl]))
            p = infer(Rule.RpTriR, p, X1=comma(*outer), X2=d.ante, Y=d.succ, dir="up")
            cur_succ = [d]
        if bare:
            p = infer(Rule.RpTriR, p, X1=ov, X2=EMPTY, Y=q.inner)
        return infer(rp, p, X=v, Y=q.inner)
    return lift


def _top_proof(inst: Inst, k: int, proof: ShallowProof) -> ShallowProof:
    frag, _, _ = display(inst.premises[k], inst.prem_anchors[k], isolate=False)
    return frag.inverse().apply(proof)


def _ensure(p: ShallowProof, want: Structure) -> ShallowProof:
    """Weaken ``p`` up to ``want`` when it misses items (relaxed instances)."""
    if p.conclusion == want:
        return p
    a, s = _sides(p.conclusion)
    wa, ws = _sides(want)
    p = _weaken_left(p, _minus(wa, a))
    return _weaken_right(p, _minus(ws, s))


def _gadget(inst: Inst, concl: Structure, top: Turnstile, prems: list[ShallowProof], pol: Polarity) -> ShallowProof:
    ante, succ = _sides(top)
    neg = pol is Polarity.NEGATIVE
    r = inst.rule
    if r is DeepRule.Id:
        f = inst.principal
        return infer(Rule.Id, A=f.f, X=comma(*_minus(ante, [f])), Y=comma(*_minus(succ, [f])))
    if r is DeepRule.BotL:
        return infer(Rule.BotL, X=comma(*_minus(ante, [Fml(BOT)])), Y=comma(*succ))
    if r is DeepRule.TopR:
        return infer(Rule.TopR, X=comma(*ante), Y=comma(*_minus(succ, [Fml(TOP)])))
    if r in EXTENSION_RULES:
        raise CompileError(f"{r.value} has no counterpart in the shallow calculus")
    shape = inst.shape
    if shape == "add":
        p = prems[0]
        sources = [inst.principal] + (ante if neg else succ)
        lift = None
        if r in (DeepRule.E_CircL, DeepRule.E_BulletL):
            lift = _lift_e_left
        elif r in (DeepRule.E_CircR, DeepRule.E_BulletR):
            lift = _lift_e_right(inst.aux[1])
        for n in inst.added[0]:
            p = _absorb(p, n, [s for s in sources if s in (ante if neg else succ)], neg, lift)
        return p
    if shape == "wrap":
        p = prems[0]
        pa, ps = _sides(p.conclusion)
        lift = _lift_e_left if r in E_RULES else None
        if neg:
            # slot content C became (C ▷ N) on the left
            (w,) = pa
            p = infer(Rule.RpTriL, p, X1=w.ante, X2=w.succ, Y=comma(*ps))
            for n in items(w.succ):
                p = _absorb(p, n, succ, False, lift)
        else:
            (w,) = ps
            p = infer(Rule.RpTriR, p, X1=comma(*pa), X2=w.ante, Y=w.succ)
            for n in items(w.ante):
                p = _absorb(p, n, ante, True, lift)
        return p
    if shape == "branch":
        f = inst.principal.f
        p1, p2 = (_ensure(prems[0], _with(top, neg, f.l)), _ensure(prems[1], _with(top, neg, f.r)))
        if r is DeepRule.OrL:
            p = infer(Rule.OrL, p1, p2, A=f.l, B=f.r, X=comma(*ante), Y=comma(*succ))
            return infer(Rule.CL, p, X=comma(*_minus(ante, [inst.principal])),
                         Y=inst.principal, Z=comma(*succ))
        p = infer(Rule.AndR, p1, p2, A=f.l, B=f.r, X=comma(*ante), Y=comma(*succ))
        return infer(Rule.CR, p, X=comma(*ante), Y=inst.principal,
                     Z=comma(*_minus(succ, [inst.principal])))
    if shape == "imp_tri":
        f = inst.principal.f
        p1 = _ensure(prems[0], _with(top, False, f.l))
        p2 = _ensure(prems[1], _with(top, True, f.r))
        p = infer(Rule.ImpL, p1, p2, A=f.l, B=f.r, X=comma(*ante), Y=comma(*succ))
        return infer(Rule.CL, p, X=comma(*_minus(ante, [inst.principal])),
                     Y=inst.principal, Z=comma(*succ))
    if shape == "excl_tri":
        f = inst.principal.f
        p1 = _ensure(prems[0], _with(top, False, f.l))
        p2 = _ensure(prems[1], _with(top, True, f.r))
        p = infer(Rule.ExclR, p1, p2, A=f.l, B=f.r, X=comma(*ante), Y=comma(*succ))
        return infer(Rule.CR, p, X=comma(*ante), Y=inst.principal,
                     Z=comma(*_minus(succ, [inst.principal])))
    if shape == "imp_strict":
        return _imp_strict(inst, concl, top, prems)
    if shape == "excl_strict":
        return _excl_strict(inst, concl, top, prems)
    if shape == "merge":
        p = prems[0]
        c = inst.principal
        p = _ensure(p, Turnstile(comma(*ante, *items(c.ante)), comma(*succ, *items(c.succ))))
        if r is DeepRule.MergeL:
            p = infer(Rule.SLInv, p, X1=c.ante, Y1=c.succ, X2=comma(*ante), Y2=comma(*succ))
            return infer(Rule.CL, p, X=comma(*_minus(ante, [c])), Y=c, Z=comma(*succ))
        p = infer(Rule.SRInv, p, X1=comma(*ante), Y1=comma(*succ), X2=c.ante, Y2=c.succ)
        return infer(Rule.CR, p, X=comma(*ante), Y=c, Z=comma(*_minus(succ, [c])))
    raise CompileError(f"no gadget for shape {shape}")


def _with(top: Turnstile, left: bool, f: Formula) -> Turnstile:
    a, s = _sides(top)
    if left:
        return Turnstile(comma(*a, Fml(f)), comma(*s))
    return Turnstile(comma(*a), comma(*s, Fml(f)))


def _imp_strict(inst: Inst, concl: Structure, top: Turnstile, prems) -> ShallowProof:
    from .syntax import slot_items
    f = inst.principal.f
    slot = list(slot_items(concl, inst.anchor))
    ante, succ = _sides(top)
    extra = _minus(ante, slot)
    delta = comma(*succ)
    s = comma(*slot)
    p1, p2 = prems
    if extra:
        e = comma(*extra)
        p1 = infer(Rule.RpTriR, p1, X1=Turnstile(s, Fml(f.l)), X2=e, Y=delta, dir="up")
        y = Turnstile(e, delta)
        p1 = infer(Rule.RpTriL, p1, X1=s, X2=Fml(f.l), Y=y)
        p2 = infer(Rule.RpTriR, p2, X1=comma(s, Fml(f.r)), X2=e, Y=delta, dir="up")
    else:
        y = delta
        p1 = infer(Rule.RpTriL, p1, X1=s, X2=Fml(f.l), Y=y)
    p = infer(Rule.ImpL, p1, p2, A=f.l, B=f.r, X=s, Y=y)
    p = infer(Rule.CL, p, X=comma(*_minus(slot, [inst.principal])), Y=inst.principal, Z=y)
    if extra:
        p = infer(Rule.RpTriR, p, X1=s, X2=comma(*extra), Y=delta)
    return p


def _excl_strict(inst: Inst, concl: Structure, top: Turnstile, prems) -> ShallowProof:
    from .syntax import slot_items
    f = inst.principal.f
    slot = list(slot_items(concl, inst.anchor))
    ante, succ = _sides(top)
    extra = _minus(succ, slot)
    delta = comma(*ante)
    s = comma(*slot)
    p1, p2 = prems
    if extra:
        e = comma(*extra)
        x = Turnstile(delta, e)
        p1 = infer(Rule.RpTriL, p1, X1=delta, X2=e, Y=comma(s, Fml(f.l)), dir="up")
        p2 = infer(Rule.RpTriL, p2, X1=delta, X2=e, Y=Turnstile(Fml(f.r), s), dir="up")
        p2 = infer(Rule.RpTriR, p2, X1=x, X2=Fml(f.r), Y=s)
    else:
        x = delta
        p2 = infer(Rule.RpTriR, p2, X1=x, X2=Fml(f.r), Y=s)
    p = infer(Rule.ExclR, p1, p2, A=f.l, B=f.r, X=x, Y=s)
    p = infer(Rule.CR, p, X=x, Y=inst.principal, Z=comma(*_minus(slot, [inst.principal])))
    if extra:
        p = infer(Rule.RpTriL, p, X1=delta, X2=comma(*extra), Y=s)
    return p


def compile_to_shallow(dp: DeepProof, cfg: SearchConfig | None = None) -> ShallowProof:
    """Translate a deep proof into a shallow proof of the same end sequent."""
    cfg = cfg or SearchConfig()
    done: dict[int, ShallowProof] = {}
    stack = [(dp, False)]
    while stack:
        n, ready = stack.pop()
        if not ready:
            stack.append((n, True))
            stack.extend((c, False) for c in n.premises)
            continue
        try:
            inst = _find_inst(n, cfg)
        except ReplayError as e:
            raise CompileError(str(e)) from None
        frag, _, pol = display(n.conclusion, inst.anchor, isolate=False)
        tops = [_top_proof(inst, k, done[id(c)]) for k, c in enumerate(n.premises)]
        p = _gadget(inst, n.conclusion, frag.top, tops, pol)
        if p.conclusion != frag.top:
            raise CompileError(f"{n.rule.value}: gadget ends in {print_structure(p.conclusion)}")
        done[id(n)] = frag.apply(p)
    return done[id(dp)]


def shallow_ruleset(cfg: SearchConfig) -> RuleSet:
    if cfg.classical:
        return RULESETS["classical"]
    if cfg.e_mode:
        return RULESETS["e"]
    return RULESETS["base"]


# ---------------------------------------------------------------------------
# serialisation


def _path_json(p: HolePath) -> list:
    return [[s.index, s.kind] for s in p.steps]


def _path_from(d) -> HolePath:
    return HolePath(tuple(Step(int(i), str(k)) for i, k in d))


def proof_to_json(dp: DeepProof, cfg: SearchConfig | None = None) -> dict:
    def node(n: DeepProof) -> dict:
        return {"rule": n.rule.value, "conclusion": print_structure(n.conclusion),
                "hole": _path_json(n.hole), "principal": print_structure(n.principal),
                "premises": [node(c) for c in n.premises]}
    out = {"calculus": "deep", "proof": node(dp)}
    if cfg is not None:
        out["logic"] = cfg.logic.value
        out["axioms"] = sorted(cfg.extra_axioms)
        out["system"] = cfg.calculus.value
    return out


def proof_from_json(d: Mapping) -> tuple[DeepProof, SearchConfig]:
    if d.get("calculus") != "deep":
        raise ValueError("not a deep proof document")
    cfg = SearchConfig(logic=d.get("logic", "bikt"), extra_axioms=d.get("axioms", ()),
                       calculus=d.get("system", "dbikt1"))

    def node(n: Mapping, where: str) -> DeepProof:
        try:
            return DeepProof(DeepRule(n["rule"]), parse_structure(n["conclusion"]),
                             _path_from(n["hole"]), parse_structure(n["principal"]),
                             tuple(node(c, f"{where}.{k}") for k, c in enumerate(n["premises"])))
        except (KeyError, ValueError, SyntaxError) as e:
            raise ValueError(f"{where}: {e}") from None

    return node(d["proof"], "root"), cfg


def dump_proof(dp: DeepProof, cfg: SearchConfig | None = None) -> str:
    return json.dumps(proof_to_json(dp, cfg), indent=1)
