"""Formulas, nested-sequent structures, concrete syntax and context machinery.

Structures are kept in a normal form where commas are flattened multisets
with a canonical child order, so equality of normal forms is equality modulo
associativity, commutativity and the empty unit.  Every node caches a sort
key and a hash at construction.
"""

from __future__ import annotations

import enum
import re
from functools import cached_property, lru_cache
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Formula", "Atom", "Top", "Bot", "And", "Or", "Imp", "Excl",
    "Box", "Dia", "BBox", "BDia", "TOP", "BOT",
    "Structure", "Empty", "Fml", "Comma", "Turnstile", "White", "Black", "Hole",
    "EMPTY", "HOLE", "Polarity", "Step", "HolePath", "ParseError", "InvalidPath",
    "NoFactor", "parse_formula", "print_formula", "parse_structure",
    "print_structure", "normalize", "comma", "items", "tri", "fml",
    "tau_neg", "tau_pos", "tau", "polarity_at", "is_strict", "toplevel",
    "least_factor", "member", "find_hole", "plug", "subformulas", "atoms",
    "slot_items", "replace_slot", "item_at", "formula_atoms",
]


# ---------------------------------------------------------------------------
# formulas

_F_ATOM, _F_TOP, _F_BOT, _F_AND, _F_OR, _F_IMP, _F_EXCL = range(7)
_F_BOX, _F_DIA, _F_BBOX, _F_BDIA = range(7, 11)


class Formula:
    """Base class of formula nodes.  Instances are immutable and hashable."""

    __slots__ = ()
    _key: tuple
    _hash: int

    def __eq__(self, other: object) -> bool:
        return self is other or (isinstance(other, Formula) and self._key == other._key)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Formula") -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"<{print_formula(self)}>"

    def __str__(self) -> str:
        return print_formula(self)

    @cached_property
    def size(self) -> int:
        """Node count of the formula tree."""
        return 1 + sum(c.size for c in self.children())

    def children(self) -> tuple["Formula", ...]:
        return ()


def _seal(obj, key: tuple) -> None:
    object.__setattr__(obj, "_key", key)
    object.__setattr__(obj, "_hash", hash(key))


_IDENT = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not _IDENT.match(self.name) or self.name in _KEYWORDS:
            raise ValueError(f"bad atom name {self.name!r}")
        _seal(self, (_F_ATOM, self.name))


@dataclass(frozen=True, eq=False, repr=False)
class Top(Formula):
    def __post_init__(self):
        _seal(self, (_F_TOP,))


@dataclass(frozen=True, eq=False, repr=False)
class Bot(Formula):
    def __post_init__(self):
        _seal(self, (_F_BOT,))


@dataclass(frozen=True, eq=False, repr=False)
class _Binary(Formula):
    l: Formula
    r: Formula
    _tag = -1

    def __post_init__(self):
        _seal(self, (self._tag, self.l._key, self.r._key))

    def children(self):
        return (self.l, self.r)


@dataclass(frozen=True, eq=False, repr=False)
class _Unary(Formula):
    a: Formula
    _tag = -1

    def __post_init__(self):
        _seal(self, (self._tag, self.a._key))

    def children(self):
        return (self.a,)


class And(_Binary):
    _tag = _F_AND


class Or(_Binary):
    _tag = _F_OR


class Imp(_Binary):
    _tag = _F_IMP


class Excl(_Binary):
    _tag = _F_EXCL


class Box(_Unary):
    _tag = _F_BOX


class Dia(_Unary):
    _tag = _F_DIA


class BBox(_Unary):
    _tag = _F_BBOX


class BDia(_Unary):
    _tag = _F_BDIA


TOP = Top()
BOT = Bot()


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in f.children():
        yield from subformulas(c)


def formula_atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


# ---------------------------------------------------------------------------
# structures

_S_EMPTY, _S_FML, _S_COMMA, _S_TRI, _S_WHITE, _S_BLACK, _S_HOLE = range(7)


class Structure:
    """Base class of structure nodes."""

    __slots__ = ()
    _key: tuple
    _hash: int

    def __eq__(self, other: object) -> bool:
        return self is other or (isinstance(other, Structure) and self._key == other._key)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Structure") -> bool:
        return self._key < other._key

    def __repr__(self) -> str:
        return f"<{print_structure(self)}>"

    def __str__(self) -> str:
        return print_structure(self)

    @cached_property
    def size(self) -> int:
        """Node count, counting each formula by its own size."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False, repr=False)
class Empty(Structure):
    def __post_init__(self):
        _seal(self, (_S_EMPTY,))

    @cached_property
    def size(self):
        return 1


@dataclass(frozen=True, eq=False, repr=False)
class Hole(Structure):
    """Placeholder for the hole of a context."""

    def __post_init__(self):
        _seal(self, (_S_HOLE,))

    @cached_property
    def size(self):
        return 1


@dataclass(frozen=True, eq=False, repr=False)
class Fml(Structure):
    f: Formula

    def __post_init__(self):
        _seal(self, (_S_FML, self.f._key))

    @cached_property
    def size(self):
        return self.f.size


@dataclass(frozen=True, eq=False, repr=False)
class Comma(Structure):
    children: tuple[Structure, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        _seal(self, (_S_COMMA, tuple(c._key for c in self.children)))

    @cached_property
    def size(self):
        return sum(c.size for c in self.children)


@dataclass(frozen=True, eq=False, repr=False)
class Turnstile(Structure):
    ante: Structure
    succ: Structure

    def __post_init__(self):
        _seal(self, (_S_TRI, self.ante._key, self.succ._key))

    @cached_property
    def size(self):
        return 1 + self.ante.size + self.succ.size


@dataclass(frozen=True, eq=False, repr=False)
class White(Structure):
    inner: Structure

    def __post_init__(self):
        _seal(self, (_S_WHITE, self.inner._key))

    @cached_property
    def size(self):
        return 1 + self.inner.size


@dataclass(frozen=True, eq=False, repr=False)
class Black(Structure):
    inner: Structure

    def __post_init__(self):
        _seal(self, (_S_BLACK, self.inner._key))

    @cached_property
    def size(self):
        return 1 + self.inner.size


EMPTY = Empty()
HOLE = Hole()


def items(s: Structure) -> tuple[Structure, ...]:
    """The comma-level items of a normal structure."""
    if isinstance(s, Empty):
        return ()
    if isinstance(s, Comma):
        return s.children
    return (s,)


def comma(*parts: Structure | Formula) -> Structure:
    """Normal-form comma of normal parts (formulas are wrapped)."""
    out: list[Structure] = []
    for p in parts:
        if isinstance(p, Formula):
            out.append(Fml(p))
        elif isinstance(p, Comma):
            out.extend(p.children)
        elif not isinstance(p, Empty):
            out.append(p)
    if not out:
        return EMPTY
    if len(out) == 1:
        return out[0]
    out.sort(key=lambda c: c._key)
    return Comma(tuple(out))


def fml(f: Formula) -> Structure:
    return Fml(f)


def tri(a: Structure | Formula, s: Structure | Formula) -> Turnstile:
    return Turnstile(comma(a), comma(s))


@lru_cache(maxsize=1 << 16)
def normalize(s: Structure) -> Structure:
    """Flatten commas, drop units and sort children canonically."""
    if isinstance(s, Comma):
        return comma(*(normalize(c) for c in s.children))
    if isinstance(s, Turnstile):
        return Turnstile(normalize(s.ante), normalize(s.succ))
    if isinstance(s, White):
        return White(normalize(s.inner))
    if isinstance(s, Black):
        return Black(normalize(s.inner))
    return s


# ---------------------------------------------------------------------------
# concrete syntax

_KEYWORDS = {"true", "false", "neg", "coneg", "box", "dia", "bbox", "bdia", "emp"}
_UNARY = {"box": Box, "dia": Dia, "bbox": BBox, "bdia": BDia}

_TOKEN = re.compile(
    r"\s*(?:(?P<op>->|-<|\|>|w\[|b\[|[&|(),\[\]{}])|(?P<id>[a-z][a-zA-Z0-9_]*))"
)


class ParseError(SyntaxError):
    """Malformed concrete syntax; carries the offending position."""

    def __init__(self, position: int, expected: str, text: str = ""):
        super().__init__(f"at position {position}: expected {expected}")
        self.position = position
        self.expected = expected
        self.text = text


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(pos, "a token", text)
        tok = m.group("op") or m.group("id")
        toks.append((tok, m.start("op") if m.group("op") else m.start("id")))
        pos = m.end()
    toks.append(("<end>", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.toks[self.i][0]

    def pos(self) -> int:
        return self.toks[self.i][1]

    def take(self, tok: str) -> None:
        if self.peek() != tok:
            raise ParseError(self.pos(), repr(tok), self.text)
        self.i += 1

    def done(self) -> None:
        if self.peek() != "<end>":
            raise ParseError(self.pos(), "end of input", self.text)

    # formula levels, loosest first: ->, -<, |, &, unary
    def formula(self) -> Formula:
        left = self.excl()
        if self.peek() == "->":
            self.i += 1
            return Imp(left, self.formula())
        return left

    def excl(self) -> Formula:
        f = self.disj()
        while self.peek() == "-<":
            self.i += 1
            f = Excl(f, self.disj())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok in _UNARY:
            self.i += 1
            return _UNARY[tok](self.unary())
        if tok == "neg":
            self.i += 1
            return Imp(self.unary(), BOT)
        if tok == "coneg":
            self.i += 1
            return Excl(TOP, self.unary())
        if tok == "true":
            self.i += 1
            return TOP
        if tok == "false":
            self.i += 1
            return BOT
        if tok == "(":
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if _IDENT.match(tok) and tok not in _KEYWORDS:
            self.i += 1
            return Atom(tok)
        raise ParseError(self.pos(), "a formula", self.text)

    # structures
    def structure(self) -> Structure:
        left = self.slist()
        if self.peek() == "|>":
            self.i += 1
            return Turnstile(left, self.structure())
        return left

    def slist(self) -> Structure:
        parts = [self.sitem()]
        while self.peek() == ",":
            self.i += 1
            parts.append(self.sitem())
        return comma(*parts)

    _STOP = {",", "|>", ")", "]", "<end>"}

    def sitem(self) -> Structure:
        tok = self.peek()
        if tok == "emp":
            self.i += 1
            return EMPTY
        if tok == "[":
            self.i += 1
            self.take("]")
            return HOLE
        if tok == "{":
            self.i += 1
            f = self.formula()
            self.take("}")
            return Fml(f)
        if tok in ("w[", "b["):
            self.i += 1
            inner = self.structure()
            self.take("]")
            return White(inner) if tok == "w[" else Black(inner)
        if tok == "(":
            save = self.i
            try:
                f = self.formula()
                if self.peek() in self._STOP:
                    return Fml(f)
            except ParseError:
                pass
            self.i = save + 1
            s = self.structure()
            self.take(")")
            return s
        return Fml(self.formula())


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.done()
    return f


def parse_structure(text: str) -> Structure:
    """Parse a structure; ``[]`` denotes a context hole."""
    p = _Parser(text)
    s = p.structure()
    p.done()
    return s


_PREC = {Imp: 1, Excl: 2, Or: 3, And: 4}
_OPS = {Imp: "->", Excl: "-<", Or: "|", And: "&"}
_UNAME = {Box: "box", Dia: "dia", BBox: "bbox", BDia: "bdia"}


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), 5)


def print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, _Unary):
        inner = print_formula(f.a)
        if _prec(f.a) < 5:
            inner = f"({inner})"
        return f"{_UNAME[type(f)]} {inner}"
    p = _PREC[type(f)]
    ls, rs = print_formula(f.l), print_formula(f.r)
    # -> is right associative, the others group to the left
    if _prec(f.l) < p or (_prec(f.l) == p and isinstance(f, Imp)):
        ls = f"({ls})"
    if _prec(f.r) < p or (_prec(f.r) == p and not isinstance(f, Imp)):
        rs = f"({rs})"
    return f"{ls} {_OPS[type(f)]} {rs}"


def print_structure(s: Structure) -> str:
    if isinstance(s, Empty):
        return "emp"
    if isinstance(s, Hole):
        return "[]"
    if isinstance(s, Fml):
        return print_formula(s.f)
    if isinstance(s, White):
        return f"w[{print_structure(s.inner)}]"
    if isinstance(s, Black):
        return f"b[{print_structure(s.inner)}]"
    if isinstance(s, Comma):
        return ", ".join(
            f"({print_structure(c)})" if isinstance(c, (Turnstile, Comma)) else print_structure(c)
            for c in s.children
        )
    assert isinstance(s, Turnstile)
    a = print_structure(s.ante)
    if isinstance(s.ante, Turnstile):
        a = f"({a})"
    return f"{a} |> {print_structure(s.succ)}"


# ---------------------------------------------------------------------------
# formula translation


def _fold(op, fs: Sequence[Formula], unit: Formula) -> Formula:
    if not fs:
        return unit
    out = fs[0]
    for f in fs[1:]:
        out = op(out, f)
    return out


def tau_neg(x: Structure) -> Formula:
    """Antecedent reading: commas are conjunctions, ∘ is ◇, • is ◆."""
    if isinstance(x, Empty):
        return TOP
    if isinstance(x, Fml):
        return x.f
    if isinstance(x, Comma):
        return _fold(And, [tau_neg(c) for c in x.children], TOP)
    if isinstance(x, Turnstile):
        return Excl(tau_neg(x.ante), tau_pos(x.succ))
    if isinstance(x, White):
        return Dia(tau_neg(x.inner))
    if isinstance(x, Black):
        return BDia(tau_neg(x.inner))
    raise TypeError(f"cannot translate {x!r}")


def tau_pos(x: Structure) -> Formula:
    """Succedent reading: commas are disjunctions, ∘ is □, • is ■."""
    if isinstance(x, Empty):
        return BOT
    if isinstance(x, Fml):
        return x.f
    if isinstance(x, Comma):
        return _fold(Or, [tau_pos(c) for c in x.children], BOT)
    if isinstance(x, Turnstile):
        return Imp(tau_neg(x.ante), tau_pos(x.succ))
    if isinstance(x, White):
        return Box(tau_pos(x.inner))
    if isinstance(x, Black):
        return BBox(tau_pos(x.inner))
    raise TypeError(f"cannot translate {x!r}")


def tau(seq: Structure) -> Formula:
    if not isinstance(seq, Turnstile):
        raise TypeError("tau expects a sequent with a turnstile at the root")
    return tau_pos(seq)


# ---------------------------------------------------------------------------
# slots, paths and polarity
#
# A slot is a comma-level multiset: the root slot (holding the whole
# structure), the two sides of a turnstile, or the inside of ∘/•.  A path is
# a sequence of steps, each picking an item of the current slot by index and
# descending into one of its sub-slots.


class Polarity(enum.Enum):
    NEUTRAL = "neutral"
    POSITIVE = "positive"
    NEGATIVE = "negative"


class InvalidPath(ValueError):
    pass


class NoFactor(ValueError):
    pass


@dataclass(frozen=True)
class Step:
    index: int
    kind: str  # "ante", "succ" or "inner"


@dataclass(frozen=True)
class HolePath:
    """Address of a slot; the hole sits in that slot beside its other items."""

    steps: tuple[Step, ...] = ()

    def child(self, index: int, kind: str) -> "HolePath":
        return HolePath(self.steps + (Step(index, kind),))

    @property
    def parent(self) -> "HolePath":
        return HolePath(self.steps[:-1])

    @property
    def polarity(self) -> Polarity:
        for st in reversed(self.steps):
            if st.kind == "ante":
                return Polarity.NEGATIVE
            if st.kind == "succ":
                return Polarity.POSITIVE
        return Polarity.NEUTRAL

    def __len__(self) -> int:
        return len(self.steps)


def _sub_slot(node: Structure, kind: str) -> Structure:
    if kind == "ante" and isinstance(node, Turnstile):
        return node.ante
    if kind == "succ" and isinstance(node, Turnstile):
        return node.succ
    if kind == "inner" and isinstance(node, (White, Black)):
        return node.inner
    raise InvalidPath(f"cannot descend into {kind} of {node!r}")


def slot_items(root: Structure, path: HolePath) -> tuple[Structure, ...]:
    cur = items(root)
    for st in path.steps:
        if not 0 <= st.index < len(cur):
            raise InvalidPath(f"index {st.index} out of range")
        cur = items(_sub_slot(cur[st.index], st.kind))
    return cur


def item_at(root: Structure, path: HolePath, index: int) -> Structure:
    its = slot_items(root, path)
    if not 0 <= index < len(its):
        raise InvalidPath(f"index {index} out of range")
    return its[index]


def _rebuild(node: Structure, kind: str, new_slot: Structure) -> Structure:
    if kind == "ante":
        return Turnstile(new_slot, node.succ)
    if kind == "succ":
        return Turnstile(node.ante, new_slot)
    return White(new_slot) if isinstance(node, White) else Black(new_slot)


def replace_slot(root: Structure, path: HolePath, new_items: Iterable[Structure]) -> Structure:
    """Rebuild ``root`` with the slot at ``path`` holding ``new_items``."""

    def go(slot: tuple[Structure, ...], steps: tuple[Step, ...]) -> Structure:
        if not steps:
            return comma(*new_items)
        st = steps[0]
        if not 0 <= st.index < len(slot):
            raise InvalidPath(f"index {st.index} out of range")
        node = slot[st.index]
        inner = go(items(_sub_slot(node, st.kind)), steps[1:])
        rest = slot[: st.index] + slot[st.index + 1:]
        return comma(*rest, _rebuild(node, st.kind, inner))

    return go(items(root), path.steps)


def find_hole(ctx: Structure) -> HolePath:
    """Path of the unique hole marker in ``ctx``."""
    found: list[HolePath] = []

    def go(slot: tuple[Structure, ...], path: HolePath) -> None:
        for i, it in enumerate(slot):
            if isinstance(it, Hole):
                found.append(path)
            elif isinstance(it, Turnstile):
                go(items(it.ante), path.child(i, "ante"))
                go(items(it.succ), path.child(i, "succ"))
            elif isinstance(it, (White, Black)):
                go(items(it.inner), path.child(i, "inner"))

    go(items(normalize(ctx)), HolePath())
    if len(found) != 1:
        raise InvalidPath(f"expected exactly one hole, found {len(found)}")
    return found[0]


def plug(ctx: Structure, filler: Structure) -> Structure:
    """Replace every hole marker of ``ctx`` by ``filler`` and normalize."""
    if isinstance(ctx, Hole):
        return filler
    if isinstance(ctx, Comma):
        return comma(*(plug(c, filler) for c in ctx.children))
    if isinstance(ctx, Turnstile):
        return Turnstile(plug(ctx.ante, filler), plug(ctx.succ, filler))
    if isinstance(ctx, White):
        return White(plug(ctx.inner, filler))
    if isinstance(ctx, Black):
        return Black(plug(ctx.inner, filler))
    return ctx


def _ctx_path(root: Structure, path: HolePath | None) -> tuple[Structure, HolePath]:
    root = normalize(root)
    if path is None:
        path = find_hole(root)
    slot_items(root, path)
    return root, path


def polarity_at(root: Structure, path: HolePath | None = None) -> Polarity:
    """Polarity of a hole: decided by the innermost turnstile above it."""
    _, path = _ctx_path(root, path)
    return path.polarity


def is_strict(root: Structure, path: HolePath | None = None) -> bool:
    """True when the hole is the whole of a turnstile side or of a ∘/• body."""
    root, path = _ctx_path(root, path)
    if not path.steps:
        return False
    its = slot_items(root, path)
    return all(isinstance(i, Hole) for i in its) and len(its) <= 1


def least_factor(root: Structure, path: HolePath | None = None) -> tuple[HolePath, int]:
    """Innermost ▷/∘/• node enclosing the hole, as (slot path, item index)."""
    _, path = _ctx_path(root, path)
    if not path.steps:
        raise NoFactor("the hole has no enclosing turnstile or bullet")
    return path.parent, path.steps[-1].index


def toplevel(x: Structure) -> tuple[Formula, ...]:
    """Formulas at the comma level of ``x``, with multiplicity."""
    return tuple(i.f for i in items(normalize(x)) if isinstance(i, Fml))


def member(x: Structure, y: Structure) -> bool:
    """``y`` is ``x`` together with possibly more comma siblings."""
    need: dict[Structure, int] = {}
    for i in items(normalize(x)):
        need[i] = need.get(i, 0) + 1
    for i in items(normalize(y)):
        if need.get(i):
            need[i] -= 1
    return not any(need.values())


def atoms(s: Structure) -> set[str]:
    if isinstance(s, Fml):
        return formula_atoms(s.f)
    if isinstance(s, Comma):
        return set().union(*(atoms(c) for c in s.children))
    if isinstance(s, Turnstile):
        return atoms(s.ante) | atoms(s.succ)
    if isinstance(s, (White, Black)):
        return atoms(s.inner)
    return set()
