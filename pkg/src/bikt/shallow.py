"""Shallow nested-sequent calculus: rule catalogue, proof objects and checker.

Each rule is a schema over structure metavariables (``X``, ``Y``, ``X1`` ...)
and formula metavariables (``A``, ``B``).  A proof node stores the witness
that instantiates its schema, so checking a node is instantiation followed by
comparison of normal forms; no matching search is ever performed.

Witness conventions:

* missing structure metavariables default to the empty structure;
* ``i`` (1 or 2) selects the conjunct/disjunct of ``AndL``/``OrR``;
* ``dir`` is ``"down"`` (as drawn) or ``"up"`` (inverted) for the
  double-line rules ``RpCirc``, ``RpBullet``, ``RpTriL`` and ``RpTriR``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Mapping, Sequence

from .syntax import (
    EMPTY, BOT, TOP, And, BBox, BDia, Black, Box, Dia, Excl, Fml, Formula,
    HOLE, Hole, HolePath, Imp, Or, Polarity, Structure, Turnstile, White,
    comma, items, normalize, parse_formula, parse_structure, plug,
    print_formula, print_structure, slot_items, InvalidPath,
)

__all__ = [
    "Rule", "RuleSet", "RULESETS", "ShallowProof", "CheckError", "PolarityMismatch",
    "schema", "check_instance", "check_proof", "infer", "Fragment",
    "display", "display_neutral", "display_positive", "display_negative",
    "proof_to_json", "proof_from_json", "dump_proof", "load_proof",
    "expand_derived", "DOUBLE_LINE", "arity",
]


class Rule(enum.Enum):
    Id = "Id"
    BotL = "BotL"
    TopR = "TopR"
    WL = "WL"
    WR = "WR"
    CL = "CL"
    CR = "CR"
    SL = "SL"
    SR = "SR"
    TriL = "TriL"
    TriR = "TriR"
    RpCirc = "RpCirc"
    RpBullet = "RpBullet"
    Cut = "Cut"
    AndL = "AndL"
    AndR = "AndR"
    OrL = "OrL"
    OrR = "OrR"
    ImpL = "ImpL"
    ImpR = "ImpR"
    ExclL = "ExclL"
    ExclR = "ExclR"
    BoxL = "BoxL"
    BoxR = "BoxR"
    BBoxL = "BBoxL"
    BBoxR = "BBoxR"
    DiaL = "DiaL"
    DiaR = "DiaR"
    BDiaL = "BDiaL"
    BDiaR = "BDiaR"
    RpTriL = "RpTriL"
    RpTriR = "RpTriR"
    BulletTriR = "BulletTriR"
    CircTriR = "CircTriR"
    SLInv = "SLInv"
    SRInv = "SRInv"


DOUBLE_LINE = frozenset({Rule.RpCirc, Rule.RpBullet, Rule.RpTriL, Rule.RpTriR})
FORMULA_VARS = frozenset({"A", "B"})


class CheckError(Exception):
    """A proof step that does not instantiate its schema."""

    def __init__(self, node: str, side: str, detail: str = ""):
        super().__init__(f"{node}: {side} mismatch" + (f" ({detail})" if detail else ""))
        self.node = node
        self.side = side
        self.detail = detail


class PolarityMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# schemas


def _t(a, s) -> Turnstile:
    return Turnstile(comma(a), comma(s))


def _f(w: Mapping, k: str) -> Formula:
    v = w.get(k)
    if not isinstance(v, Formula):
        raise CheckError("witness", "witness", f"{k} must be a formula")
    return v


def _s(w: Mapping, k: str) -> Structure:
    v = w.get(k, EMPTY)
    if isinstance(v, Formula):
        return Fml(v)
    if not isinstance(v, Structure):
        raise CheckError("witness", "witness", f"{k} must be a structure")
    return v


def _pick(w: Mapping) -> int:
    i = w.get("i")
    if i not in (1, 2):
        raise CheckError("witness", "witness", "i must be 1 or 2")
    return i


Schema = Callable[[Mapping], tuple[list[Structure], Structure]]
_SCHEMAS: dict[Rule, Schema] = {}


def _rule(r: Rule):
    def deco(fn: Schema) -> Schema:
        _SCHEMAS[r] = fn
        return fn
    return deco


@_rule(Rule.Id)
def _(w):
    a = _f(w, "A")
    return [], _t(comma(_s(w, "X"), a), comma(a, _s(w, "Y")))


@_rule(Rule.BotL)
def _(w):
    return [], _t(comma(_s(w, "X"), BOT), _s(w, "Y"))


@_rule(Rule.TopR)
def _(w):
    return [], _t(_s(w, "X"), comma(TOP, _s(w, "Y")))


@_rule(Rule.WL)
def _(w):
    x, y, z = _s(w, "X"), _s(w, "Y"), _s(w, "Z")
    return [_t(x, z)], _t(comma(x, y), z)


@_rule(Rule.WR)
def _(w):
    x, y, z = _s(w, "X"), _s(w, "Y"), _s(w, "Z")
    return [_t(x, z)], _t(x, comma(y, z))


@_rule(Rule.CL)
def _(w):
    x, y, z = _s(w, "X"), _s(w, "Y"), _s(w, "Z")
    return [_t(comma(x, y, y), z)], _t(comma(x, y), z)


@_rule(Rule.CR)
def _(w):
    x, y, z = _s(w, "X"), _s(w, "Y"), _s(w, "Z")
    return [_t(x, comma(y, y, z))], _t(x, comma(y, z))


@_rule(Rule.SL)
def _(w):
    x1, y1, x2, y2 = _s(w, "X1"), _s(w, "Y1"), _s(w, "X2"), _s(w, "Y2")
    return [_t(comma(_t(x1, y1), x2), y2)], _t(comma(x1, x2), comma(y1, y2))


@_rule(Rule.SR)
def _(w):
    x1, y1, x2, y2 = _s(w, "X1"), _s(w, "Y1"), _s(w, "X2"), _s(w, "Y2")
    return [_t(x1, comma(y1, _t(x2, y2)))], _t(comma(x1, x2), comma(y1, y2))


@_rule(Rule.TriL)
def _(w):
    x2, y2, y1 = _s(w, "X2"), _s(w, "Y2"), _s(w, "Y1")
    return [_t(x2, comma(y2, y1))], _t(_t(x2, y2), y1)


@_rule(Rule.TriR)
def _(w):
    x1, x2, y2 = _s(w, "X1"), _s(w, "X2"), _s(w, "Y2")
    return [_t(comma(x1, x2), y2)], _t(x1, _t(x2, y2))


@_rule(Rule.RpCirc)
def _(w):
    x, y = _s(w, "X"), _s(w, "Y")
    return [_t(Black(x), y)], _t(x, White(y))


@_rule(Rule.RpBullet)
def _(w):
    x, y = _s(w, "X"), _s(w, "Y")
    return [_t(White(x), y)], _t(x, Black(y))


@_rule(Rule.RpTriL)
def _(w):
    x1, x2, y = _s(w, "X1"), _s(w, "X2"), _s(w, "Y")
    return [_t(_t(x1, x2), y)], _t(x1, comma(x2, y))


@_rule(Rule.RpTriR)
def _(w):
    x1, x2, y = _s(w, "X1"), _s(w, "X2"), _s(w, "Y")
    return [_t(x1, _t(x2, y))], _t(comma(x1, x2), y)


@_rule(Rule.Cut)
def _(w):
    a = _f(w, "A")
    x1, y1, x2, y2 = _s(w, "X1"), _s(w, "Y1"), _s(w, "X2"), _s(w, "Y2")
    return [_t(x1, comma(y1, a)), _t(comma(a, x2), y2)], _t(comma(x1, x2), comma(y1, y2))


@_rule(Rule.AndL)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(comma(x, a if _pick(w) == 1 else b), y)], _t(comma(x, And(a, b)), y)


@_rule(Rule.AndR)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(x, comma(a, y)), _t(x, comma(b, y))], _t(x, comma(And(a, b), y))


@_rule(Rule.OrL)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(comma(x, a), y), _t(comma(x, b), y)], _t(comma(x, Or(a, b)), y)


@_rule(Rule.OrR)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(x, comma(a if _pick(w) == 1 else b, y))], _t(x, comma(Or(a, b), y))


@_rule(Rule.ImpL)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(x, comma(a, y)), _t(comma(x, b), y)], _t(comma(x, Imp(a, b)), y)


@_rule(Rule.ImpR)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(comma(x, a), b)], _t(x, comma(Imp(a, b), y))


@_rule(Rule.ExclL)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(a, comma(b, y))], _t(comma(x, Excl(a, b)), y)


@_rule(Rule.ExclR)
def _(w):
    a, b, x, y = _f(w, "A"), _f(w, "B"), _s(w, "X"), _s(w, "Y")
    return [_t(x, comma(a, y)), _t(comma(x, b), y)], _t(x, comma(Excl(a, b), y))


@_rule(Rule.BoxL)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(a, x)], _t(Box(a), White(x))


@_rule(Rule.BoxR)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(x, White(Fml(a)))], _t(x, Box(a))


@_rule(Rule.BBoxL)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(a, x)], _t(BBox(a), Black(x))


@_rule(Rule.BBoxR)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(x, Black(Fml(a)))], _t(x, BBox(a))


@_rule(Rule.DiaL)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(White(Fml(a)), x)], _t(Dia(a), x)


@_rule(Rule.DiaR)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(x, a)], _t(White(x), Dia(a))


@_rule(Rule.BDiaL)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(Black(Fml(a)), x)], _t(BDia(a), x)


@_rule(Rule.BDiaR)
def _(w):
    a, x = _f(w, "A"), _s(w, "X")
    return [_t(x, a)], _t(Black(x), BDia(a))


@_rule(Rule.BulletTriR)
def _(w):
    x, y, z = _s(w, "X"), _s(w, "Y"), _s(w, "Z")
    return [_t(x, _t(Black(y), Black(z)))], _t(x, Black(_t(y, z)))


@_rule(Rule.CircTriR)
def _(w):
    x, y, z = _s(w, "X"), _s(w, "Y"), _s(w, "Z")
    return [_t(x, _t(White(y), White(z)))], _t(x, White(_t(y, z)))


@_rule(Rule.SLInv)
def _(w):
    x1, y1, x2, y2 = _s(w, "X1"), _s(w, "Y1"), _s(w, "X2"), _s(w, "Y2")
    return [_t(comma(x1, x2), comma(y1, y2))], _t(comma(_t(x1, y1), x2), y2)


@_rule(Rule.SRInv)
def _(w):
    x1, y1, x2, y2 = _s(w, "X1"), _s(w, "Y1"), _s(w, "X2"), _s(w, "Y2")
    return [_t(comma(x1, x2), comma(y1, y2))], _t(x1, comma(y1, _t(x2, y2)))


def arity(rule: Rule) -> int:
    return {Rule.Id: 0, Rule.BotL: 0, Rule.TopR: 0, Rule.Cut: 2, Rule.AndR: 2,
            Rule.OrL: 2, Rule.ImpL: 2, Rule.ExclR: 2}.get(rule, 1)


def schema(rule: Rule, witness: Mapping) -> tuple[list[Structure], Structure]:
    """Instantiate the schema of ``rule``: (premises, conclusion)."""
    prem, concl = _SCHEMAS[rule](witness)
    if rule in DOUBLE_LINE:
        d = witness.get("dir", "down")
        if d == "up":
            prem, concl = [concl], prem[0]
        elif d != "down":
            raise CheckError("witness", "witness", "dir must be 'down' or 'up'")
    return prem, concl


# ---------------------------------------------------------------------------
# rule sets

_FIG2 = frozenset(set(Rule) - {Rule.RpTriL, Rule.RpTriR, Rule.BulletTriR,
                               Rule.CircTriR, Rule.SLInv, Rule.SRInv})
_BASE = (_FIG2 - {Rule.Cut}) | {Rule.RpTriL, Rule.RpTriR}
_E = _BASE | {Rule.BulletTriR, Rule.CircTriR}
_CLASSICAL = _E | {Rule.SLInv, Rule.SRInv}


@dataclass(frozen=True)
class RuleSet:
    name: str
    enabled: frozenset

    def __contains__(self, rule: Rule) -> bool:
        return rule in self.enabled

    def with_cut(self) -> "RuleSet":
        return RuleSet(self.name + "+cut", self.enabled | {Rule.Cut})

    def without_cut(self) -> "RuleSet":
        return RuleSet(self.name.replace("+cut", ""), self.enabled - {Rule.Cut})


RULESETS = {
    "base": RuleSet("base", _BASE),
    "base+cut": RuleSet("base+cut", _BASE | {Rule.Cut}),
    "e": RuleSet("e", _E),
    "e+cut": RuleSet("e+cut", _E | {Rule.Cut}),
    "classical": RuleSet("classical", _CLASSICAL),
}


# ---------------------------------------------------------------------------
# proofs


@dataclass(frozen=True, eq=False)
class ShallowProof:
    rule: Rule
    conclusion: Structure
    premises: tuple["ShallowProof", ...] = ()
    witness: Mapping[str, Any] = field(default_factory=dict)

    @cached_property
    def height(self) -> int:
        """Number of sequents on the longest branch."""
        return _fold_proof(self, lambda n, sub: 1 + max(sub, default=0))

    @cached_property
    def cut_rank(self) -> int:
        def f(n, sub):
            own = n.witness["A"].size if n.rule is Rule.Cut else 0
            return max([own, *sub])
        return _fold_proof(self, f)

    @cached_property
    def node_count(self) -> int:
        return _fold_proof(self, lambda n, sub: 1 + sum(sub))

    def rules_used(self) -> set[Rule]:
        return {n.rule for n in self.nodes()}

    def nodes(self) -> Iterable["ShallowProof"]:
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(n.premises)


def _fold_proof(p: ShallowProof, f) -> Any:
    """Bottom-up fold without recursion; shared subproofs are visited once."""
    memo: dict[int, Any] = {}
    stack = [(p, False)]
    while stack:
        n, ready = stack.pop()
        if id(n) in memo:
            continue
        if ready:
            memo[id(n)] = f(n, [memo[id(c)] for c in n.premises])
        else:
            stack.append((n, True))
            stack.extend((c, False) for c in n.premises if id(c) not in memo)
    return memo[id(p)]


def check_instance(rule: Rule, conclusion: Structure, premises: Sequence[Structure],
                   witness: Mapping, node: str = "") -> None:
    """Raise ``CheckError`` unless the witness reproduces the step."""
    if len(premises) != arity(rule):
        raise CheckError(node or rule.value, "arity")
    try:
        prem, concl = schema(rule, witness)
    except CheckError as e:
        raise CheckError(node or rule.value, "witness", e.detail) from None
    if normalize(conclusion) != concl:
        raise CheckError(node or rule.value, "conclusion",
                         f"expected {print_structure(concl)}")
    for k, (got, want) in enumerate(zip(premises, prem)):
        if normalize(got) != want:
            raise CheckError(node or rule.value, f"premise {k}",
                             f"expected {print_structure(want)}")


def check_proof(p: ShallowProof, rules: RuleSet | None = None) -> list[CheckError]:
    """All failing nodes of ``p``; an empty list means the proof is valid.

    Node descriptions are paths of premise indices from the root.
    """
    errors: list[CheckError] = []
    stack: list[tuple[ShallowProof, str]] = [(p, "root")]
    while stack:
        n, where = stack.pop()
        label = f"{where}:{n.rule.value}"
        if rules is not None and n.rule not in rules:
            errors.append(CheckError(label, "rule", f"{n.rule.value} not in {rules.name}"))
        try:
            check_instance(n.rule, n.conclusion, [c.conclusion for c in n.premises],
                           n.witness, label)
        except CheckError as e:
            errors.append(e)
        for k, c in enumerate(n.premises):
            stack.append((c, f"{where}.{k}"))
    errors.sort(key=lambda e: e.node)
    return errors


def infer(rule: Rule, *premises: ShallowProof, **witness) -> ShallowProof:
    """Build a node from its premises, computing the conclusion from the schema."""
    prem, concl = schema(rule, witness)
    if len(premises) != len(prem):
        raise CheckError(rule.value, "arity")
    for k, (got, want) in enumerate(zip(premises, prem)):
        if got.conclusion != want:
            raise CheckError(rule.value, f"premise {k}",
                             f"have {print_structure(got.conclusion)}, "
                             f"need {print_structure(want)}")
    return ShallowProof(rule, concl, tuple(premises), dict(witness))


def axiom(rule: Rule, **witness) -> ShallowProof:
    return infer(rule, **witness)


def expand_derived(p: ShallowProof) -> ShallowProof:
    """Replace each derived turnstile-residuation step by its primitive rule."""
    memo: dict[int, ShallowProof] = {}

    def conv(n: ShallowProof) -> ShallowProof:
        if id(n) in memo:
            return memo[id(n)]
        subs = tuple(conv(c) for c in n.premises)
        w = n.witness
        if n.rule is Rule.RpTriR and w.get("dir", "down") == "down":
            out = infer(Rule.SR, *subs, X1=_s(w, "X1"), X2=_s(w, "X2"), Y2=_s(w, "Y"))
        elif n.rule is Rule.RpTriR:
            out = infer(Rule.TriR, *subs, X1=_s(w, "X1"), X2=_s(w, "X2"), Y2=_s(w, "Y"))
        elif n.rule is Rule.RpTriL and w.get("dir", "down") == "down":
            out = infer(Rule.SL, *subs, X1=_s(w, "X1"), Y1=_s(w, "X2"), Y2=_s(w, "Y"))
        elif n.rule is Rule.RpTriL:
            out = infer(Rule.TriL, *subs, X2=_s(w, "X1"), Y2=_s(w, "X2"), Y1=_s(w, "Y"))
        else:
            out = ShallowProof(n.rule, n.conclusion, subs, n.witness)
        memo[id(n)] = out
        return out

    return conv(p)


# ---------------------------------------------------------------------------
# json


def _wit_to_json(w: Mapping) -> dict:
    out = {}
    for k, v in w.items():
        if isinstance(v, Formula):
            out[k] = print_formula(v)
        elif isinstance(v, Structure):
            out[k] = print_structure(v)
        else:
            out[k] = v
    return out


def _wit_from_json(w: Mapping) -> dict:
    out: dict[str, Any] = {}
    for k, v in w.items():
        if k in FORMULA_VARS:
            out[k] = parse_formula(v)
        elif k in ("i", "dir"):
            out[k] = v
        else:
            out[k] = parse_structure(v)
    return out


def proof_to_json(p: ShallowProof) -> dict:
    return {
        "rule": p.rule.value,
        "conclusion": print_structure(p.conclusion),
        "witness": _wit_to_json(p.witness),
        "premises": [proof_to_json(c) for c in p.premises],
    }


class ProofFormatError(ValueError):
    pass


def proof_from_json(d: Mapping, where: str = "root") -> ShallowProof:
    if not isinstance(d, Mapping):
        raise ProofFormatError(f"{where}: expected a JSON object")
    try:
        rule = Rule(d["rule"])
    except (KeyError, ValueError):
        raise ProofFormatError(f"{where}: unknown rule {d.get('rule')!r}") from None
    try:
        concl = parse_structure(d["conclusion"])
        wit = _wit_from_json(d.get("witness", {}))
    except (SyntaxError, KeyError, ValueError, TypeError) as e:
        raise ProofFormatError(f"{where}: {e}") from None
    subs = d.get("premises", [])
    if not isinstance(subs, list):
        raise ProofFormatError(f"{where}: premises must be a list")
    prem = tuple(proof_from_json(c, f"{where}.{k}") for k, c in enumerate(subs))
    return ShallowProof(rule, concl, prem, wit)


def dump_proof(p: ShallowProof) -> str:
    return json.dumps(proof_to_json(p), indent=1, ensure_ascii=False)


def load_proof(text: str) -> ShallowProof:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProofFormatError(f"not JSON: {e}") from None
    return proof_from_json(doc)


# ---------------------------------------------------------------------------
# display fragments


@dataclass(frozen=True)
class Fragment:
    """A chain of invertible one-premise steps leading from ``top`` to ``bottom``."""

    top: Structure
    bottom: Structure
    steps: tuple[tuple[Rule, Mapping], ...] = ()

    def apply(self, proof: ShallowProof) -> ShallowProof:
        """Extend a proof of ``top`` into a proof of ``bottom``."""
        if proof.conclusion != self.top:
            raise CheckError("fragment", "top", f"have {proof.conclusion}, need {self.top}")
        for rule, w in self.steps:
            proof = infer(rule, proof, **w)
        return proof

    def inverse(self) -> "Fragment":
        steps = []
        for rule, w in reversed(self.steps):
            w2 = dict(w)
            w2["dir"] = "up" if w.get("dir", "down") == "down" else "down"
            steps.append((rule, w2))
        return Fragment(self.bottom, self.top, tuple(steps))

    def then(self, other: "Fragment") -> "Fragment":
        if self.bottom != other.top:
            raise CheckError("fragment", "join")
        return Fragment(self.top, other.bottom, self.steps + other.steps)

    def instantiate(self, filler: Structure) -> "Fragment":
        """Substitute ``filler`` for the hole marker throughout."""
        steps = tuple(
            (r, {k: (plug(v, filler) if isinstance(v, Structure) else v) for k, v in w.items()})
            for r, w in self.steps
        )
        return Fragment(plug(self.top, filler), plug(self.bottom, filler), steps)

    def check(self) -> list[str]:
        errs, cur = [], self.top
        for k, (rule, w) in enumerate(self.steps):
            prem, concl = schema(rule, w)
            if prem != [cur]:
                errs.append(f"step {k}: premise mismatch")
            cur = concl
        if cur != self.bottom:
            errs.append("final sequent mismatch")
        return errs

    def __len__(self) -> int:
        return len(self.steps)


def _minus(side: Sequence[Structure], take: Sequence[Structure]) -> list[Structure]:
    rest = list(side)
    for t in take:
        rest.remove(t)
    return rest


def display(seq: Structure, path: HolePath, target: Sequence[Structure] | None = None,
            isolate: bool = True) -> tuple[Fragment, Structure, Polarity]:
    """Bring part of a slot to one side of the top-level turnstile.

    ``path`` addresses a slot inside the sequent ``seq`` (its first step
    enters a side of the root turnstile).  ``target`` is a sub-multiset of
    that slot's items and defaults to the whole slot.  Returns a fragment
    whose top is ``T ▷ W`` (negative slot) or ``W ▷ T`` (positive slot), where
    ``T`` is the target, and whose bottom is ``seq``; also returns ``W`` and
    the polarity.  Only residuation steps are used.

    With ``isolate=False`` the last separation step is skipped: the top then
    holds the whole slot together with whatever residue shares its side.
    """
    seq = normalize(seq)
    if not isinstance(seq, Turnstile) or not path.steps or path.steps[0].index != 0:
        raise InvalidPath("display needs a slot inside the root turnstile")
    slot = list(slot_items(seq, path))
    tgt = list(slot if target is None else target)
    up: list[tuple[Rule, dict]] = []   # steps from seq upwards
    ante, succ = list(items(seq.ante)), list(items(seq.succ))
    side = path.steps[0].kind
    cur_slot = items(seq.ante if side == "ante" else seq.succ)
    for depth, st in enumerate(path.steps[1:] + (None,)):
        here = ante if side == "ante" else succ
        other = succ if side == "ante" else ante
        focus = tgt if st is None else [cur_slot[st.index]]
        rest = _minus(here, focus)
        if st is None and not isolate:
            break
        if rest:
            if side == "ante":
                up.append((Rule.RpTriR, dict(X1=comma(*focus), X2=comma(*rest), Y=comma(*other))))
                other = [_t(comma(*rest), comma(*other))]
            else:
                up.append((Rule.RpTriL, dict(X1=comma(*other), X2=comma(*rest), Y=comma(*focus))))
                other = [_t(comma(*other), comma(*rest))]
        if side == "ante":
            ante, succ = focus, other
        else:
            ante, succ = other, focus
        if st is None:
            break
        node = focus[0]
        w = comma(*other)
        if side == "ante":
            if isinstance(node, Turnstile):
                up.append((Rule.RpTriL, dict(X1=node.ante, X2=node.succ, Y=w, dir="up")))
                ante, succ = list(items(node.ante)), list(items(node.succ)) + list(items(w))
                side = st.kind
                cur_slot = items(node.ante if st.kind == "ante" else node.succ)
            elif isinstance(node, White):
                up.append((Rule.RpBullet, dict(X=node.inner, Y=w, dir="up")))
                ante, succ = list(items(node.inner)), [Black(w)]
                cur_slot = items(node.inner)
            else:
                up.append((Rule.RpCirc, dict(X=node.inner, Y=w, dir="up")))
                ante, succ = list(items(node.inner)), [White(w)]
                cur_slot = items(node.inner)
        else:
            if isinstance(node, Turnstile):
                up.append((Rule.RpTriR, dict(X1=w, X2=node.ante, Y=node.succ, dir="up")))
                ante, succ = list(items(w)) + list(items(node.ante)), list(items(node.succ))
                side = st.kind
                cur_slot = items(node.ante if st.kind == "ante" else node.succ)
            elif isinstance(node, White):
                up.append((Rule.RpCirc, dict(X=w, Y=node.inner)))
                ante, succ = [Black(w)], list(items(node.inner))
                cur_slot = items(node.inner)
            else:
                up.append((Rule.RpBullet, dict(X=w, Y=node.inner)))
                ante, succ = [White(w)], list(items(node.inner))
                cur_slot = items(node.inner)
    pol = Polarity.NEGATIVE if side == "ante" else Polarity.POSITIVE
    w = comma(*(succ if side == "ante" else ante))
    if not isolate:
        top = _t(comma(*ante), comma(*succ))
    elif side == "ante":
        top = _t(comma(*tgt), w)
    else:
        top = _t(w, comma(*tgt))
    # steps were collected from seq upwards, each oriented premise-above
    frag = Fragment(top, seq, tuple(reversed(up)))
    assert not frag.check(), frag.check()
    return frag, w, pol


def _context_sequent(x: Structure, ctx: Structure, ctx_right: bool) -> tuple[Structure, HolePath]:
    from .syntax import find_hole
    seq = _t(x, ctx) if ctx_right else _t(ctx, x)
    return seq, find_hole(seq)


def _display_variant(x: Structure, ctx: Structure, ctx_right: bool, want: Polarity) -> Fragment:
    from .syntax import find_hole
    ctx = normalize(ctx)
    cpol = find_hole(ctx).polarity if not isinstance(ctx, Hole) else Polarity.NEUTRAL
    if cpol is not want:
        raise PolarityMismatch(f"context is {cpol.value}, expected {want.value}")
    seq, path = _context_sequent(x, ctx, ctx_right)
    frag, _, _ = display(seq, path, [HOLE])
    return frag.inverse()


def display_neutral(x: Structure, ctx: Structure, ctx_right: bool = True) -> Fragment:
    """Residuation chain from ``X ▷ Σ[[]]`` (or ``Σ[[]] ▷ X``) to the displayed hole.

    The hole marker stands for an arbitrary filler; use
    ``Fragment.instantiate`` to substitute it.  The fragment runs downward
    from the original sequent to the displayed one; ``inverse`` reverses it.
    """
    return _display_variant(x, ctx, ctx_right, Polarity.NEUTRAL)


def display_positive(x: Structure, ctx: Structure, ctx_right: bool = True) -> Fragment:
    return _display_variant(x, ctx, ctx_right, Polarity.POSITIVE)


def display_negative(x: Structure, ctx: Structure, ctx_right: bool = True) -> Fragment:
    return _display_variant(x, ctx, ctx_right, Polarity.NEGATIVE)
