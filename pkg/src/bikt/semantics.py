"""Finite Kripke models: frame conditions, repair, forcing and falsification.

Worlds are ``0 .. n-1``.  Internally every relation is a tuple of successor
bitmasks, so truth sets of formulas are computed with integer bit operations.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .syntax import (
    And, Atom, BBox, BDia, Bot, Box, Dia, Excl, Formula, Imp, Or, Structure,
    Top, Turnstile, formula_atoms, subformulas, tau,
)

__all__ = [
    "KripkeModel", "Violation", "validate", "forces", "truth_set", "valid_in",
    "random_model", "repair", "countermodel_search", "NotFound", "Countermodel",
    "model_to_json", "model_from_json", "ModelFileError", "lemma_countermodel",
]

Pair = tuple[int, int]


def _masks(n: int, pairs: Iterable[Pair]) -> list[int]:
    out = [0] * n
    for i, j in pairs:
        out[i] |= 1 << j
    return out


def _pairs(masks: Sequence[int]) -> frozenset[Pair]:
    return frozenset((i, j) for i, m in enumerate(masks) for j in range(len(masks)) if m >> j & 1)


def _inverse(masks: Sequence[int]) -> list[int]:
    n = len(masks)
    out = [0] * n
    for i, m in enumerate(masks):
        for j in range(n):
            if m >> j & 1:
                out[j] |= 1 << i
    return out


def _closure(n: int, masks: list[int]) -> list[int]:
    """Reflexive-transitive closure (Warshall on bitmasks)."""
    m = [masks[i] | 1 << i for i in range(n)]
    for k in range(n):
        bit = 1 << k
        for i in range(n):
            if m[i] & bit:
                m[i] |= m[k]
    return m


@dataclass(frozen=True)
class KripkeModel:
    """A finite model; ``le`` is stored closed under reflexivity and transitivity."""

    n_worlds: int
    le: frozenset[Pair]
    r_dia: frozenset[Pair]
    r_box: frozenset[Pair]
    valuation: tuple[tuple[str, frozenset[int]], ...] = ()

    @classmethod
    def build(cls, n: int, le: Iterable[Pair] = (), r_dia: Iterable[Pair] = (),
              r_box: Iterable[Pair] = (), valuation: Mapping[str, Iterable[int]] | None = None
              ) -> "KripkeModel":
        """Close ``le`` and normalize the valuation; no other repair is done."""
        le_m = _closure(n, _masks(n, le))
        val = tuple(sorted((k, frozenset(v)) for k, v in (valuation or {}).items()))
        return cls(n, _pairs(le_m), frozenset(r_dia), frozenset(r_box), val)

    @cached_property
    def val(self) -> dict[str, frozenset[int]]:
        return dict(self.valuation)

    @cached_property
    def _up(self) -> list[int]:
        return _masks(self.n_worlds, self.le)

    @cached_property
    def _down(self) -> list[int]:
        return _inverse(self._up)

    @cached_property
    def _dia(self) -> list[int]:
        return _masks(self.n_worlds, self.r_dia)

    @cached_property
    def _box(self) -> list[int]:
        return _masks(self.n_worlds, self.r_box)

    @cached_property
    def _box_reach(self) -> list[int]:
        # worlds v with w <= z and z R_box v
        return [_union(self._box, self._up[w]) for w in range(self.n_worlds)]

    @cached_property
    def _bbox_reach(self) -> list[int]:
        # worlds v with w <= z and v R_dia z
        inv = _inverse(self._dia)
        return [_union(inv, self._up[w]) for w in range(self.n_worlds)]

    @cached_property
    def _box_inv(self) -> list[int]:
        return _inverse(self._box)

    def _atom_mask(self, name: str) -> int:
        m = 0
        for w in self.val.get(name, ()):
            m |= 1 << w
        return m

    def with_relations(self, r_dia=None, r_box=None) -> "KripkeModel":
        return KripkeModel(self.n_worlds, self.le,
                           self.r_dia if r_dia is None else frozenset(r_dia),
                           self.r_box if r_box is None else frozenset(r_box),
                           self.valuation)


def _union(masks: Sequence[int], sel: int) -> int:
    out, j = 0, 0
    while sel:
        if sel & 1:
            out |= masks[j]
        sel >>= 1
        j += 1
    return out


# ---------------------------------------------------------------------------
# frame conditions


@dataclass(frozen=True)
class Violation:
    kind: str
    worlds: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind} at {self.worlds}"


def validate(m: KripkeModel) -> list[Violation]:
    """Every violated instance of the frame and persistence conditions."""
    n, out = m.n_worlds, []
    le = m.le
    for x in range(n):
        if (x, x) not in le:
            out.append(Violation("le-reflexive", (x,)))
    for x, y, z in itertools.product(range(n), repeat=3):
        if (x, y) in le and (y, z) in le and (x, z) not in le:
            out.append(Violation("le-transitive", (x, y, z)))
    for x, y, z in itertools.product(range(n), repeat=3):
        # x <= y and x R_dia z need some w with y R_dia w and z <= w
        if (x, y) in le and (x, z) in m.r_dia:
            if not any((y, w) in m.r_dia and (z, w) in le for w in range(n)):
                out.append(Violation("F1-dia", (x, y, z)))
        # x R_box y and y <= z need some w with x <= w and w R_box z
        if (x, y) in m.r_box and (y, z) in le:
            if not any((x, w) in le and (w, z) in m.r_box for w in range(n)):
                out.append(Violation("F2-box", (x, y, z)))
    for p, ws in m.valuation:
        for w in ws:
            if not 0 <= w < n:
                out.append(Violation(f"valuation-range:{p}", (w,)))
            for v in range(n):
                if (w, v) in le and v not in ws:
                    out.append(Violation(f"persistence:{p}", (w, v)))
    for i, j in itertools.chain(m.r_dia, m.r_box, le):
        if not (0 <= i < n and 0 <= j < n):
            out.append(Violation("relation-range", (i, j)))
    return out


def _repair_masks(up: list[int], dia: list[int], box: list[int], e_mode: bool,
                  frame: frozenset[str]) -> tuple[list[int], list[int]]:
    n = len(up)
    down = _inverse(up)
    while True:
        old = (tuple(dia), tuple(box))
        if e_mode:
            dia = box = [a | b for a, b in zip(dia, box)]
        if "T" in frame:
            dia = [dia[i] | 1 << i for i in range(n)]
            box = [box[i] | 1 << i for i in range(n)]
        if "4" in frame:
            dia, box = _transitive(dia), _transitive(box)
        if "B" in frame:
            dia, box = [a | b for a, b in zip(dia, _inverse(box))], [a | b for a, b in zip(box, _inverse(dia))]
        # F1: x <= y and x R z  =>  y R z
        dia = [dia[y] | _union(dia, down[y]) for y in range(n)]
        # F2: x R y and y <= z  =>  x R z
        box = [box[x] | _union(up, box[x]) for x in range(n)]
        if (tuple(dia), tuple(box)) == old:
            return dia, box


def _transitive(masks: list[int]) -> list[int]:
    m = list(masks)
    n = len(m)
    for k in range(n):
        for i in range(n):
            if m[i] >> k & 1:
                m[i] |= m[k]
    return m


def repair(m: KripkeModel, e_mode: bool = False, frame: Iterable[str] = ()) -> KripkeModel:
    """Add modal edges until the frame conditions (and optional frame class) hold."""
    dia, box = _repair_masks(list(m._up), list(m._dia), list(m._box), e_mode, frozenset(frame))
    return m.with_relations(_pairs(dia), _pairs(box))


# ---------------------------------------------------------------------------
# forcing


def truth_set(m: KripkeModel, a: Formula) -> int:
    """Bitmask of the worlds forcing ``a``."""
    n = m.n_worlds
    full = (1 << n) - 1
    memo: dict[Formula, int] = {}

    def go(f: Formula) -> int:
        if f in memo:
            return memo[f]
        if isinstance(f, Atom):
            r = m._atom_mask(f.name)
        elif isinstance(f, Top):
            r = full
        elif isinstance(f, Bot):
            r = 0
        elif isinstance(f, And):
            r = go(f.l) & go(f.r)
        elif isinstance(f, Or):
            r = go(f.l) | go(f.r)
        elif isinstance(f, Imp):
            bad = go(f.l) & ~go(f.r)
            r = _select(n, lambda w: not m._up[w] & bad)
        elif isinstance(f, Excl):
            good = go(f.l) & ~go(f.r)
            r = _select(n, lambda w: bool(m._down[w] & good))
        elif isinstance(f, Dia):
            a_ = go(f.a)
            r = _select(n, lambda w: bool(m._dia[w] & a_))
        elif isinstance(f, Box):
            bad = full & ~go(f.a)
            r = _select(n, lambda w: not m._box_reach[w] & bad)
        elif isinstance(f, BDia):
            a_ = go(f.a)
            r = _select(n, lambda w: bool(m._box_inv[w] & a_))
        elif isinstance(f, BBox):
            bad = full & ~go(f.a)
            r = _select(n, lambda w: not m._bbox_reach[w] & bad)
        else:
            raise TypeError(f"unknown formula {f!r}")
        memo[f] = r
        return r

    return go(a)


def _select(n: int, pred) -> int:
    out = 0
    for w in range(n):
        if pred(w):
            out |= 1 << w
    return out


def forces(m: KripkeModel, w: int, a: Formula) -> bool:
    return bool(truth_set(m, a) >> w & 1)


def _goal_formula(goal: Formula | Structure) -> Formula:
    if isinstance(goal, Turnstile):
        return tau(goal)
    if isinstance(goal, Formula):
        return goal
    raise TypeError("goal must be a formula or a sequent")


def valid_in(m: KripkeModel, goal: Formula | Structure) -> bool:
    return truth_set(m, _goal_formula(goal)) == (1 << m.n_worlds) - 1


# ---------------------------------------------------------------------------
# generation


DEFAULT_ATOMS = ("p", "q", "r", "s")


def _up_closed(up: Sequence[int], s: int) -> int:
    return _union(up, s)


def random_model(n: int, seed: int, e_mode: bool = False, atoms: Sequence[str] = DEFAULT_ATOMS,
                 classical: bool = False, frame: Iterable[str] = ()) -> KripkeModel:
    """Deterministic random model satisfying every frame condition.

    ``classical`` makes the order discrete and the two modal relations equal;
    ``frame`` adds any of ``T``, ``4``, ``B`` (reflexive, transitive, and
    each relation converse to the other).
    """
    if n < 1:
        raise ValueError("need at least one world")
    rng = random.Random(f"{n}:{seed}:{int(e_mode)}:{int(classical)}")
    p_le, p_rel = rng.choice((0.15, 0.3, 0.5)), rng.choice((0.1, 0.2, 0.35))
    le = [] if classical else [(i, j) for i in range(n) for j in range(n)
                               if i != j and rng.random() < p_le / 2]
    up = _closure(n, _masks(n, le))
    dia = _masks(n, [(i, j) for i in range(n) for j in range(n) if rng.random() < p_rel])
    box = _masks(n, [(i, j) for i in range(n) for j in range(n) if rng.random() < p_rel])
    dia, box = _repair_masks(up, dia, box, e_mode or classical, frozenset(frame))
    val = {}
    for a in atoms:
        seed_set = sum(1 << w for w in range(n) if rng.random() < 0.4)
        val[a] = [w for w in range(n) if _up_closed(up, seed_set) >> w & 1]
    return KripkeModel.build(n, _pairs(up), _pairs(dia), _pairs(box), val)


def model_suite(count: int, max_worlds: int = 6, seed: int = 0, **kw) -> list[KripkeModel]:
    """``count`` random models with 1..max_worlds worlds, fixed by ``seed``."""
    return [random_model(1 + (k % max_worlds), seed * 100003 + k, **kw) for k in range(count)]


# ---------------------------------------------------------------------------
# countermodels


@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    world: int


@dataclass(frozen=True)
class NotFound:
    tried: int


def _preorders(n: int) -> list[list[int]]:
    out = []
    offd = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in range(1 << len(offd)):
        m = _masks(n, [e for k, e in enumerate(offd) if bits >> k & 1])
        m = [m[i] | 1 << i for i in range(n)]
        if _closure(n, m) == m:
            out.append(m)
    return out


def _up_sets(up: Sequence[int]) -> list[int]:
    n = len(up)
    return [s for s in range(1 << n) if _up_closed(up, s) == s]


def countermodel_search(goal: Formula, max_worlds: int = 4, e_mode: bool = False,
                        budget: int = 20000, seed: int = 0, classical: bool = False,
                        frame: Iterable[str] = ()) -> Countermodel | NotFound:
    """Find a model and world refuting ``goal``.

    Models with at most three worlds are enumerated exhaustively (relations
    in order of increasing size, each repaired) until the budget of
    evaluated models runs out; larger sizes are sampled at random.
    """
    if max_worlds < 1:
        raise ValueError("max_worlds must be positive")
    goal = _goal_formula(goal)
    frame = frozenset(frame)
    names = sorted(formula_atoms(goal))
    modal = any(isinstance(g, (Box, Dia, BBox, BDia)) for g in subformulas(goal))
    tried = 0

    def attempt(n, up, dia, box, vals) -> Countermodel | None:
        nonlocal tried
        tried += 1
        m = KripkeModel.build(
            n, _pairs(up), _pairs(dia), _pairs(box),
            {a: [w for w in range(n) if v >> w & 1] for a, v in zip(names, vals)})
        t = truth_set(m, goal)
        if t != (1 << n) - 1:
            w = min(w for w in range(n) if not t >> w & 1)
            return Countermodel(m, w)
        return None

    for n in range(1, min(3, max_worlds) + 1):
        orders = [[1 << i for i in range(n)]] if classical else _preorders(n)
        rel = sorted(range(1 << (n * n)), key=lambda b: (bin(b).count("1"), b))
        pairs = [(0, 0)] if not modal else sorted(
            itertools.product(rel, rel),
            key=lambda t: (bin(t[0]).count("1") + bin(t[1]).count("1"), t))
        ups_of = [_up_sets(up) for up in orders]
        seen = set()
        for db, bb in pairs:
            if tried >= budget:
                break
            for up, ups in zip(orders, ups_of):
                if tried >= budget:
                    break
                dia = [(db >> (i * n)) & ((1 << n) - 1) for i in range(n)]
                box = [(bb >> (i * n)) & ((1 << n) - 1) for i in range(n)]
                dia, box = _repair_masks(up, dia, box, e_mode or classical, frame)
                key = (tuple(up), tuple(dia), tuple(box))
                if key in seen:
                    continue
                seen.add(key)
                for vals in itertools.product(ups, repeat=len(names)):
                    if tried >= budget:
                        break
                    hit = attempt(n, up, dia, box, vals)
                    if hit:
                        return hit
    rng = random.Random(seed)
    n = 4
    while tried < budget and max_worlds > 3:
        m = random_model(n, rng.randrange(1 << 30), e_mode, names or ("p",), classical, frame)
        up = m._up
        hit = attempt(n, up, m._dia, m._box,
                      [m._atom_mask(a) for a in names])
        if hit:
            return hit
        n = 4 + (n - 3) % (max_worlds - 3)
    return NotFound(tried)


# ---------------------------------------------------------------------------
# files


class ModelFileError(ValueError):
    pass


def model_to_json(m: KripkeModel) -> str:
    """Canonical JSON: sorted pairs; the order is listed without reflexive pairs."""
    d = {
        "worlds": m.n_worlds,
        "le": sorted([i, j] for i, j in m.le if i != j),
        "r_dia": sorted([i, j] for i, j in m.r_dia),
        "r_box": sorted([i, j] for i, j in m.r_box),
        "val": {k: sorted(v) for k, v in m.valuation},
    }
    return json.dumps(d, sort_keys=True)


def model_from_json(text: str) -> KripkeModel:
    """Load a model; the order is closed, but nothing else is repaired."""
    try:
        d = json.loads(text)
        n = int(d["worlds"])
        m = KripkeModel.build(n, [tuple(e) for e in d.get("le", [])],
                              [tuple(e) for e in d.get("r_dia", [])],
                              [tuple(e) for e in d.get("r_box", [])],
                              d.get("val", {}))
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFileError(f"malformed model file: {e}") from None
    bad = validate(m)
    if bad:
        fixed = repair(m)
        extra = sorted((fixed.r_dia - m.r_dia) | (fixed.r_box - m.r_box))
        raise ModelFileError("model violates frame conditions: "
                             + "; ".join(map(str, bad[:5]))
                             + (f"; repair would add {extra}" if extra else ""))
    return m


WORLD_NAMES = ("u", "w", "x", "y", "z")


def lemma_countermodel() -> KripkeModel:
    """Five worlds refuting ``(dia p -> box q) -> box (p -> q)`` at world ``u`` (index 0)."""
    u, w, x, y, z = range(5)
    return KripkeModel.build(5, [(u, x), (x, w), (y, z)], [], [(x, y), (w, z)], {"p": [z], "q": []})
