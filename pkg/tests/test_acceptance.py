"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -q`` to see the summary lines; they
are printed with output capture disabled so they appear in every run.
"""

import random
import time

import pytest
from conftest import corpus_runs

from bikt import fixtures
from bikt.cli import run_entry, shipped_corpus
from bikt.cutelim import JOIN_KINDS, eliminate_cuts, is_cut_free, join_by_cut
from bikt.deep import (
    Calculus, DeepRule, Logic, Proved, SearchConfig, compile_to_shallow, prove, shallow_ruleset,
)
from bikt.semantics import (
    Countermodel, countermodel_search, forces, lemma_countermodel, model_from_json,
    model_to_json, random_model, validate,
)
from bikt.shallow import RULESETS, check_proof
from bikt.syntax import And, Black, Bot, Excl, Imp, Or, parse_formula, subformulas

LIMIT = 5.0


@pytest.fixture
def criterion(capsys):
    """Collects named checks, prints the verdict line and fails on any miss."""
    state = {}

    def report(number, title, checks):
        elapsed = time.perf_counter() - state["start"]
        failed = [name for name, ok in checks if not ok]
        if elapsed >= LIMIT:
            failed.append(f"took {elapsed:.2f}s")
        verdict = "PASS" if not failed else "FAIL"
        line = f"criterion {number:2d}: {verdict}  {title} ({len(checks)} checks, {elapsed:.2f}s)"
        if failed:
            line += "  failed: " + "; ".join(failed)
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line

    state["start"] = time.perf_counter()
    return report


def _proved(text, logic="bikt", axioms=()):
    return isinstance(prove(text, SearchConfig(logic, frozenset(axioms))), Proved)


def test_criterion_01_fixture_derivations(criterion):
    checks = []
    for name, (build, rules) in fixtures.FIXTURES.items():
        checks.append((f"{name} under {rules}", check_proof(build(), RULESETS[rules]) == []))
    criterion(1, "hand-written derivations pass the kernel", checks)


def test_criterion_02_base_provability(criterion):
    cfg = SearchConfig()
    out = prove("p -> box bdia p", cfg)
    checks = [("proved", isinstance(out, Proved))]
    if isinstance(out, Proved):
        shallow = compile_to_shallow(out.proof, cfg)
        checks.append(("compiled proof checks", check_proof(shallow, RULESETS["base"]) == []))
    criterion(2, "tense unit proved and compiled", checks)


IKT_THEOREMS = [
    "box (p -> q) -> dia p -> dia q",
    "box (p -> false) -> dia p -> false",
    "(dia p -> box q) -> box (p -> q)",
    "bdia (p -> q) -> bbox p -> bdia q",
]


def test_criterion_03_equal_relation_logics(criterion):
    checks = [(f"ikt {f}", _proved(f, "ikt")) for f in IKT_THEOREMS]
    checks += [(f"ik {f}", _proved(f, "ik")) for f in IKT_THEOREMS[:3]]
    criterion(3, "equal-relation theorems", checks)


def test_criterion_04_independence(criterion):
    text = "(dia p -> box q) -> box (p -> q)"
    goal = parse_formula(text)
    found = countermodel_search(goal, max_worlds=5)
    shipped = lemma_countermodel()
    checks = [
        ("not proved in bikt", not _proved(text)),
        ("countermodel within 5 worlds",
         isinstance(found, Countermodel) and found.model.n_worlds <= 5
         and not forces(found.model, found.world, goal)),
        ("shipped model validates", validate(shipped) == []),
        ("shipped model refutes at world 0", not forces(shipped, 0, goal)),
    ]
    criterion(4, "no link between the white modalities", checks)


def test_criterion_05_frame_extensions(criterion):
    cases = [("T", "box p -> p"), ("T", "p -> dia p"), ("4", "box p -> box box p"),
             ("4", "dia dia p -> dia p"), ("B", "dia box p -> p")]
    checks = [(f"+{flag} {f}", _proved(f, axioms={flag})) for flag, f in cases]
    criterion(5, "reflexive, transitive and symmetric extensions", checks)


def test_criterion_06_classical_collapse(criterion):
    em, dc = "p | (p -> false)", "p & (true -< p) -> false"
    found = countermodel_search(parse_formula(em), max_worlds=2)
    checks = [
        ("kt proves excluded middle", _proved(em, "kt")),
        ("kt proves dual contradiction", _proved(dc, "kt")),
        ("bikt misses excluded middle", not _proved(em)),
        ("bikt misses dual contradiction", not _proved(dc)),
        ("two-world countermodel", isinstance(found, Countermodel) and found.model.n_worlds == 2),
    ]
    criterion(6, "classical collapse", checks)


def _pool():
    """Closed proofs ``▷ F`` with the rule set they live in."""
    pool = [(fixtures.tense_unit(), "base")]
    for entry, cfg, out in corpus_runs():
        if (isinstance(out, Proved) and cfg.logic is Logic.BIKT and not cfg.extra_axioms
                and out.proof.size <= 12):
            pool.append((compile_to_shallow(out.proof, cfg), "base"))
    for name in ("white_distribution", "white_nullary", "white_link", "black_link"):
        pool.append((fixtures.FIXTURES[name][0](), "e"))
    return pool


def test_criterion_07_cut_elimination(criterion):
    pool = _pool()
    checks = []
    kinds = set()
    for k in range(50):
        rng = random.Random(k)
        (p, rp), (q, rq) = rng.choice(pool), rng.choice(pool)
        kind = JOIN_KINDS[k % len(JOIN_KINDS)]
        rules = RULESETS["e" if "e" in (rp, rq) else "base"]
        composite = join_by_cut(p, q, kind, atom=parse_formula(rng.choice("pq")),
                                noise=rng.random() < 0.5)
        out = eliminate_cuts(composite, rules)
        ok = (not is_cut_free(composite) and is_cut_free(out)
              and check_proof(out, rules) == []
              and out.conclusion == composite.conclusion
              and eliminate_cuts(out, rules) == out)
        checks.append((f"composite {k} ({kind})", ok))
        kinds.add(kind)
    checks.append(("every cut kind exercised", kinds == set(JOIN_KINDS)))
    criterion(7, "cut elimination on seeded composites", checks)


def test_criterion_08_soundness(criterion):
    checks = []
    for entry, cfg, out in corpus_runs():
        if isinstance(out, Proved):
            res = run_entry(entry, soundness_models=200, world_max=6, seed=0)
            checks.append((f"line {entry.line}", res.ok))
    criterion(8, "proved corpus formulas hold in 200 random models", checks)


def _disjunctions():
    for entry, cfg, out in corpus_runs():
        goal = parse_formula(entry.formula)
        if (isinstance(out, Proved) and isinstance(goal, Or) and not cfg.classical
                and not any(isinstance(g, Excl) for g in subformulas(goal))):
            yield cfg, goal


def _counter_theorems():
    for entry, cfg, out in corpus_runs():
        goal = parse_formula(entry.formula)
        if (isinstance(out, Proved) and not cfg.classical and isinstance(goal, Imp)
                and isinstance(goal.r, Bot) and isinstance(goal.l, And)
                and not any(isinstance(g, Imp) for g in subformulas(goal.l))):
            yield cfg, goal.l


def test_criterion_09_disjunction_property(criterion):
    checks = []
    for cfg, goal in _disjunctions():
        ok = any(isinstance(prove(d, cfg), Proved) for d in (goal.l, goal.r))
        checks.append((f"disjunct of {goal}", ok))
    count = len(checks)
    checks.append(("at least five disjunctions", count >= 5))
    duals = 0
    for cfg, conj in _counter_theorems():
        ok = any(isinstance(prove(Imp(c, Bot()), cfg), Proved) for c in (conj.l, conj.r))
        checks.append((f"refuted conjunct of {conj}", ok))
        duals += 1
    checks.append(("dual cases present", duals >= 1))
    criterion(9, "disjunction property and its dual", checks)


DINT_RULES = {DeepRule.Id, DeepRule.BotL, DeepRule.TopR, DeepRule.TriL1, DeepRule.TriR1,
              DeepRule.TriL2, DeepRule.TriR2, DeepRule.OrL, DeepRule.OrR, DeepRule.AndL,
              DeepRule.AndR, DeepRule.ImpL, DeepRule.ImpR, DeepRule.ImpR1, DeepRule.ExclL,
              DeepRule.ExclR, DeepRule.ExclL1}
DARK_RULES = {DeepRule.BBoxL1, DeepRule.BDiaR1, DeepRule.BBoxL2, DeepRule.BDiaR2,
              DeepRule.BDiaL, DeepRule.BBoxR, DeepRule.ExclL, DeepRule.ExclR, DeepRule.ExclL1}


def _has_black(s):
    if isinstance(s, Black):
        return True
    kids = getattr(s, "children", None) or [getattr(s, a) for a in ("ante", "succ", "inner")
                                            if hasattr(s, a)]
    return any(_has_black(k) for k in kids)


def test_criterion_10_conservativity(criterion):
    checks = []
    ints = intks = 0
    for entry, cfg, out in corpus_runs():
        if entry.note.startswith("int "):
            ints += 1
            checks.append((f"int line {entry.line}",
                           isinstance(out, Proved) and out.proof.rules_used() <= DINT_RULES))
        elif entry.note.startswith("intk "):
            intks += 1
            checks.append((f"intk line {entry.line}",
                           isinstance(out, Proved) and not out.proof.rules_used() & DARK_RULES
                           and not any(_has_black(s) for s in out.proof.structures())))
    checks += [("fifteen int entries", ints == 15), ("ten intk entries", intks == 10)]
    peirce = "((p -> q) -> p) -> p"
    found = countermodel_search(parse_formula(peirce), max_worlds=3)
    checks += [("peirce not proved", not _proved(peirce)),
               ("peirce refuted within 3 worlds",
                isinstance(found, Countermodel) and found.model.n_worlds <= 3)]
    criterion(10, "conservativity over the intuitionistic fragments", checks)


def test_criterion_11_models(criterion):
    bad_validate = bad_trip = 0
    for k in range(500):
        rng = random.Random(k)
        frame = [f for f in ("T", "4", "B") if rng.random() < 0.2]
        m = random_model(rng.randint(1, 6), seed=k, e_mode=rng.random() < 0.3,
                         classical=rng.random() < 0.1, frame=frame)
        bad_validate += validate(m) != []
        text = model_to_json(m)
        back = model_from_json(text)
        bad_trip += back != m or model_to_json(back) != text
    checks = [("500 models validate", bad_validate == 0),
              ("JSON round trips exactly", bad_trip == 0)]
    criterion(11, "random models and their JSON form", checks)


def test_criterion_12_raw_calculus_agrees(criterion):
    checks = []
    for entry, cfg, out in corpus_runs():
        if isinstance(out, Proved):
            raw = prove(entry.formula, cfg.with_calculus(Calculus.RAW).scaled(4))
            checks.append((f"line {entry.line}", isinstance(raw, Proved)))
    criterion(12, "raw calculus proves what the refined search proves", checks)


def test_acceptance_covers_the_shipped_corpus():
    assert len(corpus_runs()) == len(shipped_corpus())
