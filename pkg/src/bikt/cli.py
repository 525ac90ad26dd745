"""Command-line front end.

Subcommands: ``prove``, ``check``, ``falsify`` and ``corpus``.  Exit codes
follow one contract throughout: 0 for success, 1 for a definite negative
answer (not provable, invalid proof, no countermodel, failed expectation),
2 when a search bound ran out, 3 for usage errors.  Every command accepts
``--json`` for a machine-readable report carrying the same fields as the
human one.  Reports never contain timings, so repeated runs are
byte-identical.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import click

from . import cutelim, deep, semantics, shallow
from .syntax import ParseError, formula_atoms, parse_formula, print_formula

EXIT_OK, EXIT_NO, EXIT_BOUND, EXIT_USAGE = 0, 1, 2, 3
EXIT_INTERNAL = 4

LOGICS = [lg.value for lg in deep.Logic]
CALCULI = [c.value for c in deep.Calculus]
DEFAULT_LOGIC_ENV = "BIKT_DEFAULT_LOGIC"
EXPECTATIONS = ("Provable", "NotProvable", "Unknown")

__all__ = [
    "CorpusEntry", "CorpusFormatError", "parse_corpus", "load_corpus", "shipped_corpus",
    "run_entry", "EntryResult", "cli", "main",
]


def _emit(payload: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        for ln in lines:
            click.echo(ln)


def _parse_goal(text: str):
    try:
        return parse_formula(text)
    except ParseError as e:
        raise click.UsageError(f"cannot parse formula: {e}") from None


def _parse_axioms(text: str | None) -> frozenset[str]:
    if not text:
        return frozenset()
    flags = frozenset(t.strip() for t in text.replace("+", ",").split(",") if t.strip())
    bad = flags - set(deep.AXIOM_FLAGS)
    if bad:
        raise click.UsageError(f"unknown axiom flags: {', '.join(sorted(bad))}")
    return flags


def _e_mode(logic: deep.Logic) -> bool:
    return logic in (deep.Logic.IKT, deep.Logic.IK)


# ---------------------------------------------------------------------------
# corpus files


class CorpusFormatError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    formula: str
    logic: deep.Logic
    extra_axioms: frozenset = frozenset()
    expected: str = "Unknown"
    note: str = ""
    line: int = 0

    @property
    def label(self) -> str:
        ax = "+" + "".join(sorted(self.extra_axioms)) if self.extra_axioms else ""
        return f"line {self.line}: {self.logic.value}{ax} {self.formula}"


def _split_logic(text: str, where: str) -> tuple[deep.Logic, frozenset]:
    name, _, rest = text.partition("+")
    try:
        logic = deep.Logic(name.strip())
    except ValueError:
        raise CorpusFormatError(f"{where}: unknown logic {name!r}") from None
    flags = frozenset(ch for ch in rest if ch not in "+, ")
    bad = flags - set(deep.AXIOM_FLAGS)
    if bad:
        raise CorpusFormatError(f"{where}: unknown axiom flags {sorted(bad)}")
    return logic, flags


def parse_corpus(text: str) -> list[CorpusEntry]:
    """Entries of a corpus file.

    Each non-blank line that does not start with ``#`` reads
    ``expected<TAB>logic[+axioms]<TAB>formula[<TAB>note]``; axioms are flag
    letters such as ``bikt+T`` or ``bikt+T4``.
    """
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        where = f"line {no}"
        cols = raw.split("\t")
        if len(cols) < 3:
            raise CorpusFormatError(f"{where}: expected at least three tab-separated fields")
        exp, lg, formula = cols[0].strip(), cols[1].strip(), cols[2].strip()
        if exp not in EXPECTATIONS:
            raise CorpusFormatError(f"{where}: unknown expectation {exp!r}")
        logic, flags = _split_logic(lg, where)
        try:
            parse_formula(formula)
        except ParseError as e:
            raise CorpusFormatError(f"{where}: {e}") from None
        note = "\t".join(cols[3:]).strip()
        out.append(CorpusEntry(formula, logic, flags, exp, note, no))
    return out


def load_corpus(path: str | os.PathLike) -> list[CorpusEntry]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def shipped_corpus() -> list[CorpusEntry]:
    """The corpus bundled with the package."""
    ref = resources.files("bikt") / "corpus" / "paper_axioms.corpus"
    return parse_corpus(ref.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class EntryResult:
    entry: CorpusEntry
    outcome: str
    steps: int
    ok: bool
    problems: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        e = self.entry
        return {"line": e.line, "formula": e.formula, "logic": e.logic.value,
                "axioms": sorted(e.extra_axioms), "expected": e.expected,
                "outcome": self.outcome, "steps": self.steps, "ok": self.ok,
                "problems": list(self.problems), "note": e.note}


def run_entry(entry: CorpusEntry, cfg_overrides: dict | None = None,
              soundness_models: int = 0, world_max: int = 6, seed: int = 0) -> EntryResult:
    """Search one entry and compare with its expectation.

    With ``soundness_models`` a proved formula must also hold in that many
    random models of the entry's frame class.
    """
    kw = dict(cfg_overrides or {})
    cfg = deep.SearchConfig(logic=entry.logic, extra_axioms=entry.extra_axioms, **kw)
    goal = parse_formula(entry.formula)
    out = deep.prove(goal, cfg)
    proved = isinstance(out, deep.Proved)
    problems = []
    if entry.expected == "Provable" and not proved:
        problems.append(f"expected Provable, got {out.name}")
    if entry.expected == "NotProvable" and proved:
        problems.append("expected NotProvable, got Proved")
    if proved and soundness_models:
        names = sorted(formula_atoms(goal)) or ["p"]
        models = semantics.model_suite(
            soundness_models, max_worlds=world_max, seed=seed, e_mode=_e_mode(entry.logic),
            atoms=names, classical=cfg.classical, frame=entry.extra_axioms)
        for k, m in enumerate(models):
            if not semantics.valid_in(m, goal):
                problems.append(f"proved formula fails in random model {k}")
                break
    return EntryResult(entry, out.name, out.steps, not problems, tuple(problems))


def _run_entry_star(args):
    return run_entry(*args)


# ---------------------------------------------------------------------------
# commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def cli():
    """Prover, proof checker and countermodel finder for BiKt and relatives."""


@cli.command()
@click.argument("formula")
@click.option("--logic", type=click.Choice(LOGICS), envvar=DEFAULT_LOGIC_ENV, default="bikt",
              show_default=True, help=f"Logic; the default may be set via {DEFAULT_LOGIC_ENV}.")
@click.option("--axioms", default="", help="Comma separated extension flags among T,4,B.")
@click.option("--depth", type=click.IntRange(min=1), default=8, show_default=True,
              help="Maximum nesting depth of any sequent.")
@click.option("--size", type=click.IntRange(min=1), default=400, show_default=True,
              help="Maximum structure size of any sequent.")
@click.option("--steps", type=click.IntRange(min=1), default=100000, show_default=True,
              help="Maximum number of rule applications.")
@click.option("--calculus", type=click.Choice(CALCULI), default="dbikt1", show_default=True)
@click.option("--emit-proof", type=click.Path(dir_okay=False, writable=True),
              help="Write the proof as JSON after re-checking it.")
@click.option("--compile-shallow", is_flag=True,
              help="Translate the proof into the shallow calculus and kernel-check it.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def prove(ctx, formula, logic, axioms, depth, size, steps, calculus, emit_proof,
          compile_shallow, as_json):
    """Search for a proof of FORMULA."""
    goal = _parse_goal(formula)
    flags = _parse_axioms(axioms)
    if compile_shallow and flags:
        raise click.UsageError("--compile-shallow does not cover the T, 4 and B rules")
    cfg = deep.SearchConfig(logic=logic, extra_axioms=flags, calculus=calculus,
                            max_nesting_depth=depth, max_structure_size=size, max_steps=steps)
    try:
        out = deep.prove(goal, cfg)
    except deep.UnsupportedLanguage as e:
        raise click.UsageError(str(e)) from None
    report = {"formula": print_formula(goal), "logic": logic, "axioms": sorted(flags),
              "calculus": calculus, "result": out.name, "steps": out.steps}
    lines = [f"formula: {report['formula']}",
             f"logic: {logic}" + (f" +{','.join(sorted(flags))}" if flags else ""),
             f"calculus: {calculus}", f"result: {out.name}", f"steps: {out.steps}"]
    if isinstance(out, deep.BoundExhausted):
        report["bound"] = out.bound
        lines.append(f"bound: {out.bound}")
    if isinstance(out, deep.Proved):
        report["proof_nodes"] = out.proof.size
        lines.append(f"proof nodes: {out.proof.size}")
        document = None
        if compile_shallow:
            sp = deep.compile_to_shallow(out.proof, cfg)
            errs = shallow.check_proof(sp, deep.shallow_ruleset(cfg))
            if errs:
                click.echo(f"internal error: compiled proof rejected at {errs[0]}", err=True)
                ctx.exit(EXIT_INTERNAL)
            report["shallow_nodes"] = sp.node_count
            lines.append(f"shallow proof: valid, {sp.node_count} nodes")
            document = shallow.dump_proof(sp)
        elif emit_proof:
            errs = deep.replay(out.proof, cfg)
            if errs:
                click.echo(f"internal error: proof does not replay at {errs[0]}", err=True)
                ctx.exit(EXIT_INTERNAL)
            document = deep.dump_proof(out.proof, cfg)
        if emit_proof:
            Path(emit_proof).write_text(document + "\n", encoding="utf-8")
            report["proof_file"] = emit_proof
            lines.append(f"proof written: {emit_proof}")
    _emit(report, as_json, lines)
    code = {"Proved": EXIT_OK, "NotProvedSaturated": EXIT_NO, "BoundExhausted": EXIT_BOUND}
    ctx.exit(code[out.name])


def _load_proof_file(path: str):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError(f"cannot read proof file: {e}") from None
    if isinstance(doc, dict) and doc.get("calculus") == "deep":
        return "deep", deep.proof_from_json(doc)
    return "shallow", shallow.proof_from_json(doc)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", type=click.Choice(["base", "e", "classical"]), default="base",
              show_default=True, help="Rule set for shallow proofs; cut is always allowed.")
@click.option("--eliminate-cuts", "out_file", type=click.Path(dir_okay=False, writable=True),
              help="Write a cut-free version of the proof and re-check it without cut.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def check(ctx, file, rules, out_file, as_json):
    """Check the proof in FILE (shallow or deep JSON)."""
    try:
        kind, loaded = _load_proof_file(file)
    except (ValueError, shallow.ProofFormatError) as e:
        report = {"file": file, "valid": False, "errors": [str(e)]}
        _emit(report, as_json, [f"file: {file}", "valid: no", f"error: {e}"])
        ctx.exit(EXIT_NO)
    report = {"file": file, "kind": kind}
    lines = [f"file: {file}", f"kind: {kind}"]
    if kind == "deep":
        if out_file:
            raise click.UsageError("--eliminate-cuts applies to shallow proofs only")
        proof, cfg = loaded
        errs = deep.replay(proof, cfg)
        report.update(logic=cfg.logic.value, calculus=cfg.calculus.value)
        lines.append(f"logic: {cfg.logic.value}")
    else:
        proof = loaded
        ruleset = shallow.RULESETS[rules].with_cut()
        errs = [str(e) for e in shallow.check_proof(proof, ruleset)]
        report.update(rules=rules, cut_free=cutelim.is_cut_free(proof), nodes=proof.node_count)
        lines += [f"rules: {rules}", f"nodes: {proof.node_count}",
                  f"cut-free: {'yes' if report['cut_free'] else 'no'}"]
    report["valid"], report["errors"] = not errs, list(errs)
    lines.append(f"valid: {'yes' if not errs else 'no'}")
    lines += [f"error: {e}" for e in errs]
    code = EXIT_OK if not errs else EXIT_NO
    if out_file and not errs:
        try:
            free = cutelim.eliminate_cuts(proof, shallow.RULESETS[rules])
        except cutelim.UnsupportedRuleSet as e:
            raise click.UsageError(str(e)) from None
        Path(out_file).write_text(shallow.dump_proof(free) + "\n", encoding="utf-8")
        again = [str(e) for e in shallow.check_proof(free, shallow.RULESETS[rules].without_cut())]
        report["eliminated"] = {"file": out_file, "nodes": free.node_count, "valid": not again,
                                "errors": again}
        lines += [f"cut-free proof written: {out_file}", f"cut-free nodes: {free.node_count}",
                  f"cut-free valid: {'yes' if not again else 'no'}"]
        lines += [f"error: {e}" for e in again]
        if again:
            code = EXIT_NO
    _emit(report, as_json, lines)
    ctx.exit(code)


@cli.command()
@click.argument("formula")
@click.option("--max-worlds", type=click.IntRange(min=1), default=4, show_default=True)
@click.option("--e-mode", is_flag=True, help="Only models whose two modal relations coincide.")
@click.option("--classical", is_flag=True, help="Only models with a discrete order.")
@click.option("--axioms", default="", help="Frame conditions among T,4,B.")
@click.option("--budget", type=click.IntRange(min=1), default=20000, show_default=True,
              help="Maximum number of candidate models.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--emit-model", type=click.Path(dir_okay=False, writable=True))
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def falsify(ctx, formula, max_worlds, e_mode, classical, axioms, budget, seed, emit_model,
            as_json):
    """Look for a Kripke model refuting FORMULA."""
    goal = _parse_goal(formula)
    flags = _parse_axioms(axioms)
    res = semantics.countermodel_search(goal, max_worlds, e_mode=e_mode, budget=budget,
                                        seed=seed, classical=classical, frame=flags)
    report = {"formula": print_formula(goal), "max_worlds": max_worlds}
    lines = [f"formula: {report['formula']}"]
    if isinstance(res, semantics.NotFound):
        report.update(result="NotFound", tried=res.tried)
        lines += ["result: NotFound", f"models tried: {res.tried}"]
        _emit(report, as_json, lines)
        ctx.exit(EXIT_NO)
    text = semantics.model_to_json(res.model)
    report.update(result="Countermodel", world=res.world, worlds=res.model.n_worlds,
                  model=json.loads(text))
    lines += ["result: Countermodel", f"worlds: {res.model.n_worlds}",
              f"refuted at world: {res.world}", f"model: {text}"]
    if emit_model:
        Path(emit_model).write_text(text + "\n", encoding="utf-8")
        report["model_file"] = emit_model
        lines.append(f"model written: {emit_model}")
    _emit(report, as_json, lines)
    ctx.exit(EXIT_OK)


@cli.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--soundness-models", type=click.IntRange(min=0), default=0, show_default=True,
              help="Random models each proved formula must hold in.")
@click.option("--world-max", type=click.IntRange(min=1), default=6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True,
              help="Worker processes; results keep the file order.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def corpus(ctx, file, soundness_models, world_max, seed, jobs, as_json):
    """Run every entry of a corpus FILE (the bundled corpus when omitted)."""
    try:
        entries = load_corpus(file) if file else shipped_corpus()
    except CorpusFormatError as e:
        raise click.UsageError(f"bad corpus: {e}") from None
    args = [(e, None, soundness_models, world_max, seed) for e in entries]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_entry_star, args))
    else:
        results = [run_entry(*a) for a in args]
    failed = [r for r in results if not r.ok]
    report = {"file": file or "<bundled>", "entries": len(results), "failed": len(failed),
              "results": [r.to_json() for r in results]}
    lines = [f"{'line':>4}  {'expected':<11} {'logic':<7} {'outcome':<18} {'ok':<4} formula"]
    for r in results:
        e = r.entry
        lg = e.logic.value + ("+" + "".join(sorted(e.extra_axioms)) if e.extra_axioms else "")
        lines.append(f"{e.line:>4}  {e.expected:<11} {lg:<7} {r.outcome:<18} "
                     f"{'yes' if r.ok else 'NO':<4} {e.formula}")
    for r in failed:
        lines += [f"FAILED {r.entry.label}: {p}" for p in r.problems]
    lines.append(f"{len(results)} entries, {len(failed)} failed")
    _emit(report, as_json, lines)
    ctx.exit(EXIT_OK if not failed else EXIT_NO)


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the exit code instead of raising ``SystemExit``."""
    try:
        rv = cli.main(args=argv, prog_name="bikt", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
