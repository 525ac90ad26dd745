import json

import pytest

from bikt import fixtures
from bikt.cli import (
    EXIT_BOUND, EXIT_NO, EXIT_OK, EXIT_USAGE, CorpusFormatError, main, parse_corpus,
)
from bikt.cutelim import join_by_cut
from bikt.semantics import model_from_json, validate
from bikt.shallow import dump_proof


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_prove_exit_codes(capsys):
    assert run(capsys, "prove", "p -> box bdia p", "--logic", "bikt")[0] == EXIT_OK
    assert run(capsys, "prove", "box p -> p", "--logic", "bikt", "--axioms", "T")[0] == EXIT_OK
    assert run(capsys, "prove", "p | (p -> false)", "--logic", "bikt")[0] in (EXIT_NO, EXIT_BOUND)
    assert run(capsys, "prove", "(p -> q -> r) -> (p -> q) -> p -> r", "--steps", "2")[0] == EXIT_BOUND


@pytest.mark.parametrize("argv", [
    ["prove", "p ->"], ["prove", "p", "--logic", "s5"], ["prove", "p", "--axioms", "Q"],
    ["prove", "p", "--depth", "0"], ["prove", "bbox p", "--logic", "ik"],
    ["prove", "box p -> p", "--axioms", "T", "--compile-shallow"], [], ["nonsense"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_default_logic_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("BIKT_DEFAULT_LOGIC", "ikt")
    assert run(capsys, "prove", "box (p -> q) -> dia p -> dia q")[0] == EXIT_OK
    monkeypatch.setenv("BIKT_DEFAULT_LOGIC", "nope")
    assert run(capsys, "prove", "p -> p")[0] == EXIT_USAGE


def test_prove_json_mirrors_text(capsys):
    code, text, _ = run(capsys, "prove", "p -> box bdia p")
    code2, js, _ = run(capsys, "prove", "p -> box bdia p", "--json")
    doc = json.loads(js)
    assert code == code2 == EXIT_OK
    assert doc["result"] == "Proved" and f"result: {doc['result']}" in text
    assert f"steps: {doc['steps']}" in text


def test_emit_and_check_deep_and_shallow(capsys, tmp_path):
    deep_file, shallow_file = tmp_path / "deep.json", tmp_path / "shallow.json"
    assert run(capsys, "prove", "p -> box bdia p", "--emit-proof", str(deep_file))[0] == EXIT_OK
    assert json.loads(deep_file.read_text())["calculus"] == "deep"
    assert run(capsys, "check", str(deep_file))[0] == EXIT_OK
    assert run(capsys, "prove", "p -> box bdia p", "--compile-shallow",
               "--emit-proof", str(shallow_file))[0] == EXIT_OK
    assert run(capsys, "check", str(shallow_file), "--rules", "base")[0] == EXIT_OK


def test_check_fixture_rule_sets(capsys, tmp_path):
    f = tmp_path / "dist.json"
    f.write_text(dump_proof(fixtures.white_distribution()))
    assert run(capsys, "check", str(f), "--rules", "e")[0] == EXIT_OK
    code, out, _ = run(capsys, "check", str(f), "--rules", "base")
    assert code == EXIT_NO and "BulletTriR" in out


def test_check_reports_corrupted_node(capsys, tmp_path):
    doc = json.loads(dump_proof(fixtures.tense_unit()))
    doc["premises"][0]["rule"] = "DiaR"
    f = tmp_path / "bad.json"
    f.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "check", str(f))
    assert code == EXIT_NO and "root.0" in out
    doc["premises"][0]["rule"] = "NoSuchRule"
    f.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "check", str(f))
    assert code == EXIT_NO and "root.0" in out


def test_check_eliminates_cuts(capsys, tmp_path):
    composite = join_by_cut(fixtures.tense_unit(), fixtures.tense_unit(), "box", noise=True)
    src, dst = tmp_path / "cut.json", tmp_path / "free.json"
    src.write_text(dump_proof(composite))
    code, out, _ = run(capsys, "check", str(src), "--eliminate-cuts", str(dst), "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["eliminated"]["valid"] and not doc["cut_free"]
    assert run(capsys, "check", str(dst))[0] == EXIT_OK
    assert json.loads(run(capsys, "check", str(dst), "--json")[1])["cut_free"]


def test_eliminating_cuts_needs_a_supported_rule_set(capsys, tmp_path):
    f = tmp_path / "em.json"
    f.write_text(dump_proof(fixtures.excluded_middle()))
    assert run(capsys, "check", str(f), "--rules", "classical")[0] == EXIT_OK
    out = tmp_path / "o.json"
    assert run(capsys, "check", str(f), "--rules", "classical",
               "--eliminate-cuts", str(out))[0] == EXIT_USAGE


def test_falsify(capsys, tmp_path):
    model = tmp_path / "m.json"
    code, out, _ = run(capsys, "falsify", "(dia p -> box q) -> box (p -> q)", "--max-worlds", "5",
                       "--emit-model", str(model))
    assert code == EXIT_OK and validate(model_from_json(model.read_text())) == []
    assert run(capsys, "falsify", "true")[0] == EXIT_NO
    # a two-world model refutes the dual contradiction in the base logic
    code, out, _ = run(capsys, "falsify", "p & (true -< p) -> false", "--max-worlds", "4", "--json")
    assert code == EXIT_OK and json.loads(out)["worlds"] == 2
    assert run(capsys, "falsify", "p | (p -> false)", "--classical")[0] == EXIT_NO
    assert run(capsys, "falsify", "box p -> p", "--axioms", "T")[0] == EXIT_NO


def test_corpus_commands(capsys, tmp_path):
    empty = tmp_path / "empty.corpus"
    empty.write_text("# nothing\n")
    code, out, _ = run(capsys, "corpus", str(empty))
    assert code == EXIT_OK and "0 entries, 0 failed" in out
    wrong = tmp_path / "wrong.corpus"
    wrong.write_text("Provable\tbikt\tp -> p\nNotProvable\tbikt\tp -> p\tdeliberately wrong\n")
    code, out, _ = run(capsys, "corpus", str(wrong))
    assert code == EXIT_NO and "FAILED line 2" in out
    bad = tmp_path / "bad.corpus"
    bad.write_text("Maybe\tbikt\tp\n")
    assert run(capsys, "corpus", str(bad))[0] == EXIT_USAGE


def test_shipped_corpus_passes(capsys):
    code, out, _ = run(capsys, "corpus", "--soundness-models", "10", "--jobs", "2")
    assert code == EXIT_OK and out.rstrip().endswith("failed") and ", 0 failed" in out


def test_reports_are_deterministic(capsys, tmp_path):
    small = tmp_path / "s.corpus"
    small.write_text("Provable\tbikt\tp -> box bdia p\nNotProvable\tbikt\tbox p -> p\n")
    first = run(capsys, "corpus", str(small), "--soundness-models", "5", "--json")
    second = run(capsys, "corpus", str(small), "--soundness-models", "5", "--json")
    assert first == second
    a = run(capsys, "falsify", "((p -> q) -> p) -> p", "--json")
    assert a == run(capsys, "falsify", "((p -> q) -> p) -> p", "--json")


def test_corpus_parser():
    entries = parse_corpus("Provable\tbikt+T4\tbox p -> p\tnote here\n\n# c\nUnknown\tkt\tp\n")
    assert [e.expected for e in entries] == ["Provable", "Unknown"]
    assert entries[0].extra_axioms == {"T", "4"} and entries[0].line == 1
    for text in ["Provable\tbikt\n", "Provable\tzz\tp\n", "Provable\tbikt\tp ->\n"]:
        with pytest.raises(CorpusFormatError):
            parse_corpus(text)
