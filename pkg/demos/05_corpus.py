"""Running the regression corpus through the command-line entry point."""

from bikt.cli import main, run_entry, shipped_corpus

entries = shipped_corpus()
print(len(entries), "shipped entries")

# A single entry, with a soundness check against fifty random models.
result = run_entry(entries[0], soundness_models=50)
print(entries[0].formula, "->", result.outcome, "ok" if result.ok else result.problems)

# The same table the `bikt corpus` command prints.
code = main(["corpus", "--soundness-models", "20"])
print("exit code", code)
