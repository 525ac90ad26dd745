"""Searching for deep proofs and translating them into the shallow calculus."""

from bikt.deep import Proved, SearchConfig, compile_to_shallow, prove, shallow_ruleset
from bikt.shallow import check_proof
from bikt.syntax import print_structure

# The black diamond under a white box returns to where it started, so the
# unit of the adjunction is a theorem of the base logic.
cfg = SearchConfig()
out = prove("p -> box bdia p", cfg)
print("p -> box bdia p:", out.name, "after", out.steps, "steps")

# Every node of the deep proof is a nested sequent; the root is the goal.
for node in out.proof.nodes():
    print(f"  {node.rule.value:<8} {print_structure(node.conclusion)}")

# The same theorem as a derivation that only uses top-level rules.
shallow = compile_to_shallow(out.proof, cfg)
print("shallow proof:", shallow.node_count, "nodes, errors:", check_proof(shallow, shallow_ruleset(cfg)))

# Without an explicit link between the white modalities the search saturates.
print("(dia p -> box q) -> box (p -> q) in bikt:", prove("(dia p -> box q) -> box (p -> q)").name)
print("... and with equal relations (ikt):",
      prove("(dia p -> box q) -> box (p -> q)", SearchConfig("ikt")).name)

# Frame flags add the matching structural rules.
for flag, goal in [("T", "box p -> p"), ("4", "dia dia p -> dia p"), ("B", "dia box p -> p")]:
    print(f"+{flag} {goal}:", prove(goal, SearchConfig(extra_axioms={flag})).name)

# The classical variant proves excluded middle; the base logic does not.
print("kt   p | (p -> false):", prove("p | (p -> false)", SearchConfig("kt")).name)
print("bikt p | (p -> false):", prove("p | (p -> false)").name)
