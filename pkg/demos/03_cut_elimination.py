"""Joining two proofs with a cut and removing it again."""

from bikt import fixtures
from bikt.cutelim import JOIN_KINDS, eliminate_cuts, is_cut_free, join_by_cut
from bikt.shallow import RULESETS, check_proof
from bikt.syntax import print_structure

unit = fixtures.tense_unit()

# One composite per cut-formula shape; "noise" adds weakening, display moves
# and contraction above the cut so the reductions have something to trace.
for kind in JOIN_KINDS:
    composite = join_by_cut(unit, unit, kind, noise=True)
    free = eliminate_cuts(composite)
    print(f"{kind:<8} cut rank {composite.cut_rank}, {composite.node_count:>3} nodes -> "
          f"{free.node_count:>3} nodes, cut-free {is_cut_free(free)}, "
          f"valid {check_proof(free) == []}, same end {free.conclusion == composite.conclusion}")

# Proofs in the equal-relation rule set are handled the same way.
e = RULESETS["e"]
mixed = join_by_cut(fixtures.white_link(), fixtures.black_link(), "dia")
free = eliminate_cuts(mixed, e)
print("E composite:", print_structure(free.conclusion), "valid", check_proof(free, e) == [])
print("idempotent:", eliminate_cuts(free, e) == free)
