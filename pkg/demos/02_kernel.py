"""The shallow proof kernel and the hand-written fixture derivations."""

import json

from bikt import fixtures
from bikt.shallow import RULESETS, check_proof, dump_proof, load_proof
from bikt.syntax import print_structure

# Each fixture states the rule set it needs.  Checking under a smaller set
# reports the first node whose rule is missing.
for name, (build, rules) in fixtures.FIXTURES.items():
    proof = build()
    print(f"{name:<20} {rules:<10} {print_structure(proof.conclusion)}")
    for other in ("base", "e", "classical"):
        errors = check_proof(proof, RULESETS[other])
        verdict = "ok" if not errors else str(errors[0])
        print(f"    under {other:<9} {verdict}")

# Proofs travel as JSON; a corrupted node is located by its path.
doc = json.loads(dump_proof(fixtures.tense_unit()))
doc["premises"][0]["rule"] = "DiaR"
broken = load_proof(json.dumps(doc))
for err in check_proof(broken):
    print("corrupted tense unit:", err)
