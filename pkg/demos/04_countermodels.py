"""Kripke models: random generation, forcing and countermodel search."""

from bikt.semantics import (
    Countermodel, countermodel_search, forces, lemma_countermodel, model_to_json, random_model,
    validate,
)
from bikt.syntax import parse_formula

# Random models are repaired until every frame condition holds.
m = random_model(4, seed=7)
print("random model violations:", validate(m))
print(model_to_json(m))

# Smallest refutations, searched by increasing number of worlds.
for text in ["p | (p -> false)", "((p -> q) -> p) -> p", "(dia p -> box q) -> box (p -> q)",
             "box p -> p", "p & (true -< p) -> false"]:
    goal = parse_formula(text)
    found = countermodel_search(goal, max_worlds=5)
    if isinstance(found, Countermodel):
        print(f"{text:<36} refuted at world {found.world} of {found.model.n_worlds}")
    else:
        print(f"{text:<36} no countermodel ({found.tried} models tried)")

# The shipped five-world model separates the white diamond from the white box.
link = parse_formula("(dia p -> box q) -> box (p -> q)")
shipped = lemma_countermodel()
print("shipped model valid:", validate(shipped) == [], "forces link at 0:", forces(shipped, 0, link))

# Equal relations make the same formula valid.
print("link in equal-relation models:",
      countermodel_search(link, max_worlds=3, e_mode=True).__class__.__name__)
