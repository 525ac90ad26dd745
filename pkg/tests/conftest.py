import sys
from functools import lru_cache
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


@lru_cache(maxsize=None)
def corpus_runs():
    """Each shipped corpus entry with its search configuration and outcome."""
    from bikt.cli import shipped_corpus
    from bikt.deep import SearchConfig, prove

    out = []
    for entry in shipped_corpus():
        cfg = SearchConfig(entry.logic, entry.extra_axioms)
        out.append((entry, cfg, prove(entry.formula, cfg)))
    return tuple(out)
