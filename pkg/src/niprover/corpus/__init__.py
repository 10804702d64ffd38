"""Bundled desk-scale problems with their expected verdicts.

Refutable entries derive the empty clause under every complete
configuration; the rest saturate quickly.  The fig_pair_refutable entry
embeds the documentation's two-clause example in a refutable theory.
"""

from importlib import resources

EXPECTED = {
    "prop_chain": "Unsatisfiable",
    "modus_tollens": "Unsatisfiable",
    "fig_pair_refutable": "Unsatisfiable",
    "unit_conflict": "Unsatisfiable",
    "function_chain": "Unsatisfiable",
    "needs_factoring": "Unsatisfiable",
    "symmetry_refuted": "Unsatisfiable",
    "transitivity": "Unsatisfiable",
    "pigeon_two_one": "Unsatisfiable",
    "exists_witness": "Unsatisfiable",
    "deep_unify": "Unsatisfiable",
    "multi_branch": "Unsatisfiable",
    "socrates_functions": "Unsatisfiable",
    "three_way": "Unsatisfiable",
    "two_facts": "Satisfiable",
    "horn_no_goal": "Satisfiable",
    "ground_model": "Satisfiable",
    "symmetric_sat": "Satisfiable",
    "units_sat": "Satisfiable",
    "edges_sat": "Satisfiable",
    "taut_input": "Satisfiable",
    "all_negative": "Satisfiable",
    "distinct_preds": "Satisfiable",
    "var_units": "Satisfiable",
    "mixed_sat": "Satisfiable",
}


def names():
    return sorted(EXPECTED)


def load(name):
    """Problem source text and its expected SZS status."""
    if name not in EXPECTED:
        raise KeyError(f"unknown corpus problem {name!r}")
    text = resources.files(__package__).joinpath(f"{name}.p").read_text()
    return text, EXPECTED[name]
