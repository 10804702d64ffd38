"""Symbolic core: substitution, unification, inference rules, variant keys.

The calculus is binary resolution plus factoring over canonical clauses,
with tautology and variant-duplicate deletion done by the callers.  All
functions are pure; hot primitives live in the kernel package so the
compiled backend can take over the inner loops.
"""

import itertools
from dataclasses import replace

from . import _kernels as kernels
from .tptp import Literal, ROLE_DERIVED, make_clause

SELECT_ALL = "all"
SELECT_NEGATIVE = "negative_only"
SELECT_MAX_WEIGHT = "max_weight"

LITERAL_SELECTIONS = (SELECT_ALL, SELECT_NEGATIVE, SELECT_MAX_WEIGHT)

# Candidate orderings tried by variant_key for literals whose sort key ties;
# beyond this the key degrades gracefully (still injective, possibly
# distinguishing some true variants).  Unreachable for sane clauses.
_MAX_TIE_CANDIDATES = 5040


def unify(a, b):
    """Most general unifier of two terms, or None.

    The result is idempotent: applying it twice equals applying it once.
    """
    subst = {}
    if not kernels.unify_terms(a, b, subst):
        return None
    return kernels.resolve_subst(subst)


def unify_atoms(lit_a, lit_b):
    """MGU of two literals' atoms (polarity ignored), or None."""
    if lit_a.predicate != lit_b.predicate:
        return None
    subst = {}
    if not kernels.unify_args(lit_a.args, lit_b.args, subst):
        return None
    return kernels.resolve_subst(subst)


def apply_to_literal(lit, subst):
    return Literal(lit.negated, lit.predicate,
                   tuple(kernels.apply_subst(a, subst) for a in lit.args))


def rename_apart(c1, c2):
    """Shift c2's variables past c1's so the index sets are disjoint."""
    offset = c1.n_vars
    if offset == 0 or c2.n_vars == 0:
        return c1, c2
    shifted = tuple(
        Literal(l.negated, l.predicate,
                tuple(kernels.shift_vars(a, offset) for a in l.args))
        for l in c2.literals
    )
    return c1, replace(c2, literals=shifted)


def literal_weight(lit):
    """Symbol-occurrence count: predicate plus argument tree sizes."""
    return 1 + sum(kernels.term_size(a) for a in lit.args)


def clause_weight(c):
    return sum(literal_weight(l) for l in c.literals)


def eligible_literals(c, selection):
    """Indices of literals the given selection strategy resolves on."""
    if selection == SELECT_ALL:
        return range(len(c.literals))
    if selection == SELECT_NEGATIVE:
        negs = [i for i, l in enumerate(c.literals) if l.negated]
        return negs if negs else range(len(c.literals))
    if selection == SELECT_MAX_WEIGHT:
        if not c.literals:
            return []
        best = max(range(len(c.literals)),
                   key=lambda i: (literal_weight(c.literals[i]), -i))
        return [best]
    raise ValueError(f"unknown literal selection {selection!r}")


def resolvents(given, partner, selection=SELECT_ALL):
    """All binary resolvents between eligible opposite-polarity literals.

    The clauses are renamed apart here, so callers may pass clauses with
    overlapping variable indices.  Resolvents come back canonical, with
    duplicate literals merged and parents recorded.
    """
    given, partner = rename_apart(given, partner)
    out = []
    for i in eligible_literals(given, selection):
        li = given.literals[i]
        for j in eligible_literals(partner, selection):
            lj = partner.literals[j]
            if li.negated == lj.negated:
                continue
            subst = unify_atoms(li, lj)
            if subst is None:
                continue
            rest = [apply_to_literal(l, subst)
                    for k, l in enumerate(given.literals) if k != i]
            rest += [apply_to_literal(l, subst)
                     for k, l in enumerate(partner.literals) if k != j]
            out.append(make_clause(rest, ROLE_DERIVED,
                                   parents=(given.id, partner.id)))
    return out


def factors(c):
    """Binary factors: each unifiable same-polarity literal pair merged."""
    out = []
    for i, j in itertools.combinations(range(len(c.literals)), 2):
        li, lj = c.literals[i], c.literals[j]
        if li.negated != lj.negated:
            continue
        subst = unify_atoms(li, lj)
        if subst is None:
            continue
        merged = [apply_to_literal(l, subst) for l in c.literals]
        out.append(make_clause(merged, ROLE_DERIVED, parents=(c.id,)))
    return out


def is_tautology(c):
    """True iff the clause contains an atom both positively and negatively."""
    positive = {l.atom for l in c.literals if not l.negated}
    return any(l.atom in positive for l in c.literals if l.negated)


def _serialize_literal(lit, skeleton=False):
    head = ("~" if lit.negated else "") + "p%d" % lit.predicate
    if not lit.args:
        return head
    return head + "(" + ",".join(
        kernels.serialize_term(a, skeleton) for a in lit.args) + ")"


def _key_for_order(literals):
    new_args, _ = kernels.canonicalize_args([l.args for l in literals])
    return "|".join(
        _serialize_literal(Literal(l.negated, l.predicate, a))
        for l, a in zip(literals, new_args)
    )


def variant_key(c):
    """Canonical byte key: equal keys iff equal up to variable renaming
    and literal reordering.

    Literals are sorted by (predicate, polarity, name-free skeleton); ties
    are resolved by trying every ordering of each tied group and keeping
    the lexicographically smallest serialization after renumbering
    variables in first-occurrence order.
    """
    sort_key = lambda l: (l.predicate, l.negated,
                          _serialize_literal(l, skeleton=True))
    ordered = sorted(c.literals, key=sort_key)
    groups = [list(grp) for _, grp in itertools.groupby(ordered, key=sort_key)]
    n_candidates = 1
    for g in groups:
        for i in range(2, len(g) + 1):
            n_candidates *= i
        if n_candidates > _MAX_TIE_CANDIDATES:
            break
    if n_candidates == 1:
        return _key_for_order([l for g in groups for l in g]).encode()
    orderings = itertools.islice(
        itertools.product(*(itertools.permutations(g) for g in groups)),
        _MAX_TIE_CANDIDATES,
    )
    best = min(
        _key_for_order([l for g in perm for l in g]) for perm in orderings
    )
    return best.encode()


def variant_equal(a, b):
    return variant_key(a) == variant_key(b)
