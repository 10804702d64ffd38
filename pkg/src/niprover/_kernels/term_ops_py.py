"""Pure-Python term kernel.

Terms use a compact encoding shared with the compiled twin:

* a variable is a plain ``int`` (its clause-local index),
* an application is a tuple ``(symbol_id, arg1, ..., argn)``,
* a constant is the 1-tuple ``(symbol_id,)``.

Substitutions are plain dicts mapping variable index to term.  During
unification they are kept triangular (bindings may reference bound
variables); ``resolve_subst`` collapses them to idempotent form.

This module is the reference implementation; ``_term_ops_cy.pyx`` mirrors
it function for function.
"""


def walk(t, subst):
    """Chase variable bindings until a non-variable or unbound variable."""
    while type(t) is int:
        nxt = subst.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def occurs(var, t, subst):
    """Occurs check: does ``var`` appear in ``t`` under ``subst``?"""
    t = walk(t, subst)
    if type(t) is int:
        return t == var
    for i in range(1, len(t)):
        if occurs(var, t[i], subst):
            return True
    return False


def unify_terms(a, b, subst):
    """Extend ``subst`` (mutated in place) to unify ``a`` with ``b``.

    Returns False on clash or occurs-check failure, in which case ``subst``
    may hold partial bindings; callers discard it on failure.
    """
    a = walk(a, subst)
    b = walk(b, subst)
    if type(a) is int:
        if type(b) is int and a == b:
            return True
        if occurs(a, b, subst):
            return False
        subst[a] = b
        return True
    if type(b) is int:
        if occurs(b, a, subst):
            return False
        subst[b] = a
        return True
    if a[0] != b[0] or len(a) != len(b):
        return False
    for i in range(1, len(a)):
        if not unify_terms(a[i], b[i], subst):
            return False
    return True


def unify_args(args_a, args_b, subst):
    """Unify two equal-length argument tuples pairwise."""
    if len(args_a) != len(args_b):
        return False
    for x, y in zip(args_a, args_b):
        if not unify_terms(x, y, subst):
            return False
    return True


def apply_subst(t, subst):
    """Apply ``subst`` to ``t``, chasing chains so the result is fully bound."""
    t = walk(t, subst)
    if type(t) is int:
        return t
    if len(t) == 1:
        return t
    return (t[0],) + tuple(apply_subst(t[i], subst) for i in range(1, len(t)))


def resolve_subst(subst):
    """Collapse a triangular substitution into an idempotent one."""
    return {v: apply_subst(rhs, subst) for v, rhs in subst.items()}


def shift_vars(t, offset):
    """Add ``offset`` to every variable index in ``t``."""
    if type(t) is int:
        return t + offset
    if len(t) == 1:
        return t
    return (t[0],) + tuple(shift_vars(t[i], offset) for i in range(1, len(t)))


def _canon_term(t, mapping):
    if type(t) is int:
        idx = mapping.get(t)
        if idx is None:
            idx = len(mapping)
            mapping[t] = idx
        return idx
    if len(t) == 1:
        return t
    return (t[0],) + tuple(_canon_term(t[i], mapping) for i in range(1, len(t)))


def canonicalize_args(args_lists):
    """Renumber variables 0..k-1 in first-occurrence order.

    ``args_lists`` is a sequence of argument tuples (one per literal, in
    clause order).  Returns (renumbered lists, variable count).
    """
    mapping = {}
    out = [tuple(_canon_term(a, mapping) for a in args) for args in args_lists]
    return out, len(mapping)


def max_var(t):
    """Largest variable index in ``t``, or -1 if ground."""
    if type(t) is int:
        return t
    best = -1
    for i in range(1, len(t)):
        m = max_var(t[i])
        if m > best:
            best = m
    return best


def term_size(t):
    """Node count of the term tree (variables and constants count 1)."""
    if type(t) is int:
        return 1
    n = 1
    for i in range(1, len(t)):
        n += term_size(t[i])
    return n


def term_depth(t):
    """Nesting depth: variables and constants are 0, f(...) is 1 + max child."""
    if type(t) is int or len(t) == 1:
        return 0
    best = 0
    for i in range(1, len(t)):
        d = term_depth(t[i])
        if d > best:
            best = d
    return best


def serialize_term(t, skeleton=False):
    """Deterministic text form keyed on symbol ids.

    With ``skeleton=True`` every variable renders as the same token, giving
    a name-free shape string usable as a sort key.
    """
    if type(t) is int:
        return "v" if skeleton else "v%d" % t
    if len(t) == 1:
        return "s%d" % t[0]
    return "s%d(%s)" % (
        t[0],
        ",".join(serialize_term(t[i], skeleton) for i in range(1, len(t))),
    )
