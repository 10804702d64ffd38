"""Shared generators for randomized tests.

Problems are generated over a small pool of predicates, functions and
constants with bounded arity and term depth, matching the scale the
acceptance suite runs at.
"""

import numpy as np

from niprover.tptp import (
    CONSTANT,
    FUNCTION,
    PREDICATE,
    Literal,
    Problem,
    ROLE_AXIOM,
    ROLE_NEGATED_CONJECTURE,
    SymbolTable,
    make_clause,
    parse_problem,
    render_problem,
)


def make_pool(n_preds=3, n_funcs=2, n_consts=2, max_arity=2):
    """Symbol table plus id lists for each kind; arities cycle 1..max_arity."""
    table = SymbolTable()
    preds = [table.intern(f"p{i}", PREDICATE, 1 + i % max_arity).id
             for i in range(n_preds)]
    funcs = [table.intern(f"f{i}", FUNCTION, 1 + i % max_arity).id
             for i in range(n_funcs)]
    consts = [table.intern(f"c{i}", CONSTANT, 0).id for i in range(n_consts)]
    return table, preds, funcs, consts


def random_term(rng, table, funcs, consts, n_vars, depth):
    roll = rng.random()
    if depth <= 0 or roll < 0.35:
        if n_vars > 0 and (roll < 0.2 or not consts):
            return int(rng.integers(n_vars))
        return (consts[int(rng.integers(len(consts)))],)
    f = funcs[int(rng.integers(len(funcs)))]
    arity = table[f].arity
    return (f,) + tuple(
        random_term(rng, table, funcs, consts, n_vars, depth - 1)
        for _ in range(arity)
    )


def random_literal(rng, table, preds, funcs, consts, n_vars, depth):
    p = preds[int(rng.integers(len(preds)))]
    arity = table[p].arity
    args = tuple(
        random_term(rng, table, funcs, consts, n_vars, depth)
        for _ in range(arity)
    )
    return Literal(bool(rng.integers(2)), p, args)


def random_clause(rng, table, preds, funcs, consts,
                  max_literals=3, n_vars=3, depth=2, role=ROLE_AXIOM, cid=-1):
    n = 1 + int(rng.integers(max_literals))
    lits = [random_literal(rng, table, preds, funcs, consts, n_vars, depth)
            for _ in range(n)]
    return make_clause(lits, role, cid)


def random_problem(rng, n_clauses=5, n_preds=3, n_funcs=2, n_consts=2,
                   max_literals=3, n_vars=3, depth=2, with_conjecture=True):
    table, preds, funcs, consts = make_pool(n_preds, n_funcs, n_consts)
    clauses = []
    for i in range(n_clauses):
        role = ROLE_AXIOM
        if with_conjecture and i == n_clauses - 1:
            role = ROLE_NEGATED_CONJECTURE
        clauses.append(random_clause(rng, table, preds, funcs, consts,
                                     max_literals, n_vars, depth, role, i))
    # normalize through text so symbol ids follow first occurrence, as for
    # any problem entering through the parser
    return parse_problem(render_problem(Problem(clauses, table)))


def rename_symbols(problem, rng):
    """Fresh-vocabulary bijection: every symbol gets a new display name.

    Kind and arity are preserved; re-rendering and re-parsing yields the
    renamed problem exactly as a consumer would see it.
    """
    order = rng.permutation(len(problem.symbols))
    fresh = {sym.id: f"ren{order[sym.id]}x" for sym in problem.symbols}
    lines = []
    for clause in problem.clauses:
        lines.append(_render_renamed(clause, problem.symbols, fresh))
    return parse_problem("\n".join(lines) + "\n")


def _render_renamed(clause, table, fresh):
    def term(t):
        if type(t) is int:
            return f"X{t}"
        name = fresh[t[0]]
        if len(t) == 1:
            return name
        return name + "(" + ",".join(term(a) for a in t[1:]) + ")"

    def lit(l):
        text = fresh[l.predicate]
        if l.args:
            text += "(" + ",".join(term(a) for a in l.args) + ")"
        return ("~" if l.negated else "") + text

    if not clause.literals:
        body = "$false"
    else:
        parts = [lit(l) for l in clause.literals]
        body = parts[0] if len(parts) == 1 else "(" + " | ".join(parts) + ")"
    role = ("negated_conjecture"
            if clause.role == ROLE_NEGATED_CONJECTURE else "axiom")
    return f"cnf(c{clause.id}, {role}, {body})."


def chain_problem_text(length, n_distractors=0, seed_tag=0):
    """Refutable chained-implication problem with inert distractors.

    A perfectly guided run needs 2*length + 2 given-clause picks, so
    lengths 1..3 land in the 4..8 step range; distractor facts and rules
    only widen the search.
    """
    lines = ["cnf(base, axiom, s0(c0))."]
    for i in range(length):
        lines.append(f"cnf(r{i}, axiom, (~s{i}(X) | s{i + 1}(f(X)))).")
    for j in range(n_distractors):
        lines.append(f"cnf(df{j}, axiom, dp{j}(c{seed_tag})).")
        lines.append(f"cnf(dr{j}, axiom, (~dp{j}(X) | dq{j}(X))).")
    lines.append(f"cnf(goal, negated_conjecture, ~s{length}(Y)).")
    return "\n".join(lines) + "\n"


def chain_corpus(n_problems, rng):
    """Named chain problems of varying length and distraction."""
    out = []
    for i in range(n_problems):
        length = 1 + int(rng.integers(3))
        distractors = int(rng.integers(4))
        text = chain_problem_text(length, distractors, seed_tag=i % 3)
        out.append((f"chain{i:02d}", parse_problem(text)))
    return out


def rng_for(seed):
    return np.random.default_rng(seed)
