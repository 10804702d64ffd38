"""Given-clause saturation loop with pluggable clause selection.

The loop keeps a processed list P and an unprocessed pool U.  Each step
moves one clause from U to P and generates its factors plus all resolvents
against P; new clauses are dropped if tautological, variant-duplicate or
oversized, and otherwise join U.  It stops on the empty clause, an empty
U, or a budget limit.

Guidance is either a learned policy (embeddings scored against a state
summary, softmax with temperature, greedy or sampled) or an age/weight
alternation.  With policy guidance the per-symbol embedding pass over the
theory graph runs exactly once, before the loop; per-clause embeddings are
computed when a clause enters U and cached by variant key.

Every derived clause records its rule and parents, so refutations can be
replayed from scratch against the inference rules alone.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import gnn, policy
from .graph import build_theory_graph
from .logic import (
    LITERAL_SELECTIONS,
    SELECT_ALL,
    SELECT_NEGATIVE,
    clause_weight,
    factors,
    is_tautology,
    resolvents,
    variant_key,
)
from .tptp import ROLE_NEGATED_CONJECTURE, render_formula

UNSATISFIABLE = "Unsatisfiable"
SATURATED = "Saturated"
TIMEOUT = "Timeout"
STEP_LIMIT = "StepLimit"

GUIDANCE_HEURISTIC = "heuristic"
GUIDANCE_POLICY = "policy"

TIE_BREAKS = ("age", "weight")

RULE_INPUT = "input"
RULE_RESOLUTION = "resolution"
RULE_FACTORING = "factoring"

# selections under which an exhausted pool really is a saturated set
_COMPLETE_SELECTIONS = (SELECT_ALL, SELECT_NEGATIVE)


@dataclass
class ProverConfig:
    literal_selection: str = SELECT_ALL
    tie_break: str = "age"
    guidance: str = GUIDANCE_HEURISTIC
    age_weight_ratio: tuple = (1, 5)
    step_limit: int = 1000
    time_limit: float | None = None
    temperature: float = 1.0
    mode: str = "greedy"
    seed: int = 0
    max_literals: int = 64
    max_symbols: int = 400

    def validate(self):
        if self.literal_selection not in LITERAL_SELECTIONS:
            raise ValueError(
                f"unknown literal selection {self.literal_selection!r}")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie break {self.tie_break!r}")
        if self.guidance not in (GUIDANCE_HEURISTIC, GUIDANCE_POLICY):
            raise ValueError(f"unknown guidance {self.guidance!r}")
        if self.step_limit <= 0:
            raise ValueError("step limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.mode not in ("greedy", "sample"):
            raise ValueError(f"unknown selection mode {self.mode!r}")
        if len(self.age_weight_ratio) != 2 or min(self.age_weight_ratio) < 0 \
                or sum(self.age_weight_ratio) == 0:
            raise ValueError("age/weight ratio needs two non-negative parts")


@dataclass
class ProofStep:
    clause_id: int
    rule: str
    parents: tuple
    clause: object


@dataclass
class Decision:
    """One given-clause choice, with everything needed to recompute its
    probability later."""
    state_ids: tuple
    candidate_ids: tuple
    chosen: int
    log_prob: float


@dataclass
class ProofResult:
    status: str
    proof: list | None
    stats: dict
    clauses: dict
    derivations: dict

    @property
    def solved(self):
        return self.status == UNSATISFIABLE


class ReplayError(Exception):
    def __init__(self, message, step=None):
        super().__init__(message if step is None
                         else f"step {step}: {message}")
        self.step = step


def saturate(problem, cfg, model=None, decision_log=None,
             dropout_rate=0.0, mask_fn_factory=None):
    """Run the loop to a verdict under the configured budgets."""
    cfg.validate()
    if cfg.guidance == GUIDANCE_POLICY and model is None:
        raise ValueError("policy guidance requires model parameters")

    start = time.monotonic()
    rng = np.random.default_rng(cfg.seed)
    table = problem.symbols

    clauses = {}
    derivations = {}
    embeddings = {}
    seen = {}
    stats = {
        "steps": 0, "generated": 0, "kept": 0,
        "deleted_tautologies": 0, "deleted_variants": 0,
        "discarded_oversize": 0, "phase1_forwards": 0,
    }

    use_policy = cfg.guidance == GUIDANCE_POLICY
    sym = None
    cache = None
    if use_policy:
        tg = build_theory_graph(problem)
        theory_masks = mask_fn_factory(b"theory") if mask_fn_factory else None
        sym = gnn.symbol_embeddings(tg, model, dropout_rate, theory_masks)
        cache = gnn.EmbeddingCache()
        stats["phase1_forwards"] = 1

    next_id = 0
    unprocessed = []
    processed = []
    empty_id = None

    def embed(clause):
        masks = None
        if mask_fn_factory is not None:
            masks = mask_fn_factory(variant_key(clause))
        return gnn.clause_embedding(clause, table, model, sym, cache,
                                    dropout_rate, masks)

    def admit(clause, rule):
        nonlocal next_id, empty_id
        if len(clause.literals) > cfg.max_literals or \
                clause_weight(clause) > cfg.max_symbols:
            stats["discarded_oversize"] += 1
            return
        if is_tautology(clause):
            stats["deleted_tautologies"] += 1
            return
        key = variant_key(clause)
        if key in seen:
            stats["deleted_variants"] += 1
            return
        clause = replace(clause, id=next_id)
        next_id += 1
        clauses[clause.id] = clause
        derivations[clause.id] = (rule, clause.parents)
        seen[key] = clause.id
        if use_policy:
            embeddings[clause.id] = embed(clause)
        unprocessed.append(clause.id)
        stats["kept"] += 1
        if clause.is_empty() and empty_id is None:
            empty_id = clause.id

    for clause in problem.clauses:
        admit(replace(clause, parents=()), RULE_INPUT)

    nc_ids = [cid for cid, c in clauses.items()
              if c.role == ROLE_NEGATED_CONJECTURE]

    def pick_policy():
        p_embs = [embeddings[i] for i in processed]
        if p_embs:
            state_ids = tuple(processed)
        elif nc_ids:
            state_ids = tuple(nc_ids)
        else:
            state_ids = tuple(unprocessed)
        state = policy.state_summary(
            [embeddings[i] for i in state_ids], [])
        u_embs = [embeddings[i] for i in unprocessed]
        scores = policy.score(state, u_embs, model.w_attn)
        probs = policy.softmax_t(scores, cfg.temperature)
        pos = policy.select(probs, cfg.mode, rng)
        if decision_log is not None:
            scaled = scores / cfg.temperature
            log_prob = float(scaled[pos]
                             - _logsumexp(scaled))
            decision_log.append(Decision(state_ids, tuple(unprocessed),
                                         pos, log_prob))
        return pos

    def pick_heuristic():
        age_picks, weight_picks = cfg.age_weight_ratio
        slot = stats["steps"] % (age_picks + weight_picks)
        if slot < age_picks:
            return 0  # unprocessed stays in ascending id order
        if cfg.tie_break == "age":
            key = lambda i: (clause_weight(clauses[i]), i)
        else:
            key = lambda i: (clause_weight(clauses[i]),
                             len(clauses[i].literals), i)
        best = min(range(len(unprocessed)),
                   key=lambda pos: key(unprocessed[pos]))
        return best

    def finish(status):
        stats["time_ms"] = (time.monotonic() - start) * 1000.0
        stats["complete"] = (
            status == SATURATED
            and stats["discarded_oversize"] == 0
            and cfg.literal_selection in _COMPLETE_SELECTIONS)
        proof = None
        if status == UNSATISFIABLE:
            proof = _extract_proof(empty_id, clauses, derivations)
            stats["proof_length"] = len(proof)
        return ProofResult(status, proof, stats, clauses, derivations)

    while True:
        if empty_id is not None:
            return finish(UNSATISFIABLE)
        if not unprocessed:
            return finish(SATURATED)
        if stats["steps"] >= cfg.step_limit:
            return finish(STEP_LIMIT)
        if cfg.time_limit is not None and \
                time.monotonic() - start > cfg.time_limit:
            return finish(TIMEOUT)

        pos = pick_policy() if use_policy else pick_heuristic()
        given_id = unprocessed.pop(pos)
        processed.append(given_id)
        stats["steps"] += 1
        given = clauses[given_id]

        new_clauses = factors(given)
        for pid in processed:
            new_clauses.extend(
                resolvents(given, clauses[pid], cfg.literal_selection))
        for clause in new_clauses:
            stats["generated"] += 1
            rule = RULE_FACTORING if len(clause.parents) == 1 \
                else RULE_RESOLUTION
            admit(clause, rule)
            if empty_id is not None:
                break


def _logsumexp(x):
    m = float(np.max(x))
    return m + math.log(float(np.exp(x - m).sum()))


def _extract_proof(empty_id, clauses, derivations):
    needed = set()
    frontier = [empty_id]
    while frontier:
        cid = frontier.pop()
        if cid in needed:
            continue
        needed.add(cid)
        frontier.extend(derivations[cid][1])
    steps = []
    for cid in sorted(needed):
        rule, parents = derivations[cid]
        steps.append(ProofStep(cid, rule, parents, clauses[cid]))
    return steps


def verify_proof(result, problem):
    """Re-derive every proof step from scratch; raises ReplayError."""
    if result.status != UNSATISFIABLE:
        raise ReplayError("result is not a refutation")
    if not result.proof:
        raise ReplayError("missing proof")
    input_keys = {variant_key(c) for c in problem.clauses}
    by_id = {}
    for idx, step in enumerate(result.proof):
        if step.rule == RULE_INPUT:
            if step.parents:
                raise ReplayError("input clause with parents", idx)
            if variant_key(step.clause) not in input_keys:
                raise ReplayError("clause is not an input clause", idx)
        elif step.rule in (RULE_RESOLUTION, RULE_FACTORING):
            if any(p not in by_id for p in step.parents):
                raise ReplayError("parent missing or out of order", idx)
            if step.rule == RULE_FACTORING:
                if len(step.parents) != 1:
                    raise ReplayError("factoring needs one parent", idx)
                candidates = factors(by_id[step.parents[0]])
            else:
                if len(step.parents) != 2:
                    raise ReplayError("resolution needs two parents", idx)
                candidates = resolvents(by_id[step.parents[0]],
                                        by_id[step.parents[1]], SELECT_ALL)
            key = variant_key(step.clause)
            if all(variant_key(c) != key for c in candidates):
                raise ReplayError("conclusion is not derivable from parents",
                                  idx)
        else:
            raise ReplayError(f"unknown rule {step.rule!r}", idx)
        by_id[step.clause_id] = step.clause
    if not result.proof[-1].clause.is_empty():
        raise ReplayError("final step is not the empty clause",
                          len(result.proof) - 1)
    return True


def replay_proof(result, problem):
    """Boolean form of verify_proof."""
    try:
        return verify_proof(result, problem)
    except ReplayError:
        return False


def check_saturated(clause_list, selection=SELECT_ALL):
    """Brute-force fixpoint check: all pairs and factors yield only
    tautologies or variants of known clauses."""
    known = {variant_key(c) for c in clause_list}

    def redundant(c):
        return is_tautology(c) or variant_key(c) in known

    for c in clause_list:
        if not all(redundant(f) for f in factors(c)):
            return False
    for c1 in clause_list:
        for c2 in clause_list:
            if not all(redundant(r)
                       for r in resolvents(c1, c2, selection)):
                return False
    return True


def szs_status(result):
    if result.status == UNSATISFIABLE:
        return "Unsatisfiable"
    if result.status == SATURATED:
        return "Satisfiable" if result.stats.get("complete") else "GaveUp"
    if result.status == TIMEOUT:
        return "Timeout"
    return "GaveUp"


def render_szs_line(result, name):
    return f"% SZS status {szs_status(result)} for {name}"


def render_proof(result, table):
    """Derivation lines in cnf syntax with inference annotations."""
    if not result.proof:
        return ""
    lines = []
    for step in result.proof:
        role = ("negated_conjecture"
                if step.clause.role == ROLE_NEGATED_CONJECTURE else
                "axiom" if step.rule == RULE_INPUT else "plain")
        body = render_formula(step.clause, table)
        if step.rule == RULE_INPUT:
            source = "input"
        else:
            parents = ",".join(f"c{p}" for p in step.parents)
            source = f"inference({step.rule},[{parents}])"
        lines.append(f"cnf(c{step.clause_id}, {role}, {body}, {source}).")
    return "\n".join(lines)
