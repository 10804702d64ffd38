"""Policy-gradient training over proof episodes.

Each iteration rolls out one sampled-policy episode per problem at the
current temperature, scores episodes against a heuristic baseline run on
the same problem (reward = clamp(baseline_steps / agent_steps) for solved
episodes, 0 otherwise), then takes several gradient steps on the batch.
The objective is REINFORCE with batch-normalized rewards plus L2
regularization:

    loss = - sum_e R_e * sum_t log pi(a_t) + lambda * ||theta||^2

Gradients flow through the selection scores into clause embeddings, the
per-symbol embeddings and every network layer; nothing is detached.
Dropout masks are a pure function of (episode key, graph key, layer), so
an episode's probabilities can be recomputed exactly when the batch is
differentiated, and repeated runs are bit-reproducible.

``gradient_check`` compares the analytic batch gradient against central
finite differences coordinate by coordinate (dropout off).
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import gnn, policy
from .graph import build_theory_graph
from .logic import variant_key
from .prover import (
    GUIDANCE_HEURISTIC,
    GUIDANCE_POLICY,
    ProverConfig,
    UNSATISFIABLE,
    saturate,
)
from .tptp import parse_problem


@dataclass
class HyperParams:
    tau0: float = 3.0
    dropout: float = 0.57
    lr: float = 0.001
    temp_decay: float = 0.89
    reg_lambda: float = 0.004
    epochs: int = 10
    reward_min: float = 1.0
    reward_max: float = 2.0
    iterations: int = 10
    step_limit: int = 50
    dim: int = gnn.DEFAULT_DIM

    def validate(self):
        positive = {
            "tau0": self.tau0, "temp_decay": self.temp_decay,
            "epochs": self.epochs, "reward_min": self.reward_min,
            "reward_max": self.reward_max,
            "step_limit": self.step_limit, "dim": self.dim,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must be in [0, 1)")
        if self.reg_lambda < 0:
            raise ValueError("regularization must be non-negative")
        if self.reward_min > self.reward_max:
            raise ValueError("reward_min must not exceed reward_max")


@dataclass
class Trajectory:
    problem_name: str
    problem: object
    decisions: list
    status: str
    steps: int
    baseline_steps: int
    reward: float
    tau: float
    dropout_rate: float
    dropout_key: bytes | None
    clauses: dict


def compute_reward(baseline_steps, agent_steps, hp):
    """Clamped baseline-to-agent effort ratio for a solved episode."""
    if baseline_steps < 1 or agent_steps < 1:
        raise ValueError("step counts must be at least 1")
    ratio = baseline_steps / agent_steps
    return min(max(ratio, hp.reward_min), hp.reward_max)


def _mask_base_seed(episode_key, graph_key):
    digest = hashlib.blake2b(episode_key + b"\x1f" + graph_key,
                             digest_size=8).digest()
    return int.from_bytes(digest, "little")


def mask_factory(rate, episode_key):
    """Dropout masks as a pure function of (episode, graph, layer)."""
    if rate <= 0.0 or episode_key is None:
        return None

    def factory(graph_key):
        base = _mask_base_seed(episode_key, graph_key)

        def mask_fn(layer, shape):
            rng = np.random.default_rng([base, layer])
            return (rng.random(shape) >= rate).astype(np.float64)

        return mask_fn

    return factory


def baseline_steps_for(problem, hp, seed=0):
    """Heuristic reference run used as the reward denominator."""
    cfg = ProverConfig(guidance=GUIDANCE_HEURISTIC, age_weight_ratio=(1, 5),
                       step_limit=hp.step_limit, seed=seed)
    result = saturate(problem, cfg)
    return max(result.stats["steps"], 1)


def episode(problem, params, tau, rng, hp, name="problem",
            baseline_steps=None, episode_key=None):
    """One sampled-policy proof attempt, recorded for later gradients."""
    if tau <= 0:
        raise ValueError("temperature must be positive")
    if baseline_steps is None:
        baseline_steps = baseline_steps_for(problem, hp)
    dropout_rate = hp.dropout if episode_key is not None else 0.0
    factory = mask_factory(dropout_rate, episode_key)
    cfg = ProverConfig(
        guidance=GUIDANCE_POLICY, mode="sample", temperature=tau,
        seed=int(rng.integers(2**31)), step_limit=hp.step_limit,
    )
    decisions = []
    result = saturate(problem, cfg, model=params, decision_log=decisions,
                      dropout_rate=dropout_rate if factory else 0.0,
                      mask_fn_factory=factory)
    solved = result.status == UNSATISFIABLE
    steps = max(result.stats["steps"], 1)
    reward = compute_reward(baseline_steps, steps, hp) if solved else 0.0
    return Trajectory(name, problem, decisions, result.status,
                      result.stats["steps"], baseline_steps, reward, tau,
                      dropout_rate if factory else 0.0, episode_key,
                      result.clauses)


def normalized_rewards(trajectories):
    rewards = np.array([t.reward for t in trajectories], dtype=np.float64)
    return (rewards - rewards.mean()) / (rewards.std() + 1e-8)


def _add_params(dst, src, scale=1.0):
    for (_, d), (_, s) in zip(gnn.param_blocks(dst), gnn.param_blocks(src)):
        d += scale * s


def _trajectory_embeddings(traj, params, hp_dropout_unused=None):
    """Recompute every embedding the trajectory's decisions touch,
    keeping traces for the backward pass."""
    factory = mask_factory(traj.dropout_rate, traj.dropout_key)
    rate = traj.dropout_rate if factory else 0.0
    tg = build_theory_graph(traj.problem)
    theory_mask = factory(b"theory") if factory else None
    sym, theory = gnn.theory_trace(tg, params, rate, theory_mask)
    needed = sorted({cid for d in traj.decisions
                     for cid in set(d.state_ids) | set(d.candidate_ids)})
    traces = {}
    embs = {}
    for cid in needed:
        clause = traj.clauses[cid]
        mask = factory(variant_key(clause)) if factory else None
        g, trace = gnn.clause_trace(clause, traj.problem.symbols, params,
                                    sym, rate, mask)
        traces[cid] = (g, trace)
        embs[cid] = trace.final[g.root]
    return tg, theory, sym, traces, embs


def _policy_term(traj, norm_reward, params, embs, upstream, grads):
    """Loss and gradient pieces for one trajectory's decisions; clause
    embedding gradients land in ``upstream``."""
    loss = 0.0
    w = params.w_attn
    for dec in traj.decisions:
        state = np.mean([embs[i] for i in dec.state_ids], axis=0)
        cand = np.stack([embs[i] for i in dec.candidate_ids])
        query = w @ state
        scores = cand @ query
        logits = scores / traj.tau
        shift = logits - logits.max()
        log_z = math.log(np.exp(shift).sum()) + logits.max()
        log_prob = float(logits[dec.chosen] - log_z)
        loss += -norm_reward * log_prob

        probs = np.exp(logits - log_z)
        dscores = np.zeros_like(scores)
        dscores[dec.chosen] = 1.0
        dscores = (-norm_reward / traj.tau) * (dscores - probs)

        weighted_cand = dscores @ cand
        grads.w_attn += np.outer(weighted_cand, state)
        dstate = w.T @ weighted_cand
        for i, cid in enumerate(dec.candidate_ids):
            upstream[cid] = upstream.get(cid, 0.0) + dscores[i] * query
        share = dstate / len(dec.state_ids)
        for cid in dec.state_ids:
            upstream[cid] = upstream.get(cid, 0.0) + share
    return loss


def loss_and_grads(trajectories, params, hp):
    """Batch REINFORCE loss with exact gradients for every parameter."""
    if not trajectories:
        raise ValueError("need at least one trajectory")
    norm = normalized_rewards(trajectories)
    grads = gnn.zeros_like_params(params)
    loss = 0.0
    for traj, reward in zip(trajectories, norm):
        if not traj.decisions or reward == 0.0:
            continue
        tg, theory, sym, traces, embs = _trajectory_embeddings(traj, params)
        upstream = {}
        loss += _policy_term(traj, reward, params, embs, upstream, grads)
        sym_grads = {}
        for cid, (g, trace) in traces.items():
            up = upstream.get(cid)
            if up is None:
                continue
            full = np.zeros_like(trace.final)
            full[g.root] = up
            layer_grads, d_init = gnn.backward(trace, params, full)
            _add_params(grads, layer_grads)
            gnn.scatter_init_grad(g, sym, d_init, grads, sym_grads)
        if sym_grads:
            full = np.zeros_like(theory.final)
            for sid, vec in sym_grads.items():
                full[tg.name_index[sid]] = vec
            layer_grads, d_init = gnn.backward(theory, params, full)
            _add_params(grads, layer_grads)
            gnn.scatter_init_grad(tg, None, d_init, grads)
    for (_, tensor), (_, gtensor) in zip(gnn.param_blocks(params),
                                         gnn.param_blocks(grads)):
        loss += hp.reg_lambda * float((tensor * tensor).sum())
        gtensor += 2.0 * hp.reg_lambda * tensor
    if not math.isfinite(loss):
        raise FloatingPointError("non-finite training loss")
    return loss, grads


def _batch_loss(trajectories, params, hp):
    """Loss only; used by the finite-difference harness."""
    norm = normalized_rewards(trajectories)
    loss = 0.0
    for traj, reward in zip(trajectories, norm):
        if not traj.decisions or reward == 0.0:
            continue
        _, _, _, _, embs = _trajectory_embeddings(traj, params)
        for dec in traj.decisions:
            state = np.mean([embs[i] for i in dec.state_ids], axis=0)
            cand = np.stack([embs[i] for i in dec.candidate_ids])
            logits = (cand @ (params.w_attn @ state)) / traj.tau
            shift = logits - logits.max()
            log_z = math.log(np.exp(shift).sum()) + logits.max()
            loss += -reward * float(logits[dec.chosen] - log_z)
    for _, tensor in gnn.param_blocks(params):
        loss += hp.reg_lambda * float((tensor * tensor).sum())
    return loss


@dataclass
class IterationLog:
    iteration: int
    tau: float
    mean_reward: float
    solved: int
    loss: float


def train_loop(dataset, hp, seed=0, checkpoint_fn=None, log_fn=None):
    """Iterate episodes, gradient epochs and temperature decay.

    ``dataset`` is a list of (name, Problem).  Returns the trained
    parameters and one IterationLog per iteration.
    """
    hp.validate()
    params = gnn.init_params(hp.dim, seed)
    baselines = {
        name: baseline_steps_for(problem, hp)
        for name, problem in dataset
    }
    tau = hp.tau0
    history = []
    for iteration in range(hp.iterations):
        trajectories = []
        for idx, (name, problem) in enumerate(dataset):
            ep_rng = np.random.default_rng([seed, iteration, idx])
            key = f"{seed}:{iteration}:{idx}".encode()
            trajectories.append(
                episode(problem, params, tau, ep_rng, hp, name=name,
                        baseline_steps=baselines[name], episode_key=key))
        solved = sum(t.status == UNSATISFIABLE for t in trajectories)
        mean_reward = float(np.mean([t.reward for t in trajectories]))
        loss = float("nan")
        for _ in range(hp.epochs):
            loss, grads = loss_and_grads(trajectories, params, hp)
            _add_params(params, grads, -hp.lr)
        entry = IterationLog(iteration, tau, mean_reward, solved, loss)
        history.append(entry)
        if log_fn is not None:
            log_fn(entry)
        if checkpoint_fn is not None:
            checkpoint_fn(iteration, params)
        tau *= hp.temp_decay
    return params, history


# ---------------------------------------------------------------------------
# Finite-difference harness

_CHECK_PROBLEM = """
cnf(a, axiom, (p(X) | q(X))).
cnf(b, axiom, (~p(a) | r(a))).
cnf(c, axiom, ~r(Y)).
cnf(goal, negated_conjecture, ~q(a)).
"""


def gradient_check(seed=0, dim=4, eps=1e-5, params=None, max_coords=None):
    """Max elementwise relative error of the analytic batch gradient
    against central finite differences, per parameter block.

    Dropout is off so the loss is deterministic in the parameters; the
    sampled trajectory is frozen before differentiation.
    """
    hp = HyperParams(dropout=0.0, step_limit=8, dim=dim, iterations=1)
    if params is None:
        params = gnn.init_params(dim, seed)
    problem = parse_problem(_CHECK_PROBLEM)
    rng = np.random.default_rng(seed)
    trajs = [
        episode(problem, params, tau=2.0, rng=rng, hp=hp, name="check"),
        episode(problem, params, tau=3.0, rng=rng, hp=hp, name="check2"),
    ]
    if all(not t.decisions for t in trajs):
        raise RuntimeError("gradient check episodes recorded no decisions")
    # give the batch reward variance so the policy term is exercised
    trajs[0].reward = 1.5
    trajs[1].reward = 1.0

    _, grads = loss_and_grads(trajs, params, hp)
    report = {}
    worst = 0.0
    for name, tensor in gnn.param_blocks(params):
        analytic = dict(gnn.param_blocks(grads))[name]
        flat = tensor.ravel()
        aflat = analytic.ravel()
        count = flat.size if max_coords is None else min(flat.size,
                                                         max_coords)
        block_worst = 0.0
        for k in range(count):
            orig = flat[k]
            flat[k] = orig + eps
            up = _batch_loss(trajs, params, hp)
            flat[k] = orig - eps
            down = _batch_loss(trajs, params, hp)
            flat[k] = orig
            fd = (up - down) / (2 * eps)
            rel = abs(aflat[k] - fd) / max(abs(aflat[k]), abs(fd), 1e-8)
            block_worst = max(block_worst, rel)
        report[name] = block_worst
        worst = max(worst, block_worst)
    return worst, report
