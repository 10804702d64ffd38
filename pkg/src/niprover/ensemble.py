"""Configuration portfolio: N independently configured runs sharing a
total budget split equally, with solved sets unioned.

Branch configurations enumerate (literal selection x tie break) pairs in a
fixed, documented order; once the six distinct pairs are exhausted the
enumeration wraps around with fresh seeds.  Budgets are per branch: in
seconds mode each branch gets total/N wall-clock; in steps mode the step
budget is split into integers that sum to the total exactly, which keeps
CI runs deterministic.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .logic import SELECT_ALL, SELECT_MAX_WEIGHT, SELECT_NEGATIVE
from .prover import (
    GUIDANCE_HEURISTIC,
    GUIDANCE_POLICY,
    ProverConfig,
    UNSATISFIABLE,
    saturate,
)

BUDGET_STEPS = "steps"
BUDGET_SECONDS = "seconds"

# fixed enumeration order for branch configurations
CONFIG_ORDER = (
    (SELECT_ALL, "age"),
    (SELECT_NEGATIVE, "age"),
    (SELECT_MAX_WEIGHT, "age"),
    (SELECT_ALL, "weight"),
    (SELECT_NEGATIVE, "weight"),
    (SELECT_MAX_WEIGHT, "weight"),
)


@dataclass
class EnsembleSpec:
    n: int
    total_budget: float
    budget_mode: str = BUDGET_STEPS
    configs: list = None

    def validate(self):
        if self.n < 1:
            raise ValueError("ensemble needs at least one branch")
        if self.budget_mode not in (BUDGET_STEPS, BUDGET_SECONDS):
            raise ValueError(f"unknown budget mode {self.budget_mode!r}")
        if self.total_budget <= 0:
            raise ValueError("total budget must be positive")
        if self.configs is not None and len(self.configs) != self.n:
            raise ValueError("need one config per branch")


@dataclass
class EnsembleResult:
    spec: EnsembleSpec
    records: list           # one dict per (problem, branch)
    solved_by_branch: list  # list of sets of problem names
    solved_union: set


def make_configs(n, base_seed=0, guidance=GUIDANCE_HEURISTIC, **overrides):
    """Deterministic branch configurations; seeds differ on wraparound."""
    if n < 1:
        raise ValueError("ensemble needs at least one branch")
    configs = []
    for i in range(n):
        selection, tie = CONFIG_ORDER[i % len(CONFIG_ORDER)]
        configs.append(ProverConfig(
            literal_selection=selection,
            tie_break=tie,
            guidance=guidance,
            seed=base_seed + i // len(CONFIG_ORDER),
            **overrides,
        ))
    return configs


def branch_budgets(total, n, mode):
    """Equal split; steps mode distributes the remainder so the parts sum
    to the total exactly."""
    if mode == BUDGET_SECONDS:
        return [total / n] * n
    total = int(total)
    base, rem = divmod(total, n)
    return [base + (1 if i < rem else 0) for i in range(n)]


def aggregate(spec, records):
    solved = [set() for _ in range(spec.n)]
    for rec in records:
        if rec["status"] == UNSATISFIABLE:
            solved[rec["branch"]].add(rec["problem"])
    union = set().union(*solved) if solved else set()
    return EnsembleResult(spec, records, solved, union)


def run_ensemble(problems, spec, models=None, max_workers=None):
    """Run every branch over every problem and union the solved sets.

    ``problems`` is a list of (name, Problem); ``models`` gives one
    checkpoint per branch for policy guidance (None entries fall back to
    heuristic branches as configured).
    """
    spec.validate()
    configs = spec.configs or make_configs(spec.n)
    budgets = branch_budgets(spec.total_budget, spec.n, spec.budget_mode)
    if models is None:
        models = [None] * spec.n

    def run_branch(branch):
        cfg = configs[branch]
        if spec.budget_mode == BUDGET_STEPS:
            cfg = replace(cfg, step_limit=budgets[branch])
        else:
            cfg = replace(cfg, time_limit=budgets[branch])
        if models[branch] is None and cfg.guidance == GUIDANCE_POLICY:
            cfg = replace(cfg, guidance=GUIDANCE_HEURISTIC)
        rows = []
        for name, problem in problems:
            result = saturate(problem, cfg, model=models[branch])
            rows.append({
                "problem": name,
                "branch": branch,
                "status": result.status,
                "steps": result.stats["steps"],
                "time_ms": result.stats["time_ms"],
                "budget": budgets[branch],
            })
        return rows

    records = []
    with ThreadPoolExecutor(max_workers=max_workers or spec.n) as pool:
        for rows in pool.map(run_branch, range(spec.n)):
            records.extend(rows)
    records.sort(key=lambda r: (r["problem"], r["branch"]))
    return aggregate(spec, records)


def render_report(result, manifest=None, include_time=True):
    """CSV rows plus a summary block with per-branch and union counts."""
    lines = []
    for key, value in (manifest or {}).items():
        lines.append(f"# {key}={value}")
    lines.append("problem,branch,status,steps,time_ms")
    for rec in result.records:
        time_field = f"{rec['time_ms']:.1f}" if include_time else ""
        lines.append(f"{rec['problem']},{rec['branch']},{rec['status']},"
                     f"{rec['steps']},{time_field}")
    n_problems = len({r["problem"] for r in result.records})
    lines.append("# summary")
    for i, solved in enumerate(result.solved_by_branch):
        budget = branch_budgets(result.spec.total_budget, result.spec.n,
                                result.spec.budget_mode)[i]
        unit = "steps" if result.spec.budget_mode == BUDGET_STEPS else "s"
        lines.append(f"# branch {i} (budget {budget} {unit}): "
                     f"{len(solved)}/{n_problems} solved")
    pct = 100.0 * len(result.solved_union) / n_problems if n_problems else 0.0
    lines.append(f"# union: {len(result.solved_union)}/{n_problems} solved"
                 f" ({pct:.1f}%)")
    return "\n".join(lines) + "\n"


def write_report(result, path, manifest=None, include_time=True):
    text = render_report(result, manifest, include_time)
    with open(path, "w") as fh:
        fh.write(text)
    return text
