"""Experiment orchestration and reporting.

Iteration-count sweeps over the random quadratic family, the planar
Rosenbrock iteration table, and performance profiles over a cost matrix.
All writers emit deterministic bytes: fixed row order and floats at 17
significant digits, so identical runs produce identical files.
"""

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from . import quadratic, solver
from .errors import AllFailedOnProblemError, InvalidParameterError, StlsbbError
from .steps import parse_policy

CAP_MARK = "--"


def fmt17(x):
    """Floats at 17 significant digits; round-trips float64 exactly."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentGrid:
    """Cross product of spectrum recipes, condition numbers, tolerances,
    seeds and policies at one dimension."""

    n: int
    setting_ids: tuple = (1,)
    kappas: tuple = (1e4,)
    epsilons: tuple = (1e-6,)
    seeds: tuple = tuple(range(10))
    policies: tuple = ("bb1", "bb2", "gamma:1", "gamma:20")
    max_iter: int = 20000

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "setting_ids", tuple(int(s) for s in self.setting_ids))
        object.__setattr__(self, "kappas", tuple(float(k) for k in self.kappas))
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "policies", tuple(str(p) for p in self.policies))
        object.__setattr__(self, "max_iter", int(self.max_iter))
        for name in ("setting_ids", "kappas", "epsilons", "seeds", "policies"):
            if not getattr(self, name):
                raise InvalidParameterError(f"grid axis {name} is empty")
        for e in self.epsilons:
            if not (0.0 < e < 1.0):
                raise InvalidParameterError(f"epsilon must lie in (0, 1), got {e!r}")
        for p in self.policies:
            parse_policy(p)  # fail early on typos

    def cell_count(self):
        return (
            len(self.setting_ids)
            * len(self.kappas)
            * len(self.epsilons)
            * len(self.seeds)
            * len(self.policies)
        )


@dataclass(frozen=True)
class SweepCell:
    """One solver run on one instance, with enough provenance to replay it."""

    setting_id: int
    kappa: float
    epsilon: float
    seed: int
    n: int
    policy: str
    max_iter: int
    iterations: int | None
    solved: bool
    status: str  # "ok", "cap", or "error:<type>"

    def cost(self):
        """Profile cost: iterations when solved, +inf otherwise."""
        return float(self.iterations) if self.solved else math.inf

    def problem_key(self):
        return (self.setting_id, self.kappa, self.epsilon, self.seed)


def run_quadratic_sweep(grid, progress=None):
    """Run every grid cell; returns SweepCells in deterministic grid order
    (setting, kappa, epsilon, seed, policy, outermost first).

    A cell that hits the iteration cap is recorded at the cap with
    solved=False; a cell that raises is recorded as an error marker, and
    neither aborts the sweep.  progress, when given, is called with each
    finished cell.
    """
    cells = []
    instances = {}
    for sid in grid.setting_ids:
        for kappa in grid.kappas:
            for eps in grid.epsilons:
                for seed in grid.seeds:
                    key = (sid, kappa, seed)
                    for pol in grid.policies:
                        iterations = None
                        solved = False
                        try:
                            inst = instances.get(key)
                            if inst is None:
                                setting = quadratic.SpectrumSetting(sid, kappa)
                                inst = quadratic.generate_instance(grid.n, setting, seed)
                                instances[key] = inst
                            tr = quadratic.solve_bb(
                                inst, parse_policy(pol), eps, grid.max_iter
                            )
                            iterations = tr.iterations
                            solved = tr.solved
                            status = "ok" if solved else "cap"
                        except StlsbbError as exc:
                            status = f"error:{type(exc).__name__}"
                        cell = SweepCell(
                            setting_id=sid, kappa=kappa, epsilon=eps, seed=seed,
                            n=grid.n, policy=pol, max_iter=grid.max_iter,
                            iterations=iterations, solved=solved, status=status,
                        )
                        cells.append(cell)
                        if progress is not None:
                            progress(cell)
    return cells


def average_table(cells):
    """Mean iteration count per (setting, kappa, epsilon, policy) over
    seeds; capped cells enter the mean at the cap value and are counted in
    'failed', error cells are excluded from the mean entirely."""
    groups = {}
    order = []
    for c in cells:
        key = (c.setting_id, c.kappa, c.epsilon, c.n, c.policy)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(c)
    rows = []
    for key in order:
        members = groups[key]
        counted = [c for c in members if c.iterations is not None]
        mean = (
            sum(c.iterations for c in counted) / len(counted) if counted else math.nan
        )
        rows.append(
            {
                "setting": key[0],
                "kappa": key[1],
                "epsilon": key[2],
                "n": key[3],
                "policy": key[4],
                "seeds": len(members),
                "failed": sum(1 for c in members if not c.solved),
                "mean_iterations": mean,
            }
        )
    return rows


_SWEEP_HEADER = [
    "setting", "kappa", "epsilon", "seed", "n", "policy",
    "max_iter", "iterations", "status",
]


def sweep_to_csv(cells):
    """Cells as deterministic CSV text; every row is self-contained."""
    buf = io.StringIO()
    buf.write("# stlsbb-sweep-v1 stop_rule=grad_rel alpha0_rule=inf_norm x0=ones\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_SWEEP_HEADER)
    for c in cells:
        w.writerow(
            [
                c.setting_id, fmt17(c.kappa), fmt17(c.epsilon), c.seed, c.n,
                c.policy, c.max_iter,
                "" if c.iterations is None else c.iterations, c.status,
            ]
        )
    return buf.getvalue()


def sweep_from_csv(text):
    """Inverse of sweep_to_csv."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows or rows[0] != _SWEEP_HEADER:
        raise InvalidParameterError("not a sweep CSV (missing or wrong header row)")
    cells = []
    for r in rows[1:]:
        iterations = None if r[7] == "" else int(r[7])
        cells.append(
            SweepCell(
                setting_id=int(r[0]), kappa=float(r[1]), epsilon=float(r[2]),
                seed=int(r[3]), n=int(r[4]), policy=r[5], max_iter=int(r[6]),
                iterations=iterations, solved=r[8] == "ok", status=r[8],
            )
        )
    return cells


def averages_to_csv(avg_rows):
    buf = io.StringIO()
    buf.write("# stlsbb-averages-v1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["setting", "kappa", "epsilon", "n", "policy", "seeds", "failed",
                "mean_iterations"])
    for r in avg_rows:
        w.writerow(
            [
                r["setting"], fmt17(r["kappa"]), fmt17(r["epsilon"]), r["n"],
                r["policy"], r["seeds"], r["failed"], fmt17(r["mean_iterations"]),
            ]
        )
    return buf.getvalue()


def sweep_to_json(cells):
    return json.dumps(
        {
            "format": "stlsbb-sweep-v1",
            "stop_rule": "grad_rel",
            "alpha0_rule": "inf_norm",
            "x0": "ones",
            "cells": [
                {
                    "setting": c.setting_id, "kappa": c.kappa, "epsilon": c.epsilon,
                    "seed": c.seed, "n": c.n, "policy": c.policy,
                    "max_iter": c.max_iter, "iterations": c.iterations,
                    "status": c.status,
                }
                for c in cells
            ],
        },
        indent=2,
    )


@dataclass(frozen=True)
class RosenbrockTable:
    """Iteration counts per (epsilon, policy); None marks a cap hit."""

    epsilons: tuple
    policies: tuple
    counts: tuple  # counts[i][j] for epsilons[i] x policies[j]

    def count(self, epsilon, policy):
        i = self.epsilons.index(epsilon)
        j = self.policies.index(policy)
        return self.counts[i][j]

    def render(self):
        """Plain-text table with cap hits shown as '--'."""
        width = max(12, max(len(p) for p in self.policies) + 2)
        head = "epsilon".ljust(12) + "".join(p.rjust(width) for p in self.policies)
        lines = [head]
        for i, eps in enumerate(self.epsilons):
            cells = "".join(
                (CAP_MARK if c is None else str(c)).rjust(width)
                for c in self.counts[i]
            )
            lines.append(f"{eps:<12g}" + cells)
        return "\n".join(lines)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# stlsbb-rosenbrock-v1 x0=-1.2,1 alpha0=1 stop=point_dist\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "policy", "iterations"])
        for i, eps in enumerate(self.epsilons):
            for j, pol in enumerate(self.policies):
                c = self.counts[i][j]
                w.writerow([fmt17(eps), pol, CAP_MARK if c is None else c])
        return buf.getvalue()


def run_rosenbrock_table(
    epsilons=(1e-1, 1e-2, 1e-4, 1e-8),
    policies=("bb1", "bb2", "gamma:1", "gamma:1.5"),
    max_iter=5000,
):
    """Iteration counts on the planar Rosenbrock valley.

    Each run starts at (-1.2, 1) with opening steplength 1 and stops when
    the iterate is within epsilon of the minimizer (1, 1); a run that
    exhausts max_iter first gets None.  Every cell is an independent run.
    """
    obj = solver.rosenbrock2()
    target = np.array([1.0, 1.0])
    counts = []
    for eps in epsilons:
        row = []
        for pol in policies:
            config = solver.SolverConfig(
                epsilon=float(eps),
                max_iter=int(max_iter),
                alpha0=1.0,
                stop_rule=solver.STOP_POINT_DIST,
                target=target,
            )
            tr = solver.run(obj, obj.x0, config, parse_policy(pol))
            row.append(tr.iterations if tr.solved else None)
        counts.append(tuple(row))
    return RosenbrockTable(
        epsilons=tuple(float(e) for e in epsilons),
        policies=tuple(policies),
        counts=tuple(counts),
    )


@dataclass(frozen=True)
class ProfileTable:
    """Performance ratios r[p, s] = cost[p, s] / min_s cost[p, s], with
    +inf marking failures."""

    solvers: tuple
    ratios: np.ndarray

    def __post_init__(self):
        r = np.array(self.ratios, dtype=float, copy=True)
        r.setflags(write=False)
        object.__setattr__(self, "ratios", r)
        object.__setattr__(self, "solvers", tuple(self.solvers))

    @property
    def problems(self):
        return self.ratios.shape[0]

    def _col(self, s):
        if isinstance(s, str):
            s = self.solvers.index(s)
        return self.ratios[:, s]

    def rho(self, s, theta):
        """Fraction of problems solver s solves within a factor theta of
        the per-problem best."""
        if not theta >= 1.0:
            raise InvalidParameterError(f"theta must be >= 1, got {theta!r}")
        return float(np.mean(self._col(s) <= theta))

    def solve_fraction(self, s):
        """rho at theta -> inf: the fraction of problems solved at all."""
        return float(np.mean(np.isfinite(self._col(s))))

    def thresholds(self):
        """Sorted unique finite ratios (always starting at 1), the points
        where some rho curve steps."""
        finite = self.ratios[np.isfinite(self.ratios)]
        return np.unique(np.concatenate(([1.0], finite)))

    def to_csv(self):
        buf = io.StringIO()
        buf.write("# stlsbb-profile-v1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta"] + list(self.solvers))
        for theta in self.thresholds():
            w.writerow([fmt17(theta)] + [fmt17(self.rho(j, theta))
                                         for j in range(len(self.solvers))])
        return buf.getvalue()


def performance_profile(costs, solvers=None):
    """Build a ProfileTable from a (problems x solvers) cost matrix.

    Costs must be positive; nan or inf marks failure and maps to ratio
    +inf.  Raises AllFailedOnProblemError when some problem row has no
    finite cost, since its best-cost denominator would be undefined.
    """
    c = np.array(costs, dtype=float)
    if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 2:
        raise InvalidParameterError(
            "cost matrix must be 2-D with at least 1 problem and 2 solvers"
        )
    if solvers is None:
        solvers = tuple(f"s{j}" for j in range(c.shape[1]))
    elif len(solvers) != c.shape[1]:
        raise InvalidParameterError("solver names do not match the matrix width")
    c[~np.isfinite(c)] = math.inf
    if np.any(c <= 0.0):
        raise InvalidParameterError("costs must be positive")
    best = c.min(axis=1)
    bad = np.where(~np.isfinite(best))[0]
    if bad.size:
        raise AllFailedOnProblemError(
            f"every solver failed on problem row(s) {bad.tolist()}"
        )
    return ProfileTable(solvers=tuple(solvers), ratios=c / best[:, None])


def profile_from_cells(cells):
    """Pivot sweep cells into a profile: problems are (setting, kappa,
    epsilon, seed), solvers are policies, cost is the iteration count with
    cap or error as failure."""
    problems = []
    solvers_ = []
    for c in cells:
        k = c.problem_key()
        if k not in problems:
            problems.append(k)
        if c.policy not in solvers_:
            solvers_.append(c.policy)
    costs = np.full((len(problems), len(solvers_)), math.inf)
    for c in cells:
        costs[problems.index(c.problem_key()), solvers_.index(c.policy)] = c.cost()
    return performance_profile(costs, solvers_)


def profile_from_matrix_csv(text):
    """Profile from a generic cost-matrix CSV: a header row naming the
    first column freely and one column per solver, then one row per
    problem.  Empty cells and the tokens nan/inf/fail/-- mean failure."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if len(rows) < 2 or len(rows[0]) < 3:
        raise InvalidParameterError(
            "cost matrix CSV needs a header row and at least 1 problem x 2 solvers"
        )
    solvers_ = tuple(h.strip() for h in rows[0][1:])
    costs = []
    for r in rows[1:]:
        vals = []
        for cell in r[1:]:
            token = cell.strip().lower()
            if token in ("", "nan", "inf", "fail", CAP_MARK):
                vals.append(math.inf)
            else:
                vals.append(float(cell))
        costs.append(vals)
    return performance_profile(np.array(costs), solvers_)
