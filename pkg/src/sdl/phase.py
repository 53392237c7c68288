"""Phase-transition sweeps over (dimension, sparsity) or (dimension, samples).

Two standard settings:

* setting 1: p follows ceil(5 n^2 log n); the grid varies n and the
  per-column sparsity k.
* setting 2: k follows ceil(0.2 n); the grid varies n and p.

Each cell runs ``trials`` independent single-vector solves on fresh
instances with the identity dictionary; a trial succeeds when the final
iterate lands within RE <= mu of a signed coordinate axis. Seeds derive
from the base seed and the cell coordinates only, so results are identical
regardless of execution order or worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidInput
from .geometry import Objective, random_sphere_point
from .model import sample_bg, sample_fixed_k
from .rng import make_rng, mix_seed
from .trm import TrmOptions, re_metric, trm_solve

CSV_HEADER = "n,k_or_p,trial,seed,RE,f_final,iters,success"
HEATMAP_CHARS = ".:-=#"  # success-fraction quintiles, low to high


def p_five_n2_log_n(n: int) -> int:
    """Sample-count rule ceil(5 n^2 log n) (natural log)."""
    return int(math.ceil(5.0 * n * n * math.log(n))) if n > 1 else 5


def k_fifth_of_n(n: int) -> int:
    return int(math.ceil(0.2 * n))


@dataclass
class ExperimentConfig:
    """Grid definition for a sweep.

    ``col_kind`` is "k" (setting 1, p from ``p_rule``) or "p" (setting 2,
    k = ceil(0.2 n)). ``p_rule`` is "5n2logn" or "fixed" with ``p_fixed``.
    ``coefficient_model`` is "fixed-k" (the default used for the figures)
    or "bg", in which case k/n is used as the Bernoulli rate.
    """

    n_values: list[int]
    col_values: list[int]
    col_kind: str = "k"
    p_rule: str = "5n2logn"
    p_fixed: int | None = None
    coefficient_model: str = "fixed-k"
    mu: float = 1e-2
    trials: int = 5
    base_seed: int = 0
    jobs: int = 1
    include_timestamp: bool = True
    solver: TrmOptions = field(default_factory=TrmOptions)

    def validate(self) -> None:
        if not self.n_values or not self.col_values:
            raise InvalidInput("grid axes must be nonempty")
        if self.trials < 1:
            raise InvalidInput("trials must be >= 1")
        if self.col_kind not in ("k", "p"):
            raise InvalidInput(f"unknown column kind {self.col_kind!r}")
        if self.p_rule not in ("5n2logn", "fixed"):
            raise InvalidInput(f"unknown p rule {self.p_rule!r}")
        if self.p_rule == "fixed" and (self.p_fixed is None or self.p_fixed < 1):
            raise InvalidInput("fixed p rule needs a positive p_fixed")
        if self.coefficient_model not in ("fixed-k", "bg"):
            raise InvalidInput(f"unknown coefficient model {self.coefficient_model!r}")
        if any(n < 2 for n in self.n_values):
            raise InvalidInput("n must be >= 2")

    def cell_params(self, i: int, j: int) -> tuple[int, int, int]:
        """(n, k, p) for grid cell (i, j)."""
        n = self.n_values[i]
        if self.col_kind == "k":
            k = self.col_values[j]
            p = self.p_fixed if self.p_rule == "fixed" else p_five_n2_log_n(n)
        else:
            k = k_fifth_of_n(n)
            p = self.col_values[j]
        return n, k, p


@dataclass
class TrialResult:
    n: int
    k_or_p: int
    trial: int
    seed: int
    re: float
    f_final: float
    iters: int
    success: bool


@dataclass
class PhaseGrid:
    n_values: list[int]
    col_values: list[int]
    col_kind: str
    trials: int
    successes: np.ndarray  # (len(n_values), len(col_values)) ints in 0..trials

    def fractions(self) -> np.ndarray:
        return self.successes / float(self.trials)

    def text_heatmap(self) -> str:
        """Character grid, one row per n (quintile glyphs, '#' = all succeed)."""
        frac = self.fractions()
        width = max(len(str(v)) for v in self.col_values)
        lines = [f"{self.col_kind} ->".rjust(6) + " "
                 + " ".join(str(v).rjust(width) for v in self.col_values)]
        for i, n in enumerate(self.n_values):
            cells = [HEATMAP_CHARS[min(4, int(f * 5))].rjust(width)
                     for f in frac[i]]
            lines.append(f"n={n}".rjust(6) + " " + " ".join(cells))
        return "\n".join(lines)


def run_single_trial(n: int, k: int, p: int, mu: float, seed: int,
                     solver: TrmOptions,
                     coefficient_model: str = "fixed-k") -> tuple[float, float, int]:
    """One seeded solve; returns (RE, f_final, iterations)."""
    data_rng = make_rng(mix_seed(seed, 0xDA7A))
    if coefficient_model == "bg":
        x0 = sample_bg(n, p, k / n, data_rng)
    else:
        x0 = sample_fixed_k(n, p, k, data_rng)
    obj = Objective(x0, mu)
    q0 = random_sphere_point(n, make_rng(mix_seed(seed, 0x57A7)))
    report = trm_solve(obj, replace(solver, seed=seed), q0=q0)
    return re_metric(report.q_final), report.f_final, report.num_iters


def _trial_task(args):
    cfg, i, j, t = args
    n, k, p = cfg.cell_params(i, j)
    seed = cfg.base_seed ^ mix_seed(0, i, j, t)
    re, f_final, iters = run_single_trial(n, k, p, cfg.mu, seed, cfg.solver,
                                          cfg.coefficient_model)
    k_or_p = k if cfg.col_kind == "k" else p
    return i, j, TrialResult(n=n, k_or_p=k_or_p, trial=t, seed=seed, re=re,
                             f_final=f_final, iters=iters,
                             success=re <= cfg.mu)


def run_phase_sweep(cfg: ExperimentConfig) -> tuple[PhaseGrid, list[TrialResult]]:
    """Run the full grid; results are ordered by (n index, column index, trial)."""
    cfg.validate()
    tasks = [(cfg, i, j, t)
             for i in range(len(cfg.n_values))
             for j in range(len(cfg.col_values))
             for t in range(cfg.trials)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            raw = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        raw = [_trial_task(task) for task in tasks]

    successes = np.zeros((len(cfg.n_values), len(cfg.col_values)), dtype=int)
    ordered: dict[tuple[int, int, int], TrialResult] = {}
    for i, j, res in raw:
        ordered[(i, j, res.trial)] = res
        successes[i, j] += int(res.success)
    results = [ordered[(i, j, t)]
               for i in range(len(cfg.n_values))
               for j in range(len(cfg.col_values))
               for t in range(cfg.trials)]
    grid = PhaseGrid(n_values=list(cfg.n_values), col_values=list(cfg.col_values),
                     col_kind=cfg.col_kind, trials=cfg.trials,
                     successes=successes)
    return grid, results


def sweep_csv_lines(results: list[TrialResult],
                    include_timestamp: bool = True) -> list[str]:
    lines = []
    if include_timestamp:
        lines.append("# generated " + time.strftime("%Y-%m-%dT%H:%M:%S"))
    lines.append(CSV_HEADER)
    for r in results:
        lines.append(
            f"{r.n},{r.k_or_p},{r.trial},{r.seed},{r.re:.12e},"
            f"{r.f_final:.12e},{r.iters},{int(r.success)}"
        )
    return lines


def write_sweep_csv(path, results: list[TrialResult],
                    include_timestamp: bool = True) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(sweep_csv_lines(results, include_timestamp)) + "\n")


def grid_csv_lines(grid: PhaseGrid) -> list[str]:
    """Success-count heatmap as CSV: one row per n, one column per k or p."""
    lines = ["n\\" + grid.col_kind + ","
             + ",".join(str(v) for v in grid.col_values)]
    for i, n in enumerate(grid.n_values):
        lines.append(str(n) + ","
                     + ",".join(str(int(c)) for c in grid.successes[i]))
    return lines


def write_grid_csv(path, grid: PhaseGrid) -> None:
    with open(path, "w") as fh:
        fh.write("\n".join(grid_csv_lines(grid)) + "\n")
