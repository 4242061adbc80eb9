"""Training loop, convergence truncation, and width/depth scaling sweeps."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from .basis import SectorBasis, build_sector_basis
from .ed import GroundStateSolution, ground_state
from .models import SparseHamiltonian, build_heisenberg, build_syk_hamiltonian, sample_syk_couplings
from .nqs import Architecture, NetworkParams, init_params, num_params
from .optimize import AdamConfig, NumericalError, Objective, adam_step, init_optimizer

__all__ = [
    "Problem",
    "ScalingResult",
    "TrainSettings",
    "TrainingRecord",
    "build_hamiltonian",
    "build_problem",
    "fitted_slope",
    "record_rows",
    "scaling_sweep",
    "smooth",
    "t_star_min",
    "train",
    "truncation_verdict",
    "write_records_csv",
    "write_records_jsonl",
]

log = logging.getLogger(__name__)

CONVERGED, TRUNCATED, EXHAUSTED, FAILED = "converged", "truncated", "exhausted", "failed"
CONTINUE, TRUNCATE = "continue", "truncate"


# ---------------------------------------------------------------- problems

@dataclass(frozen=True, eq=False)
class Problem:
    """A model instance with its exact ground state."""

    model: str
    L: int
    coupling_seed: int | None
    basis: SectorBasis
    H: SparseHamiltonian
    gs: GroundStateSolution

    @property
    def dim(self) -> int:
        return self.basis.dim

    def objective(self, loss: str = "overlap") -> Objective:
        return Objective(loss, self.basis, H=self.H, gs=self.gs)


def build_hamiltonian(model: str, L: int, coupling_seed: int | None = None):
    """Half-filling basis and the model Hamiltonian on it."""
    basis = build_sector_basis(L, L // 2)
    if model == "syk":
        if coupling_seed is None:
            raise ValueError("SYK needs an explicit coupling seed")
        H = build_syk_hamiltonian(sample_syk_couplings(L, coupling_seed), basis)
    elif model == "heisenberg":
        H = build_heisenberg(L, basis)
    else:
        raise ValueError(f"unknown model {model!r}")
    return basis, H


def build_problem(model: str, L: int, coupling_seed: int | None = None, lanczos_seed: int = 0,
                  tol: float = 1e-10) -> Problem:
    basis, H = build_hamiltonian(model, L, coupling_seed)
    return Problem(model, L, coupling_seed, basis, H, ground_state(H, tol=tol, seed=lanczos_seed))


# ------------------------------------------------------- truncation scheme

def smooth(trajectory, window: int) -> np.ndarray:
    """Flat centred moving average; windows shrink (one-sided) at the ends."""
    y = np.asarray(trajectory, dtype=float)
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    if window > len(y):
        raise ValueError(f"window {window} longer than series of length {len(y)}")
    half = window // 2
    c = np.concatenate([[0.0], np.cumsum(y)])
    idx = np.arange(len(y))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, len(y))
    return (c[hi] - c[lo]) / (hi - lo)


def fitted_slope(series: np.ndarray, t: int, window: int) -> float:
    """Least-squares slope over the trailing ``window`` points ending at ``t``."""
    window = max(window, 2)
    lo = max(0, t - window + 1)
    if t - lo < 1:
        raise ValueError(f"need at least two points to fit a slope at t={t}")
    x = np.arange(lo, t + 1, dtype=float)
    y = series[lo:t + 1]
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def t_star_min(delta_e: float, slope: float, threshold: float) -> float:
    """Steps to reach ``threshold`` at the current slope (a lower bound
    when the slope magnitude only decreases)."""
    if slope == 0:
        return math.inf
    return (delta_e - threshold) / abs(slope)


def truncation_verdict(delta_e, delta_t: int, threshold: float, window: int = 2001,
                       t_floor: int = 0) -> str:
    """Decide whether a run above threshold is still trending to convergence.

    The raw ``delta_e`` history (one value per step) is smoothed; the
    convergence estimate ``t*`` is evaluated at the last fully smoothed step
    ``t2`` and at ``t1 = t2 - delta_t`` and ``t0 = t1 - delta_t`` (``t0``
    clipped to the first point with a complete slope window).  With
    ``d(a, b) = (t*(b) - t*(a)) / (b - a)`` the run continues iff
    ``d(t1, t2) < d(t0, t1)``.
    """
    y = np.asarray(delta_e, dtype=float)
    n = len(y)
    if n < t_floor:
        raise ValueError(f"need at least {t_floor} steps of history, have {n}")
    half = window // 2
    slope_w = max(window, 2)
    earliest = half + slope_w - 1
    t2 = n - 1 - half
    t1 = t2 - delta_t
    if delta_t < 1 or t1 <= earliest:
        raise ValueError(f"history of {n} steps too short for delta_t={delta_t}, window={window}")
    t0 = max(t1 - delta_t, earliest)

    s = smooth(y, window)
    if y.min() < threshold or s.min() < threshold:
        return CONTINUE
    ts = [t0, t1, t2]
    tstar = [t_star_min(s[t], fitted_slope(s, t, window), threshold) for t in ts]
    with np.errstate(invalid="ignore"):
        d_prev = (tstar[1] - tstar[0]) / (t1 - t0)
        d_last = (tstar[2] - tstar[1]) / (t2 - t1)
    if math.isnan(d_prev) or math.isnan(d_last):
        return TRUNCATE
    return CONTINUE if d_last < d_prev else TRUNCATE


# ---------------------------------------------------------------- training

@dataclass(frozen=True)
class TrainSettings:
    loss: str = "overlap"
    adam: AdamConfig = AdamConfig()
    t_max: int = 200_000
    threshold: float = 1e-3
    truncation: bool = True
    delta_t: int = 100_000
    window: int = 2001
    max_steps: int | None = None
    eval_stride: int = 1
    early_stop: bool = True  # stop once delta_e < threshold

    def to_dict(self) -> dict:
        d = asdict(self)
        d["adam"]["schedule"] = [list(x) for x in self.adam.schedule]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainSettings":
        d = dict(d)
        adam = dict(d.pop("adam", {}))
        adam["schedule"] = tuple(tuple(x) for x in adam.get("schedule", ()))
        return cls(adam=AdamConfig(**adam), **d)


@dataclass(eq=False)
class TrainingRecord:
    config: dict
    overlap: np.ndarray = field(repr=False)
    delta_e: np.ndarray = field(repr=False)
    steps: np.ndarray = field(repr=False)
    best_delta_e: float
    best_step: int
    verdict: str
    best_params: NetworkParams | None = field(default=None, repr=False)
    final_params: NetworkParams | None = field(default=None, repr=False)
    wall_time: float = 0.0
    failure: str | None = None

    @property
    def n_steps(self) -> int:
        return int(self.steps[-1]) + 1 if len(self.steps) else 0

    def summary(self) -> dict:
        return {
            "config": self.config,
            "best_delta_e": self.best_delta_e,
            "best_step": self.best_step,
            "final_overlap_loss": float(self.overlap[-1]) if len(self.overlap) else None,
            "steps": self.n_steps,
            "verdict": self.verdict,
            "wall_time": self.wall_time,
            "failure": self.failure,
        }


def train(objective: Objective, arch: Architecture, init_seed: int,
          settings: TrainSettings = TrainSettings(), params: NetworkParams | None = None,
          config: dict | None = None) -> TrainingRecord:
    """Adam on ``objective`` until ``delta_e < threshold`` or the budget runs out.

    After ``t_max`` steps, runs above threshold are checked with
    :func:`truncation_verdict` and, when still trending to convergence,
    extended by blocks of ``delta_t`` up to ``max_steps``.
    """
    if objective.E_gs is None or objective.H is None:
        raise ValueError("training monitors delta_e and needs both H and E_gs")
    if objective.kind != settings.loss:
        raise ValueError(f"objective kind {objective.kind!r} != settings.loss {settings.loss!r}")
    cfg = dict(config or {})
    cfg.update(arch=arch.to_dict(), init_seed=init_seed, settings=settings.to_dict())

    params = init_params(arch, init_seed) if params is None else params
    state = init_optimizer(params, settings.adam)
    budget = settings.t_max
    cap = settings.max_steps if settings.max_steps is not None else 10 * settings.t_max
    stride = settings.eval_stride

    overlap, delta_e, steps = [], [], []
    best = (math.inf, -1, params)
    verdict, failure = EXHAUSTED, None
    start = time.perf_counter()
    t = 0
    try:
        while True:
            loss, grad = objective.evaluate(params, with_grad=True)
            if t % stride == 0:
                ov = loss.value if objective.kind == "overlap" else math.nan
                overlap.append(ov)
                delta_e.append(loss.delta_e)
                steps.append(t)
                if loss.delta_e < best[0]:
                    best = (loss.delta_e, t, params)
                if loss.delta_e < settings.threshold:
                    verdict = CONVERGED
                    if settings.early_stop:
                        break
            if t + 1 >= budget:
                if verdict == CONVERGED:
                    break
                if not settings.truncation or budget >= cap:
                    verdict = EXHAUSTED
                    break
                # strided histories are interpolated back to one value per step
                hist = np.interp(np.arange(t + 1), steps, delta_e) if stride > 1 else np.asarray(delta_e)
                if truncation_verdict(hist, settings.delta_t, settings.threshold, settings.window) == TRUNCATE:
                    verdict = TRUNCATED
                    break
                budget = min(budget + settings.delta_t, cap)
            params, state = adam_step(state, params, grad.view(np.float64))
            t += 1
    except (NumericalError, FloatingPointError) as exc:
        verdict, failure = FAILED, str(exc)
        log.warning("training failed at step %d: %s", t, exc)

    return TrainingRecord(
        config=cfg,
        overlap=np.asarray(overlap),
        delta_e=np.asarray(delta_e, dtype=float),
        steps=np.asarray(steps, dtype=np.int64),
        best_delta_e=float(best[0]),
        best_step=int(best[1]),
        verdict=verdict,
        best_params=best[2].copy(),
        final_params=params,
        wall_time=time.perf_counter() - start,
        failure=failure,
    )


# ----------------------------------------------------------------- sweeps

@dataclass(eq=False)
class ScalingResult:
    L: int
    axis: str
    grid: list
    seeds: list
    delta_e_min: np.ndarray = field(repr=False)  # (len(grid), len(seeds))
    value_min: int | None
    n_par: int | None
    dim_h: int
    records: list = field(default_factory=list, repr=False)

    @property
    def unbounded(self) -> bool:
        return self.value_min is None

    def stats(self) -> list[dict]:
        return [
            {"value": v, "mean": float(np.mean(row)), "min": float(np.min(row)), "max": float(np.max(row))}
            for v, row in zip(self.grid, self.delta_e_min)
        ]


def _arch_for(axis: str, value: int, L: int, fixed: dict) -> Architecture:
    if axis == "alpha":
        return Architecture(L, value, fixed.get("mu", 2), fixed.get("activation", "selu"))
    if axis == "mu":
        return Architecture(L, fixed.get("alpha", 4), value, fixed.get("activation", "selu"))
    raise ValueError(f"axis must be 'alpha' or 'mu', got {axis!r}")


def _run_point(problem: Problem, arch: Architecture, seed: int, settings: TrainSettings) -> TrainingRecord:
    cfg = {"model": problem.model, "L": problem.L, "coupling_seed": problem.coupling_seed,
           "n_par": num_params(arch), "dim_h": problem.dim}
    return train(problem.objective(settings.loss), arch, seed, settings, config=cfg)


def scaling_sweep(problems, axis: str, grid, seeds=(0, 1, 2, 3), settings: TrainSettings = TrainSettings(),
                  fixed: dict | None = None, n_jobs: int = 1) -> list[ScalingResult]:
    """Train every (grid value x seed) per problem and locate the critical value.

    ``fixed`` holds the architecture fields not being swept (``mu=2`` for
    the width axis, ``alpha=4`` for the depth axis by default).  The critical
    value is the smallest grid entry whose best seed reached the threshold.
    """
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError(f"sweep grid must be strictly increasing, got {grid}")
    fixed = fixed or {}
    seeds = list(seeds)
    results = []
    for problem in problems:
        jobs = [(_arch_for(axis, v, problem.L, fixed), s) for v in grid for s in seeds]
        if n_jobs > 1:
            with ProcessPoolExecutor(n_jobs) as pool:
                futures = [pool.submit(_run_point, problem, a, s, settings) for a, s in jobs]
                records = [f.result() for f in futures]
        else:
            records = [_run_point(problem, a, s, settings) for a, s in jobs]
        table = np.array([r.best_delta_e for r in records]).reshape(len(grid), len(seeds))
        value_min = next((v for v, row in zip(grid, table) if row.min() < settings.threshold), None)
        n_par = num_params(_arch_for(axis, value_min, problem.L, fixed)) if value_min is not None else None
        results.append(ScalingResult(problem.L, axis, grid, seeds, table, value_min, n_par,
                                     comb(problem.L, problem.L // 2), records))
        log.info("L=%d axis=%s critical=%s n_par=%s", problem.L, axis, value_min, n_par)
    return results


# ------------------------------------------------------------------ output

RECORD_COLUMNS = ["L", "axis_value", "seed", "best_delta_e", "steps", "verdict", "n_par", "dim_h"]


def record_rows(results: list[ScalingResult]) -> list[list]:
    """One CSV row per (L, swept value, seed), in ``RECORD_COLUMNS`` order."""
    rows = []
    for res in results:
        for i, v in enumerate(res.grid):
            for j, seed in enumerate(res.seeds):
                rec = res.records[i * len(res.seeds) + j]
                rows.append([res.L, v, seed, repr(rec.best_delta_e), rec.n_steps, rec.verdict,
                             rec.config["n_par"], res.dim_h])
    return rows


def write_records_csv(results: list[ScalingResult], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        w.writerows(record_rows(results))
    return path


def write_records_jsonl(records, path, extra: dict | None = None) -> Path:
    path = Path(path)
    with path.open("a") as fh:
        for rec in records:
            row = rec.summary()
            if extra:
                row.update(extra)
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return path
