"""Power-law fits and the sweep-budget scaling experiment."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .annealing import NotConvergedError, SqaRunConfig, ci_halfwidth, estimate_tau_s
from .io import fingerprint
from .problem import SpikeProblem


def fit_power_law(points) -> tuple:
    """Ordinary least squares of ``log y`` on ``log x``.

    Returns ``(slope, intercept, r_squared)`` with ``y ~ exp(intercept) * x**slope``.
    A perfect fit (including constant ``y``) reports ``r_squared = 1``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if pts.shape[0] < 3:
        raise ValueError(f"a power-law fit needs at least 3 points, got {pts.shape[0]}")
    if not np.all(pts > 0) or not np.all(np.isfinite(pts)):
        raise ValueError("power-law fit needs finite positive x and y")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0:
        raise ValueError("x values must not all be equal")
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    # constant y is fitted exactly by a zero slope
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(r2)


@dataclass(frozen=True)
class ScalingPoint:
    n: int
    L: int
    tau_s: int
    ci_halfwidth: float
    trials: int
    target_rate: float
    success_rate: float
    converged: bool = True


@dataclass
class ScalingResult:
    points: list
    exponent_z: float
    intercept: float
    r_squared: float
    config_fingerprint: str
    params: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @property
    def fitted(self) -> bool:
        return bool(np.isfinite(self.exponent_z))

    def summary(self) -> dict:
        return {
            "exponent_z": self.exponent_z,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "config_fingerprint": self.config_fingerprint,
            "points": [dataclasses.asdict(p) for p in self.points],
            "not_converged": [p.n for p in self.points if not p.converged],
            "params": self.params,
        }


def run_scaling_experiment(
    n_list,
    config_template: SqaRunConfig,
    trials: int = 20,
    target_rate: float = 0.5,
    seed: int | None = None,
    threads: int = 1,
    problem_factory=SpikeProblem,
    problem_label: str = "spike",
    progress=None,
) -> ScalingResult:
    """Estimate the sweep budget for every ``n`` and fit ``tau_s ~ n**z``.

    Sizes whose estimate hits the sweep cap are kept in ``points`` with
    ``converged=False`` and ``tau_s`` set to the cap, but left out of the fit.
    """
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ValueError("scaling needs at least 3 system sizes to fit an exponent")
    if n_list != sorted(n_list) or len(set(n_list)) != len(n_list):
        raise ValueError("n_list must be strictly ascending")
    if seed is not None:
        config_template = dataclasses.replace(config_template, seed=int(seed))
    params = {
        "n_list": n_list,
        "trials": trials,
        "target_rate": target_rate,
        "problem": problem_label,
        "config": {k: v for k, v in config_template.to_dict().items() if k not in ("n", "L", "trotter_number")},
    }
    points, records = [], []
    for n in n_list:
        problem = problem_factory(n)
        cfg = config_template.for_size(n)

        def log_budget(s, results, n=n):
            for r in results:
                w = r.final_lattice_weight_profile
                records.append({
                    "n": n,
                    "sweeps_per_gamma": s,
                    "stream_id": r.stream_id,
                    "success": r.success,
                    "min_weight": min(w),
                    "max_weight": max(w),
                })

        try:
            est = estimate_tau_s(problem, cfg, trials, target_rate, threads=threads, on_budget=log_budget)
            point = ScalingPoint(n, cfg.trotter_number, est.tau_s, est.ci_halfwidth, trials,
                                 target_rate, est.success_rate)
        except NotConvergedError as exc:
            k = exc.history[-1][1] if exc.history else 0
            point = ScalingPoint(n, cfg.trotter_number, exc.cap, ci_halfwidth(k, trials), trials,
                                 target_rate, k / trials, converged=False)
        points.append(point)
        if progress is not None:
            progress(point)

    good = [(p.n, p.tau_s) for p in points if p.converged]
    if len(good) >= 3:
        z, c, r2 = fit_power_law(good)
    else:
        z = c = r2 = float("nan")
    return ScalingResult(points, z, c, r2, fingerprint(params), params, records)
