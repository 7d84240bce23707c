"""Classical simulated annealing baseline on the spike objective.

Moves are single-bit Metropolis flips at uniformly random positions, ``n``
proposals per sweep, at each inverse temperature of a geometric ladder. Because
the objective only depends on the Hamming weight, the weight performs an exact
birth-death chain on ``{0..n}``; :func:`exact_success_probability` propagates
that chain with dense matrices and serves as the oracle for the sampler.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from . import _kernels
from .annealing import TrialResult, wilson_interval
from .problem import SpikeProblem
from .rng import RngStream


def geometric_beta_schedule(beta_0: float = 0.1, ratio: float = 1.3, beta_final: float = 32.0) -> tuple:
    """``beta_k = beta_0 * ratio**k`` while below ``beta_final``, then ``beta_final`` itself."""
    if not (beta_0 > 0 and ratio > 1 and beta_final > beta_0):
        raise ValueError("need beta_0 > 0, ratio > 1 and beta_final > beta_0")
    betas = []
    b = float(beta_0)
    while b < beta_final:
        betas.append(b)
        b *= ratio
    betas.append(float(beta_final))
    return tuple(betas)


@dataclass(frozen=True)
class SaRunConfig:
    n: int
    beta_schedule: tuple = dataclasses.field(default_factory=geometric_beta_schedule)
    sweeps_per_beta: int = 1
    seed: int = 0

    def __post_init__(self):
        b = np.asarray(self.beta_schedule, dtype=float)
        if b.ndim != 1 or b.size == 0 or not np.all(b > 0) or not np.all(np.diff(b) > 0):
            raise ValueError("beta_schedule must be a non-empty, positive, strictly increasing sequence")
        if self.sweeps_per_beta < 1:
            raise ValueError("sweeps_per_beta must be at least 1")
        object.__setattr__(self, "beta_schedule", tuple(float(x) for x in b))

    def for_size(self, n: int) -> "SaRunConfig":
        return dataclasses.replace(self, n=n)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def run_sa_trial(problem: SpikeProblem, config: SaRunConfig, stream_id: int, record_trajectory: bool = False):
    """One SA run from a uniformly random bit string; success iff it ends at all zeros.

    With ``record_trajectory`` a ``(TrialResult, weights)`` pair is returned,
    ``weights`` holding the Hamming weight before the first and after every
    proposal.
    """
    if config.n != problem.n:
        raise ValueError(f"config has n={config.n}, problem has n={problem.n}")
    rng = RngStream(config.seed, stream_id)
    bits = (rng.generator.random(problem.n) < 0.5).astype(np.int8)
    betas = np.asarray(config.beta_schedule)
    n_props = len(betas) * config.sweeps_per_beta * problem.n
    traj = np.zeros(n_props + 1 if record_trajectory else 0, dtype=np.int64)
    w = _kernels.sa_anneal(bits, problem.values_by_weight, betas, config.sweeps_per_beta, rng.generator, traj)
    result = TrialResult(
        success=bool(w == 0),
        final_lattice_weight_profile=(int(w),),
        sweeps_total=config.sweeps_per_beta * len(betas),
        stream_id=int(stream_id),
    )
    return (result, traj) if record_trajectory else result


def weight_transition_matrix(problem: SpikeProblem, beta: float) -> np.ndarray:
    """One-proposal transition matrix of the Hamming weight at inverse temperature ``beta``."""
    n = problem.n
    f = problem.values_by_weight
    P = np.zeros((n + 1, n + 1))
    for h in range(n + 1):
        if h > 0:
            P[h, h - 1] = h / n * np.exp(min(0.0, -beta * (f[h - 1] - f[h])))
        if h < n:
            P[h, h + 1] = (n - h) / n * np.exp(min(0.0, -beta * (f[h + 1] - f[h])))
        P[h, h] = 1.0 - P[h].sum()
    return P


def _stochastic_power(P: np.ndarray, m: int) -> np.ndarray:
    """``P**m`` by repeated squaring, renormalizing rows so the power stays stochastic.

    Plain ``matrix_power`` lets row sums drift by ~1e-6 at ``m ~ 1e10``.
    """
    result = np.eye(P.shape[0])
    base = P.copy()
    while m:
        if m & 1:
            result = result @ base
            result /= result.sum(axis=1, keepdims=True)
        m >>= 1
        if m:
            base = base @ base
            base /= base.sum(axis=1, keepdims=True)
    return result


def weight_distribution(problem: SpikeProblem, config: SaRunConfig) -> np.ndarray:
    """Exact distribution of the final Hamming weight of :func:`run_sa_trial`."""
    n = problem.n
    p = binom.pmf(np.arange(n + 1), n, 0.5)
    for beta in config.beta_schedule:
        p = p @ _stochastic_power(weight_transition_matrix(problem, beta), n * config.sweeps_per_beta)
    return p


def exact_success_probability(problem: SpikeProblem, config: SaRunConfig) -> float:
    return float(weight_distribution(problem, config)[0])


def calibrate_sweeps_per_beta(problem: SpikeProblem, config_template: SaRunConfig, target_rate: float,
                              max_sweeps: int = 2**40) -> int:
    """Smallest ``sweeps_per_beta`` whose exact success probability reaches ``target_rate``.

    Doubling then integer bisection on the birth-death oracle; assumes the
    probability is non-decreasing in the budget, which holds on every
    ladder tried here but is not guaranteed in general.
    """
    if not 0 < target_rate < 1:
        raise ValueError("target_rate must lie in (0, 1)")
    cfg = config_template.for_size(problem.n)

    def ok(s):
        return exact_success_probability(problem, dataclasses.replace(cfg, sweeps_per_beta=s)) >= target_rate

    hi = 1
    while not ok(hi):
        if hi >= max_sweeps:
            raise ValueError(f"target rate {target_rate} not reached within {max_sweeps} sweeps per beta")
        hi = min(2 * hi, max_sweeps)
    lo = hi // 2
    while lo >= 1 and hi > lo + 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class SaCurvePoint:
    n: int
    successes: int
    trials: int
    rate: float
    ci_low: float
    ci_high: float


def sa_success_curve(
    n_values,
    config_template: SaRunConfig,
    trials: int,
    problem_factory=SpikeProblem,
    threads: int = 1,
) -> list:
    """Success rate of :func:`run_sa_trial` for each ``n`` with Wilson 95% intervals."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    points = []
    for n in n_values:
        problem = problem_factory(n)
        cfg = config_template.for_size(n)
        if threads <= 1:
            results = [run_sa_trial(problem, cfg, k) for k in range(trials)]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda k: run_sa_trial(problem, cfg, k), range(trials)))
        k = sum(r.success for r in results)
        lo, hi = wilson_interval(k, trials)
        points.append(SaCurvePoint(int(n), k, trials, k / trials, lo, hi))
    return points
