"""Simulated quantum annealing driver and the sweep-budget estimator."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import _kernels
from .lattice import WorldlineLattice, coupling_strength
from .problem import SpikeProblem
from .rng import RngStream

MAX_SWEEPS_CAP = 2**24

CRITERIA = ("frozen", "slice")

_Z95 = float(norm.ppf(0.975))


class NotConvergedError(RuntimeError):
    """The target success rate was not reached at the sweep cap."""

    def __init__(self, cap: int, history):
        self.cap = cap
        self.history = list(history)
        super().__init__(f"target success rate not reached at sweep cap {cap}")


@dataclass(frozen=True)
class AnnealSchedule:
    gamma_0: float
    ratio: float
    gamma_min: float
    values: tuple

    def __len__(self):
        return len(self.values)


def build_schedule(gamma_0: float = 1.0, ratio: float = 0.7, gamma_min: float = 1e-12) -> AnnealSchedule:
    """Geometric ladder ``gamma_{i+1} = ratio * gamma_i``, stopping at the first value <= gamma_min."""
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    if not 0 < gamma_min < gamma_0:
        raise ValueError(f"need 0 < gamma_min < gamma_0, got {gamma_min}, {gamma_0}")
    values = [float(gamma_0)]
    while values[-1] > gamma_min:
        values.append(values[-1] * ratio)
    return AnnealSchedule(float(gamma_0), float(ratio), float(gamma_min), tuple(values))


@dataclass(frozen=True)
class SqaRunConfig:
    """Parameters of one SQA run.

    The Trotter number is ``L`` when given, otherwise
    ``round(slices_per_qubit * n)`` with ``slices_per_qubit`` defaulting to
    ``beta`` (so ``beta / L = 1 / n``).
    """

    n: int
    beta: float = 32.0
    sweeps_per_gamma: int = 1
    L: int | None = None
    slices_per_qubit: float | None = None
    gamma_0: float = 1.0
    ratio: float = 0.7
    gamma_min: float = 1e-12
    use_worldline: bool = False
    criterion: str = "frozen"
    seed: int = 0
    max_sweeps: int = MAX_SWEEPS_CAP
    freeze_tol: float = 1e-12

    def __post_init__(self):
        if self.sweeps_per_gamma < 1:
            raise ValueError("sweeps_per_gamma must be at least 1")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if self.trotter_number < 2:
            raise ValueError(f"Trotter number must be >= 2, got {self.trotter_number}")
        if not 1 <= self.max_sweeps <= MAX_SWEEPS_CAP:
            raise ValueError(f"max_sweeps must lie in [1, {MAX_SWEEPS_CAP}]")

    @property
    def trotter_number(self) -> int:
        if self.L is not None:
            return int(self.L)
        c = self.beta if self.slices_per_qubit is None else self.slices_per_qubit
        return max(2, int(round(c * self.n)))

    @property
    def schedule(self) -> AnnealSchedule:
        return build_schedule(self.gamma_0, self.ratio, self.gamma_min)

    def for_size(self, n: int) -> "SqaRunConfig":
        """Same template at another system size (an explicit ``L`` is dropped)."""
        return dataclasses.replace(self, n=n, L=None)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["trotter_number"] = self.trotter_number
        return d


@dataclass(frozen=True)
class TrialResult:
    success: bool
    final_lattice_weight_profile: tuple
    sweeps_total: int
    stream_id: int


def _is_success(weights: np.ndarray, criterion: str) -> bool:
    if criterion == "frozen":
        return bool(np.all(weights == 0))
    return bool(weights[0] == 0)


def anneal_lattice(problem: SpikeProblem, lattice: WorldlineLattice, config: SqaRunConfig, rng: RngStream) -> int:
    """Run the full schedule on ``lattice`` in place.

    Returns the number of schedule steps executed. A lattice without
    imaginary-time domain walls is declared frozen once the chance that any
    remaining local move is accepted falls below ``config.freeze_tol``; the
    remaining steps are then skipped (``freeze_tol=0`` disables this).
    """
    L = lattice.L
    Js = np.array([coupling_strength(config.beta, g, L) for g in config.schedule.values])
    steps = _kernels.anneal(
        lattice.spins, lattice.weights, problem.values_by_weight, config.beta / L, Js,
        rng.generator, config.sweeps_per_gamma, config.use_worldline, config.freeze_tol,
    )
    return int(steps)


def run_sqa_trial(
    problem: SpikeProblem,
    config: SqaRunConfig,
    stream_id: int,
    initial_lattice: WorldlineLattice | None = None,
    return_lattice: bool = False,
):
    """One annealing run from a random lattice (or ``initial_lattice``).

    Success means every slice is the all-zeros string under the ``frozen``
    criterion, or only slice 0 under the ``slice`` criterion. With
    ``return_lattice`` the final lattice is returned alongside the result.
    """
    if config.n != problem.n:
        raise ValueError(f"config has n={config.n}, problem has n={problem.n}")
    rng = RngStream(config.seed, stream_id)
    L = config.trotter_number
    if initial_lattice is None:
        lattice = WorldlineLattice.random(problem.n, L, rng)
    else:
        if initial_lattice.n != problem.n or initial_lattice.L != L:
            raise ValueError("initial lattice shape does not match the config")
        lattice = initial_lattice.copy()
    anneal_lattice(problem, lattice, config, rng)
    result = TrialResult(
        success=_is_success(lattice.weights, config.criterion),
        final_lattice_weight_profile=tuple(int(w) for w in lattice.weights),
        sweeps_total=config.sweeps_per_gamma * len(config.schedule),
        stream_id=int(stream_id),
    )
    return (result, lattice) if return_lattice else result


def run_trials(problem, config: SqaRunConfig, trials: int, threads: int = 1) -> list:
    """Trials on streams ``0 .. trials-1``; output order never depends on ``threads``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if threads <= 1:
        return [run_sqa_trial(problem, config, k) for k in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda k: run_sqa_trial(problem, config, k), range(trials)))


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def ci_halfwidth(successes: int, trials: int) -> float:
    lo, hi = wilson_interval(successes, trials)
    return (hi - lo) / 2


@dataclass
class TauEstimate:
    tau_s: int
    success_rate: float
    ci_halfwidth: float
    trials: int
    target_rate: float
    history: list = field(default_factory=list)
    converged: bool = True

    def __int__(self):
        return self.tau_s


def estimate_tau_s(
    problem: SpikeProblem,
    config_template: SqaRunConfig,
    trials: int = 20,
    target_rate: float = 0.5,
    rng_master: int | None = None,
    threads: int = 1,
    on_budget=None,
) -> TauEstimate:
    """Smallest per-gamma sweep budget whose success rate reaches ``target_rate``.

    Budgets double from 1 until the rate over ``trials`` trials reaches the
    target, then the bracket is bisected geometrically until its ends are
    within a factor 1.1 (or adjacent integers). Trial ``k`` always uses stream
    ``k`` so that all budgets see coupled randomness. ``history`` holds
    ``(sweeps, successes)`` for every evaluated budget in evaluation order.
    Raises :class:`NotConvergedError` past ``config_template.max_sweeps``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 < target_rate < 1:
        raise ValueError("target_rate must lie in (0, 1)")
    template = config_template
    if rng_master is not None:
        template = dataclasses.replace(template, seed=int(rng_master))
    cap = template.max_sweeps
    history = []
    cache = {}

    def successes(s):
        if s not in cache:
            cfg = dataclasses.replace(template, sweeps_per_gamma=s)
            results = run_trials(problem, cfg, trials, threads)
            cache[s] = sum(r.success for r in results)
            history.append((s, cache[s]))
            if on_budget is not None:
                on_budget(s, results)
        return cache[s]

    def ok(s):
        return successes(s) >= target_rate * trials

    hi = 1
    while not ok(hi):
        if hi >= cap:
            raise NotConvergedError(cap, history)
        hi = min(2 * hi, cap)
    lo = hi // 2
    while lo >= 1 and hi > lo + 1 and hi > 1.1 * lo:
        mid = int(round(math.sqrt(lo * hi)))
        mid = min(max(mid, lo + 1), hi - 1)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    k = successes(hi)
    return TauEstimate(
        tau_s=hi,
        success_rate=k / trials,
        ci_halfwidth=ci_halfwidth(k, trials),
        trials=trials,
        target_rate=target_rate,
        history=history,
    )
