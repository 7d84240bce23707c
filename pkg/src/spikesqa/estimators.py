"""scikit-learn style front ends.

The estimators hold configuration in ``__init__`` (so ``get_params`` and
``set_params`` work and they clone cleanly) and do their work in ``fit``.
Problems may be passed as a :class:`SpikeProblem` or as a bare size ``n``.
The scaling estimators take an array of system sizes as ``X`` and predict
the fitted power law at new sizes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .annealing import SqaRunConfig, run_trials
from .oracle import default_gamma_grid, gap_scan
from .problem import SpikeProblem
from .sa import SaRunConfig, exact_success_probability, geometric_beta_schedule, run_sa_trial
from .scaling import fit_power_law, run_scaling_experiment


def check_problem(problem, spikeless: bool = False) -> SpikeProblem:
    if isinstance(problem, SpikeProblem):
        return problem
    n = int(problem)
    return SpikeProblem.spikeless(n) if spikeless else SpikeProblem(n)


def check_sizes(X) -> np.ndarray:
    """Validate a column (or 1-D array) of system sizes and return them as ints."""
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single column of system sizes, got {X.shape[1]} columns")
        X = X[:, 0]
    if np.any(X < 1) or np.any(X != np.round(X)):
        raise ValueError("system sizes must be positive integers")
    return X.astype(np.int64)


def check_seed(random_state) -> int:
    if random_state is None:
        return 0
    if isinstance(random_state, (int, np.integer)) and 0 <= random_state < 2**64:
        return int(random_state)
    raise ValueError(f"random_state must be an unsigned 64-bit integer, got {random_state!r}")


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``y = exp(intercept_) * x ** exponent_`` in log space."""

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=3)
        if X.shape[1] != 1:
            raise ValueError("PowerLawRegressor takes a single feature")
        self.exponent_, self.intercept_, self.r_squared_ = fit_power_law(np.column_stack([X[:, 0], y]))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "exponent_")
        X = check_array(X)
        return np.exp(self.intercept_) * X[:, 0] ** self.exponent_


class SimulatedQuantumAnnealer(BaseEstimator):
    def __init__(
        self,
        beta=32.0,
        sweeps_per_gamma=1,
        slices_per_qubit=None,
        trotter_number=None,
        gamma_0=1.0,
        ratio=0.7,
        gamma_min=1e-12,
        use_worldline=False,
        criterion="frozen",
        n_trials=1,
        random_state=0,
        n_jobs=1,
    ):
        self.beta = beta
        self.sweeps_per_gamma = sweeps_per_gamma
        self.slices_per_qubit = slices_per_qubit
        self.trotter_number = trotter_number
        self.gamma_0 = gamma_0
        self.ratio = ratio
        self.gamma_min = gamma_min
        self.use_worldline = use_worldline
        self.criterion = criterion
        self.n_trials = n_trials
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self, n):
        return SqaRunConfig(
            n=n,
            beta=self.beta,
            sweeps_per_gamma=self.sweeps_per_gamma,
            L=self.trotter_number,
            slices_per_qubit=self.slices_per_qubit,
            gamma_0=self.gamma_0,
            ratio=self.ratio,
            gamma_min=self.gamma_min,
            use_worldline=self.use_worldline,
            criterion=self.criterion,
            seed=check_seed(self.random_state),
        )

    def fit(self, problem, y=None):
        """Run ``n_trials`` independent anneals on ``problem``."""
        problem = check_problem(problem)
        self.config_ = self._config(problem.n)
        self.results_ = run_trials(problem, self.config_, self.n_trials, self.n_jobs)
        self.success_rate_ = sum(r.success for r in self.results_) / len(self.results_)
        return self


class SimulatedAnnealer(BaseEstimator):
    def __init__(
        self,
        beta_0=0.1,
        beta_ratio=1.3,
        beta_final=32.0,
        sweeps_per_beta=1,
        n_trials=1,
        random_state=0,
    ):
        self.beta_0 = beta_0
        self.beta_ratio = beta_ratio
        self.beta_final = beta_final
        self.sweeps_per_beta = sweeps_per_beta
        self.n_trials = n_trials
        self.random_state = random_state

    def fit(self, problem, y=None):
        problem = check_problem(problem)
        self.config_ = SaRunConfig(
            n=problem.n,
            beta_schedule=geometric_beta_schedule(self.beta_0, self.beta_ratio, self.beta_final),
            sweeps_per_beta=self.sweeps_per_beta,
            seed=check_seed(self.random_state),
        )
        self.results_ = [run_sa_trial(problem, self.config_, k) for k in range(self.n_trials)]
        self.success_rate_ = sum(r.success for r in self.results_) / self.n_trials
        self.exact_success_probability_ = exact_success_probability(problem, self.config_)
        return self


class SweepBudgetScaling(BaseEstimator):
    """Estimate the SQA sweep budget at each size in ``X`` and fit its power law."""

    def __init__(
        self,
        beta=32.0,
        slices_per_qubit=None,
        ratio=0.7,
        gamma_min=1e-12,
        use_worldline=False,
        criterion="frozen",
        trials=20,
        target_rate=0.5,
        max_sweeps=2**24,
        spikeless=False,
        random_state=0,
        n_jobs=1,
    ):
        self.beta = beta
        self.slices_per_qubit = slices_per_qubit
        self.ratio = ratio
        self.gamma_min = gamma_min
        self.use_worldline = use_worldline
        self.criterion = criterion
        self.trials = trials
        self.target_rate = target_rate
        self.max_sweeps = max_sweeps
        self.spikeless = spikeless
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        sizes = check_sizes(X)
        template = SqaRunConfig(
            n=int(sizes[0]),
            beta=self.beta,
            slices_per_qubit=self.slices_per_qubit,
            ratio=self.ratio,
            gamma_min=self.gamma_min,
            use_worldline=self.use_worldline,
            criterion=self.criterion,
            max_sweeps=self.max_sweeps,
            seed=check_seed(self.random_state),
        )
        factory = SpikeProblem.spikeless if self.spikeless else SpikeProblem
        self.result_ = run_scaling_experiment(
            sizes, template, self.trials, self.target_rate,
            threads=self.n_jobs, problem_factory=factory,
            problem_label="spikeless" if self.spikeless else "spike",
        )
        good = [(p.n, p.tau_s) for p in self.result_.points if p.converged]
        if len(good) < 3:
            raise RuntimeError("fewer than 3 sizes converged; no exponent can be fitted")
        g = np.array(good, dtype=float)
        self.regressor_ = PowerLawRegressor().fit(g[:, :1], g[:, 1])
        self.exponent_ = self.regressor_.exponent_
        return self

    def predict(self, X):
        check_is_fitted(self, "regressor_")
        return self.regressor_.predict(check_sizes(X).reshape(-1, 1).astype(float))


class GapScaling(BaseEstimator):
    """Minimum symmetric-sector gap at each size in ``X`` and its power law in ``n``."""

    def __init__(self, grid_points=64, refine_rounds=3, spikeless=False):
        self.grid_points = grid_points
        self.refine_rounds = refine_rounds
        self.spikeless = spikeless

    def fit(self, X, y=None):
        sizes = check_sizes(X)
        grid = default_gamma_grid(self.grid_points)
        self.scans_ = [gap_scan(check_problem(int(n), self.spikeless), grid, self.refine_rounds) for n in sizes]
        self.g_min_ = np.array([s.g_min for s in self.scans_])
        self.regressor_ = PowerLawRegressor().fit(sizes.reshape(-1, 1).astype(float), self.g_min_)
        self.exponent_ = self.regressor_.exponent_
        return self

    def predict(self, X):
        check_is_fitted(self, "regressor_")
        return self.regressor_.predict(check_sizes(X).reshape(-1, 1).astype(float))
