"""Simulated quantum annealing (path-integral Monte Carlo) on the Hamming-weight-with-a-spike problem."""

__version__ = "0.1.0"

from .problem import (  # noqa: E402
    SpikeProblem,
    evaluate_objective,
    hamming_weight,
    objective_by_weight,
)
from .lattice import (  # noqa: E402
    PimcParams,
    WorldlineLattice,
    apply_flip,
    coupling_strength,
    effective_energy,
    flip_delta,
)
from .rng import RngStream  # noqa: E402
from .dynamics import (  # noqa: E402
    SweepReport,
    metropolis_accept,
    random_site_update,
    sweep,
    worldline_resample,
)
from .annealing import (  # noqa: E402
    AnnealSchedule,
    NotConvergedError,
    SqaRunConfig,
    TauEstimate,
    TrialResult,
    build_schedule,
    estimate_tau_s,
    run_sqa_trial,
)
from .sa import SaRunConfig, exact_success_probability, run_sa_trial, sa_success_curve  # noqa: E402
from .oracle import (  # noqa: E402
    SpectralScan,
    brute_force_trotter_partition,
    exact_thermal_slice_marginal,
    full_hamiltonian,
    gap_scan,
    symmetric_hamiltonian,
)
from .scaling import ScalingResult, fit_power_law, run_scaling_experiment  # noqa: E402
from .estimators import (  # noqa: E402
    GapScaling,
    PowerLawRegressor,
    SimulatedAnnealer,
    SimulatedQuantumAnnealer,
    SweepBudgetScaling,
)
