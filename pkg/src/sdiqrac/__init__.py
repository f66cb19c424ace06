"""Semi-device-independent randomness expansion with biased input sources,
built on the 2->1 quantum random access code: closed-form witness bounds,
the feasible bias region, the analytic witness-vs-min-entropy tradeoff,
brute-force oracles for all of it, and a Monte Carlo protocol simulator.
"""

__version__ = "0.1.0"

from .adversary import (
    EpsilonPair,
    HiddenVariableContext,
    LambdaDistribution,
    MarginalReport,
    conditional_input_probs,
    solve_lambda_distribution,
    validate_marginals,
)
from .bloch import (
    BlochVector,
    Measurement,
    MeasurementKind,
    born_probability,
    effective_vector,
)
from .errors import (
    BranchError,
    DomainError,
    SdiqracError,
    SearchError,
    ValidationError,
)
from .oracles import (
    OracleReport,
    classical_enumeration,
    constrained_search,
    quantum_search,
)
from .simulate import (
    SimulationSummary,
    TrialRecord,
    empirical_min_entropy,
    run,
    trial_log_to_csv,
)
from .tradeoff import (
    Breakpoints,
    ConvexifiedBound,
    TradeoffCurve,
    TradeoffPoint,
    branch_f,
    branch_g,
    breakpoints,
    case_G1,
    case_G2,
    case_G3,
    convexify_F,
    curve,
    curve_to_csv,
    envelope_G,
    guessing_angle,
    threshold_crossover_root,
    threshold_witness,
)
from .witness import (
    RegionRow,
    Strategy,
    WitnessBounds,
    aligned_measurement_value,
    classical_bound,
    combine_over_lambda,
    expected_success,
    feasibility_boundary_root,
    feasibility_region,
    is_feasible,
    max_guess_probability,
    min_entropy_at_max_violation,
    optimal_strategy,
    quantum_bound,
    region_to_csv,
    strategy_max_outcome,
    trivial_measurement_optimum,
    witness_bounds,
)

__all__ = [name for name in dir() if not name.startswith("_")]
