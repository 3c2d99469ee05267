"""Self-adjusting (1,lambda) EA on static and dynamic monotone functions.

Library layout:

* ``bitstring``  -- genotypes, seeded random streams, standard bit mutation
* ``fitness``    -- monotone benchmarks behind a comparison-oracle interface
* ``algorithm``  -- the EA state machine: step, run loop, success rule
* ``potentials`` -- potential functions g = zeromax + h and event probabilities
* ``driftlab``   -- Monte-Carlo drift estimation, lambda* search, region scans
* ``harness``    -- seeded parameter sweeps with CSV persistence
* ``cli``        -- the ``salea`` command
"""

from .algorithm import (
    AlgorithmParams,
    AlgorithmState,
    InitPolicy,
    RunResult,
    StepRecord,
    round_offspring,
    run,
    step,
    update_lambda,
)
from .bitstring import RngStream, SearchPoint, mutate, new_random, zeromax
from .driftlab import (
    DriftEstimate,
    DriftScanReport,
    estimate_drift,
    estimate_success_prob,
    find_lambda_star,
    scan_drift_region,
    verify_event_probabilities,
)
from .fitness import (
    Comparison,
    FitnessInstance,
    FunctionSpec,
    MonotonicityError,
    advance,
    compare,
    is_optimum,
    make_instance,
    value,
)
from .harness import (
    CellSummary,
    SweepSpec,
    preset_F_sweep,
    preset_scaling_experiment,
    preset_threshold_sweep,
    run_sweep,
)
from .potentials import (
    PotentialSpec,
    eval_g,
    eval_h,
    prob_A_bar,
    prob_B_bar,
    sandwich_bounds,
    success_prob_lower_bound,
)

__version__ = "0.1.0"
