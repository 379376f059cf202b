"""circlestab: quantitative statistical stability of circle rotations.

Exact Wasserstein distances on the circle, discrepancy and
Denjoy-Koksma bounds, perturbation families with tuned rotation
numbers, linear response via the homological equation, and spatial
discretization experiments, with a CLI front end.
"""

from .arithmetic import (
    GOLDEN_MEAN,
    SQRT2_MINUS_ONE,
    Convergent,
    DiophantineProfile,
    TruncationError,
    canonicalize,
    circle_dist,
    continued_fraction,
    diophantine_type_estimate,
    lacunary_alpha,
)
from .cli import (
    ExperimentConfig,
    HolderFit,
    ScalingRecord,
    ScanResult,
    discretization_scan,
    holder_fit,
    read_records_csv,
    resolve_alpha,
    run_cli,
    run_dk_suite,
    stability_scan,
    write_records_csv,
)
from .errors import (
    CircleStabError,
    ConvergenceError,
    InsufficientDataError,
    ResourceLimitError,
    SmallDivisorError,
    TuningError,
)
from .fourier import FourierDensity, FourierSeries, pairing
from .invariant import (
    DiffeoInvariantDensity,
    FunctionalGraphAnalysis,
    analyze_functional_graph,
    birkhoff_average,
    birkhoff_measure,
    invariant_measure_of_diffeo,
)
from .maps import (
    AttractorRepeller,
    CircleMap,
    Composition,
    ConjugacyDiffeo,
    ConjugatedRotation,
    Discretized,
    Rotation,
    RotationNumber,
    TunedFamily,
    attractor_repeller_family,
    discretize,
    eval_map,
    map_from_json,
    map_to_json,
    rotation_number,
    tune_rotation_number,
    weighted_birkhoff_weights,
)
from .measures import (
    AtomicMeasure,
    BVObservable,
    DiscrepancyResult,
    DKCheck,
    LebesgueMeasure,
    atomize_by_cdf,
    brute_force_variation,
    bv_library,
    cesaro_average,
    discrepancy,
    dk_check,
    prop30_integral_exact,
    prop30_observable,
    pushforward,
    wasserstein,
)
from .response import (
    AverageExpansion,
    EpsRecord,
    ResponseReport,
    SmallDivisorProfile,
    average_expansion,
    fd_response,
    linear_response_density,
    response_pairing,
    small_divisor_profile,
    solve_homological,
)

__version__ = "0.1.0"
