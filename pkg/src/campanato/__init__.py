"""Numerical toolkit for oscillation-space analysis on finite metric
measure spaces: exact ball sweeps for localized Morrey-Campanato / BMO /
BLO norms, the Schrodinger critical radius, semigroup kernel families,
maximal operators and the Littlewood-Paley square function, plus a
harness that verifies the explicit-constant inequalities and fits the
existential ones.
"""

from .space import (
    Ball,
    BallList,
    GridInfo,
    MetricMeasureSpace,
    SpaceProfile,
    build_grid_space,
    canonical_balls,
    doubling_profile,
    line_space,
    random_metric_space,
    single_point_space,
    two_point_space,
)
from .potential import (
    AdmissibleFunction,
    PotentialVanishes,
    ReverseHolderReport,
    admissibility_constant,
    admissibility_sweep,
    critical_radius,
    reverse_holder_constant,
)
from .fnspaces import (
    BallClass,
    NormBreakdown,
    campanato_blo_norm,
    campanato_norm,
    dclass_from_rho,
    lipschitz_norm,
    localization_split,
    morrey_norm,
    truncate,
)
from .atoms import (
    Atom,
    AtomicDecomposition,
    decomposition_cost,
    greedy_decomposition,
    make_cancellative_atom,
    make_local_atom,
    pairing,
    split_local_atom,
    validate_atom,
)
from .semigroup import (
    KernelBoundFit,
    KernelFamily,
    OperatorSpectrum,
    build_schrodinger,
    default_scale_grid,
    heat_kernel,
    kernel_bound_fit,
    poisson_kernel,
    qt_kernel,
    subordination_nodes,
)
from .maximal import (
    GFunctionResult,
    VerificationReport,
    boundedness_report,
    g_function,
    hl_domination_split,
    hl_maximal,
    make_corpus,
    poisson_maximal,
    radial_maximal,
)

__version__ = "0.1.0"
