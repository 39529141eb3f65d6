"""Coulomb-type singular potentials with shrinking short-range regularizers.

Resonance detection, limit classification, resolvents and scattering for
both the eps-family and its point-interaction limit.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CoulombLimitsError,
    ContractViolation,
    DegenerateCouplingError,
    InvalidParameterError,
    NearEigenvalueError,
    NumericalError,
    SeriesConvergenceError,
    SpecError,
    StiffnessError,
    UnknownBuiltinError,
)
from .potentials import (  # noqa: E402
    BUILTIN_NAMES,
    CoulombSpec,
    Piecewise,
    RegularizedFamily,
    TestFunction,
    builtin_catalog,
    bump,
    eval_regularized,
    lneps_coefficient,
    lneps_slope,
    load_family,
    pairing,
)
from .resonance import (  # noqa: E402
    ResonanceData,
    find_resonant_couplings,
    half_bound_state,
    resonance_functionals,
    square_well,
)
from .odes import OriginPair, SolutionTrace, decaying_solution, integrate, origin_pair  # noqa: E402
from .limit_operator import (  # noqa: E402
    BoundaryData,
    LimitOperator,
    LimitResolvent,
    apply_resolvent,
    classify_limit,
    extract_boundary,
    limit_scattering,
    limit_transmission,
)
from .eps_operator import (  # noqa: E402
    EpsResolvent,
    EpsResolventResult,
    apply_eps_resolvent,
    eps_scattering,
    eps_transfer_matrix,
    eps_transmission,
)
from .harness import (  # noqa: E402
    SweepReport,
    convergence_sweep,
    inner_expansion_check,
    penetrability_sweep,
    probe_set,
)
