"""nlslab: a numerical laboratory for stationary nonlinear Schrodinger equations.

The package solves -u'' + V(x) u = f(x, u) on a truncated symmetric
interval with Dirichlet ends, analyzes the spectrum of the linear part
(including Floquet bands of periodic potentials), measures how fast the
computed solutions decay, and checks the measured envelopes against the
rates the spectral picture predicts.  A separate exact-arithmetic module
reproduces the integrability bootstrap that underlies those predictions.

Library entry points are re-exported here; the ``nlslab`` console script
in :mod:`nlslab.cli` drives the same code from scenario files.
"""

from .errors import (
    BranchMismatchError,
    ConfigError,
    InternalInvariantError,
    InvalidPotentialError,
    LabError,
    NonConvergenceError,
    NumericalFailureError,
    SingularJacobianError,
    SlackError,
    SupercriticalExponentError,
    TooFewSamplesError,
)
from .model import (
    AsymptoticallyLinear,
    ConfiningPower,
    Constant,
    Grid,
    Nonlinearity,
    PeriodicCosine,
    Potential,
    PurePower,
    SaturableScaled,
    Tabulated,
    audit_growth,
    build_grid,
    eval_nonlinearity,
    eval_potential,
)
from .spectral import (
    Bands,
    DiscreteOperator,
    Discriminant,
    Empty,
    HalfLine,
    SpectralReport,
    assemble,
    check_hypothesis_ii,
    essential_spectrum,
    hill_discriminant,
    lowest_eigenvalues,
    spectral_report,
)
from .solver import (
    NewtonTrace,
    SolutionField,
    continuation_solve,
    jacobian,
    make_solution_field,
    newton_solve,
    residual,
)
from .decay import (
    DecayFit,
    DecayVerdict,
    RateProfile,
    VanishingReport,
    WeightField,
    build_W,
    check_vanishing,
    fit_exponential,
    fit_stretched,
    local_rate,
    verdict,
)
from .bootstrap import (
    BootstrapProblem,
    BootstrapRun,
    BootstrapState,
    make_problem,
    run_bootstrap,
    verify_gain,
)
from .scenarios import (
    ScenarioConfig,
    build_seed,
    export_presets,
    load_preset_text,
    load_scenario,
    parse_scenario,
    preset_names,
)

try:
    from importlib.metadata import version as _version

    __version__ = _version("nlslab")
except Exception:  # pragma: no cover - source tree without install
    __version__ = "0.0.0"

__all__ = [
    # errors
    "LabError", "ConfigError", "InvalidPotentialError", "TooFewSamplesError",
    "BranchMismatchError", "SupercriticalExponentError", "SlackError",
    "NumericalFailureError", "NonConvergenceError", "SingularJacobianError",
    "InternalInvariantError",
    # model
    "Grid", "build_grid", "Constant", "PeriodicCosine", "ConfiningPower",
    "Tabulated", "Potential", "PurePower", "AsymptoticallyLinear",
    "SaturableScaled", "Nonlinearity", "eval_potential", "eval_nonlinearity",
    "audit_growth",
    # spectral
    "DiscreteOperator", "Discriminant", "Empty", "HalfLine", "Bands",
    "SpectralReport", "assemble", "lowest_eigenvalues", "hill_discriminant",
    "essential_spectrum", "check_hypothesis_ii", "spectral_report",
    # solver
    "SolutionField", "NewtonTrace", "residual", "jacobian", "newton_solve",
    "continuation_solve", "make_solution_field",
    # decay
    "WeightField", "DecayFit", "VanishingReport", "RateProfile", "DecayVerdict",
    "build_W", "check_vanishing", "fit_exponential", "fit_stretched",
    "local_rate", "verdict",
    # bootstrap
    "BootstrapProblem", "BootstrapState", "BootstrapRun", "make_problem",
    "run_bootstrap", "verify_gain",
    # scenarios
    "ScenarioConfig", "load_scenario", "parse_scenario", "build_seed",
    "preset_names", "load_preset_text", "export_presets",
    "__version__",
]
