"""Two-layer periodic internal waves: dispersion, small-amplitude
expansions, an independent elliptic verifier with Newton continuation,
and streamline analysis.

Importing the package honours STRATAWAVE_THREADS before numpy spins up
its thread pools, so command-line runs can cap parallelism.
"""
import os as _os

_threads = _os.environ.get("STRATAWAVE_THREADS", "")
if _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                 "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .model import (  # noqa: E402
    BranchPoint,
    FieldGrid,
    FluidParams,
    VerticalProfile,
    WaveProfile,
)
from .dispersion import (  # noqa: E402
    SymbolFamily,
    bifurcation_points,
    kernel_is_simple,
    mu,
    sigma_threshold,
)
from .asymptotics import (  # noqa: E402
    DegenerateBranchError,
    ExpansionCoefficients,
    branch_expansion,
    second_order_coefficients,
)
from .elliptic import (  # noqa: E402
    NumericalFailure,
    Psi,
    directional_hessian,
    frechet_dPsi,
    solve_lower,
    solve_upper,
)
from .continuation import Branch, NoConvergence, newton_correct, trace_branch  # noqa: E402
from .flowfield import (  # noqa: E402
    PushforwardField,
    StagnationReport,
    Streamline,
    critical_curves,
    find_stagnation_points,
    separatrix_and_layer,
    trace_streamline,
    velocity,
)

__version__ = "0.1.0"

__all__ = [
    "BranchPoint",
    "Branch",
    "DegenerateBranchError",
    "ExpansionCoefficients",
    "FieldGrid",
    "FluidParams",
    "NoConvergence",
    "NumericalFailure",
    "Psi",
    "PushforwardField",
    "StagnationReport",
    "Streamline",
    "SymbolFamily",
    "VerticalProfile",
    "WaveProfile",
    "bifurcation_points",
    "branch_expansion",
    "critical_curves",
    "directional_hessian",
    "find_stagnation_points",
    "frechet_dPsi",
    "kernel_is_simple",
    "mu",
    "newton_correct",
    "second_order_coefficients",
    "separatrix_and_layer",
    "sigma_threshold",
    "solve_lower",
    "solve_upper",
    "trace_branch",
    "trace_streamline",
    "velocity",
    "__version__",
]
