"""Matrix-free linear operators with a composition algebra and adjoint-based solvers."""

from opkit.core import (
    AdjointOperator,
    ChainOperator,
    HStack,
    LinearOperator,
    ScaledOperator,
    SumOperator,
    VStack,
    adjoint_apply,
    forward,
    make_adjoint,
    make_compose,
    make_hstack,
    make_scale,
    make_sum,
    make_vstack,
    materialize,
)
from opkit.exceptions import (
    ConvergenceError,
    DimensionError,
    IllConditionedError,
    MaterializationError,
    OpkitError,
    SingularSystemError,
    ValidationError,
)
from opkit.ops import (
    DFT,
    Diagonal,
    FirstDerivative,
    Identity,
    MatrixOperator,
    Restriction,
    SecondDerivative,
)
from opkit.solve import (
    SolveReport,
    SolverConfig,
    cgls,
    direct_lstsq,
    fista,
    ista,
    preconditioned_inversion,
    regularized_inversion,
    soft_threshold,
    solve_auto,
)
from opkit.validate import DotTestResult, cond, dottest, max_singular_value, min_singular_value

__version__ = "0.1.0"
