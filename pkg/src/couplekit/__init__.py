"""Numerical tools for finite-dimensional Banach couples.

K- and J-functionals with certified solvers and closed forms, exact
piecewise-linear K-curves, subcouples and duality, the orbit problem for
``{l1, l_inf}`` and real-method interpolation norms.
"""

__version__ = "0.1.0"

from .couple import (
    INF,
    Couple,
    LinearMap,
    Side,
    conjugate_exponent,
    dual_couple,
    l1_linf,
    make_couple,
    weighted_norm,
)
from .curves import ConcaveCurve, compare_curves, curve_leq, least_concave_majorant
from .exceptions import (
    ConvergenceError,
    CoupleError,
    CurveError,
    DimensionMismatchError,
    DominationError,
    ExponentRangeError,
    InadmissibleCurveError,
    NonpositiveWeightError,
    PreconditionError,
    UnsupportedOperationError,
)
from .kfun import (
    Split,
    cone_membership,
    decreasing_rearrangement,
    j_functional,
    k_curve,
    k_equal_exponent,
    k_functional,
    k_l1_linf,
    k_l1_linf_curve,
    k_value,
    k_values,
    realize_k,
)
from .smoothness import (
    GridFunction,
    difference_embed,
    embedded_k,
    k_c0c1,
    k_eq24_check,
    modulus_of_continuity,
)
from .structure import (
    Functional,
    NormBound,
    SubcoupleSpec,
    dual_k_identity,
    embed_linf,
    hahn_banach_extend,
    is_b_quotient,
    is_b_subcouple,
    operator_norm_b_lower,
    operator_norm_l,
    operator_norm_l_bounds,
    quotient_couple,
    retract_check,
)
from .orbit import (
    Decomposition,
    Domination,
    OrbitProblem,
    dominates,
    fundamental_decomposition,
    gamma_estimate,
    hlp_construct,
    hlp_factorization,
    level_interp_operator,
    min_kernel_check,
)
from .interp import (
    KMethodParams,
    interpolation_property_check,
    k_space_norm,
    lorentz_k_equiv,
    prop41_check,
)

_ESTIMATORS = ("DecreasingRearrangement", "KFunctionalTransformer", "KSpaceNormTransformer", "OrbitMap")

__all__ = [name for name in dir() if not name.startswith("_")] + list(_ESTIMATORS)


def __getattr__(name):
    # scikit-learn is imported only when an estimator is requested
    if name in _ESTIMATORS:
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
