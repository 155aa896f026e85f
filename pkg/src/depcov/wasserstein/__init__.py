from depcov.wasserstein.transport import (
    EmpiricalMeasure,
    TransportSolution,
    optimal_transport,
    product_measure,
    product_subadditivity_check,
    product_subadditivity_terms,
    quantize_measure,
    transport_cost,
    w_exact_1d,
    w_exact_discrete,
)
from depcov.wasserstein.bounds import (
    BoundParams,
    DyadicPartitionParams,
    VarianceCheck,
    bound_alpha_mixing,
    bound_phi_mixing,
    bound_stationary_segments,
    cube_diameter,
    deepest_valid_level,
    default_c0,
    dyadic_bound,
    dyadic_level_terms,
    dyadic_tail,
    entropy_level_cap,
    expected_cost_mc,
    mixing_bound_core,
    polynomial_rate_constant,
    stationary_segment_terms,
    variance_bound_check,
    zeta_fn,
    zeta_nr,
)

__all__ = [
    "BoundParams",
    "DyadicPartitionParams",
    "EmpiricalMeasure",
    "TransportSolution",
    "VarianceCheck",
    "bound_alpha_mixing",
    "bound_phi_mixing",
    "bound_stationary_segments",
    "cube_diameter",
    "deepest_valid_level",
    "default_c0",
    "dyadic_bound",
    "dyadic_level_terms",
    "dyadic_tail",
    "entropy_level_cap",
    "expected_cost_mc",
    "mixing_bound_core",
    "optimal_transport",
    "polynomial_rate_constant",
    "product_measure",
    "product_subadditivity_check",
    "product_subadditivity_terms",
    "quantize_measure",
    "stationary_segment_terms",
    "transport_cost",
    "variance_bound_check",
    "w_exact_1d",
    "w_exact_discrete",
    "zeta_fn",
    "zeta_nr",
]
