"""Distance covariance independence testing for weakly dependent time series.

The test statistic is ``n * dcov(theta_n)``; its null distribution is
approximated by resampling non-overlapping blocks of the two series
independently of each other.  The :mod:`depcov.wasserstein` subpackage holds
exact optimal transport solvers and explicit bounds on the expected
Wasserstein distance between a mixing process' empirical measure and its
marginal law.
"""

from depcov.errors import (
    BoundDomainError,
    ConsistencyError,
    DegenerateBootstrapError,
    InvalidSpecError,
    PreconditionError,
    SampleError,
)
from depcov.series import (
    BlockPartition,
    PairedSample,
    VectorizedSample,
    load_csv,
    partition_blocks,
    vectorize,
)
from depcov.dcov import (
    DcovValue,
    block_kernel_H,
    centered_distance_matrix,
    dcov_blocks,
    dcov_fast,
    dcov_v_oracle,
    hoeffding_h1_estimate,
    kernel_f,
    kernel_h_prime,
    kernel_h_sym,
)
from depcov.bootstrap import (
    BootstrapConfig,
    BootstrapOutcome,
    block_length,
    bootstrap_distribution,
    independence_test,
    resample_blocks,
    upper_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "BlockPartition",
    "BootstrapConfig",
    "BootstrapOutcome",
    "BoundDomainError",
    "ConsistencyError",
    "DcovValue",
    "DegenerateBootstrapError",
    "InvalidSpecError",
    "PairedSample",
    "PreconditionError",
    "SampleError",
    "VectorizedSample",
    "block_kernel_H",
    "block_length",
    "bootstrap_distribution",
    "centered_distance_matrix",
    "dcov_blocks",
    "dcov_fast",
    "dcov_v_oracle",
    "hoeffding_h1_estimate",
    "independence_test",
    "kernel_f",
    "kernel_h_prime",
    "kernel_h_sym",
    "load_csv",
    "partition_blocks",
    "resample_blocks",
    "upper_quantile",
    "vectorize",
]
