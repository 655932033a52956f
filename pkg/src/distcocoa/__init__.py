"""Communication-efficient distributed dual coordinate ascent (CoCoA) and baselines."""

from .baselines import BaselineConfig, run_local_sgd, run_minibatch_cd, run_minibatch_sgd
from .cocoa import CocoaConfig, run_cocoa
from .data import (Dataset, Partition, SparseVector, gen_orthogonal_blocks, gen_synthetic,
                   parse_libsvm, partition_uniform, scale_to_unit_norm)
from .estimators import (CocoaClassifier, LocalSGDClassifier, MiniBatchCDClassifier,
                         MiniBatchSGDClassifier)
from .local_solvers import LocalSolverConfig, LocalUpdate, exact_block_solver, local_sdca
from .objectives import DualState, LossModel, dual_value, duality_gap, primal_value
from .runtime import CommLedger, Runtime
from .theory import rate_bound, sigma_min, theta_local_sdca

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig", "CocoaClassifier", "CocoaConfig", "CommLedger", "Dataset", "DualState",
    "LocalSGDClassifier", "LocalSolverConfig", "LocalUpdate", "LossModel",
    "MiniBatchCDClassifier", "MiniBatchSGDClassifier", "Partition", "Runtime", "SparseVector",
    "dual_value", "duality_gap", "exact_block_solver", "gen_orthogonal_blocks", "gen_synthetic",
    "local_sdca", "parse_libsvm", "partition_uniform", "primal_value", "rate_bound",
    "run_cocoa", "run_local_sgd", "run_minibatch_cd", "run_minibatch_sgd", "scale_to_unit_norm",
    "sigma_min", "theta_local_sdca",
]
