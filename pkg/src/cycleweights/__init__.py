"""Random permutations with cycle weights: exact laws, saddle-point asymptotics,
limit laws and exact sampling."""
from .errors import (BudgetExceeded, ConfigError, CycleWeightsError, NumericError,
                     TruncationError, UnsupportedLimit)
from .exact import (NormTable, Pmf, compute_norms, dist_K, dist_L1, dist_Rj, expected_K,
                    factorial_moment, log_factorial_moment)
from .limits import LawKind, LimitLaw, eval_cdf, gem_sample, lambda_eval, pd_sample, predict
from .montecarlo import BatchStats, CycleType, SampleRecord, run_batch, sample_cycle_type
from .saddle import (GenFnKind, GenFnSpec, SaddleSolution, asymptotic_hn, asymptotic_theta,
                     eval_Imu, ratio_bounds, solve_saddle)
from .weights import (PRESETS, Family, FamilyParams, WeightTable, build_weights,
                      extract_subexp_coeffs, family_params)

__version__ = "0.1.0"
