from .core import (MissingTrace, WalkOutcome, many_random_walks, naive_random_walk, phase1_distribute,
                   regenerate_walk, regenerate_walks, sample_coupon, send_more_coupons, single_random_walk)
from .kernels import MHKernel, SimpleKernel, WeightError
from .params import ParamError, WalkParams
from .extra import fallback_collect, k_rw_sod, mh_random_walk

__all__ = ["MHKernel", "MissingTrace", "ParamError", "SimpleKernel", "WalkOutcome", "WalkParams", "WeightError",
           "fallback_collect", "k_rw_sod", "many_random_walks", "mh_random_walk", "naive_random_walk",
           "phase1_distribute", "regenerate_walk", "regenerate_walks", "sample_coupon", "send_more_coupons",
           "single_random_walk"]
