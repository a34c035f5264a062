from .construction import (ConstructionError, ConstructionState, assign_degrees, complete_jdd,
                           construct_2k_baseline, construct_2kt, greedy_local_edges)
from .generate import GENERATORS, GenerationResult, generate_25k
from .mcmc import McmcConfig, McmcResult, mcmc_target_ck, write_trace_csv

__all__ = [
    "ConstructionError", "ConstructionState", "assign_degrees", "complete_jdd", "construct_2k_baseline",
    "construct_2kt", "greedy_local_edges", "GENERATORS", "GenerationResult", "generate_25k",
    "McmcConfig", "McmcResult", "mcmc_target_ck", "write_trace_csv",
]
