"""Binary quantization onto LDGM codewords with bias propagation."""

from .bench import BenchRecord, run_bench, run_trial
from .degrees import (
    BUILTIN_RATES,
    DegreeDistributionError,
    EdgeDegreeDistribution,
    average_degree,
    builtin_pair,
    design_rate,
    load_distribution,
    node_degree_assignment,
    parse_distribution,
)
from .distortion import (
    binary_entropy,
    inverse_binary_entropy,
    linear_profile,
    shannon_distortion,
    solve_zeta,
    target_flip_probs,
    uniform_profile,
    weighted_distortion,
)
from .engine import BipParams, QuantizationResult, default_gamma, propagate, quantize, quantize_single_round
from .graph import FactorGraph, GraphError, ResidualState, decimate, encode, load_graph, sample_graph, save_graph
from .oracle import OracleError, exact_distribution, exhaustive_quantize
from .sources import random_source
from .tuner import GammaModel, TunerConfig, eval_gamma, fit_cubic, run_tuning

__version__ = "0.1.0"
