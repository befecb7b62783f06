"""Rank-constrained positive semidefinite Grothendieck problem.

Solve the vector relaxation, round it to rank ``n`` by Gaussian projection,
and numerically check the constants that govern the approximation ratio.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateInstance,
    FormatError,
    InvalidInput,
    NumericalError,
    TooLarge,
)
from .matrix import PsdMatrix, WeightedGraph, laplacian, load_matrix, random_gram, save_matrix, validate_psd
from .sdp_solver import GramSolution, SolverConfig, objective_value, solve_sdp_relaxation
from .rounding import (
    RoundedSolution,
    best_of_rounds,
    expected_ratio_estimate,
    hardness_reduction_check,
    round_rank_n,
)
from .special_functions import c_m, gamma_n, gauss_legendre, inner_product_alpha, jacobi_poly
from .en_analysis import (
    PositiveTypeExpansion,
    check_positive_type_matrix,
    en_integral,
    en_monte_carlo,
    f1_extract,
    positive_type_expand,
    v_n,
)
from .oracle import OracleResult, brute_force_sdp1, grid_search_rank2
