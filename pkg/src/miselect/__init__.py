"""Mutual-information feature selection toolkit.

Scores feature subsets with MI-based criteria (max-relevance, mifs, mrmr,
jmi, d1, d2), searches the subset space greedily, exhaustively, or through
a semidefinite relaxation with randomized rounding, and evaluates the
outcome with built-in classifiers. Exact-pmf operations back every
estimator with testable identities.
"""

from ._version import __version__
from .criteria import (MEASURES, QMatrix, SubsetOracle, build_q_matrix,
                       criterion_oracle, quadratic_form, quadratic_oracle,
                       score_d1, score_d2, score_jmi, score_max_relevance,
                       score_mifs, score_mrmr)
from .dataset import (LABEL, DiscreteDataset, RawDataset, counts, discretize,
                      from_arrays, load_csv)
from .errors import ConfigError, DataError, SolverError, ToolkitError
from .eval import (CvConfig, EvalReport, bayes_error, cross_validate,
                   knn_predict, naive_bayes_predict, naive_bayes_train,
                   p_search, similarity_ratio, training_error, window_mean)
from .infotheory import (ExpansionTerms, FanoBound, JointPmf, MiMatrix,
                         conditional_mi, empirical_mi_terms, entropy,
                         expansion_first, expansion_second, fano_lower_bound,
                         hellman_raviv_upper_bound, joint_pair_class_mi,
                         kirkwood_cross_entropy, marginal, mi_terms_from_pmf,
                         multiway_mi, mutual_information)
from .sdp import (HomogenizedProblem, SdpSolution, cobra,
                  feasibility_residuals, homogenize, offset_constant,
                  randomized_round, size_adjust, solve_sdp, subset_from_signs)
from .search import (SelectionResult, backward_elimination, exhaustive,
                     forward_selection, oracle_from_table)
from .verify import verify_report

__all__ = [
    "__version__",
    "ToolkitError", "ConfigError", "DataError", "SolverError",
    "LABEL", "RawDataset", "DiscreteDataset", "load_csv", "discretize",
    "from_arrays", "counts",
    "JointPmf", "MiMatrix", "ExpansionTerms", "FanoBound", "marginal",
    "entropy", "mutual_information", "conditional_mi", "multiway_mi",
    "expansion_first", "expansion_second", "kirkwood_cross_entropy",
    "fano_lower_bound", "hellman_raviv_upper_bound", "empirical_mi_terms",
    "mi_terms_from_pmf", "joint_pair_class_mi",
    "MEASURES", "SubsetOracle", "QMatrix", "score_max_relevance",
    "score_mifs", "score_mrmr", "score_d1", "score_d2", "score_jmi",
    "criterion_oracle", "build_q_matrix", "quadratic_form",
    "quadratic_oracle",
    "SelectionResult", "forward_selection", "backward_elimination",
    "exhaustive", "oracle_from_table",
    "HomogenizedProblem", "SdpSolution", "homogenize", "offset_constant",
    "subset_from_signs", "solve_sdp", "feasibility_residuals",
    "randomized_round", "size_adjust", "cobra",
    "CvConfig", "EvalReport", "cross_validate", "training_error", "p_search",
    "naive_bayes_train", "naive_bayes_predict", "knn_predict",
    "similarity_ratio", "window_mean", "bayes_error",
    "verify_report",
]
