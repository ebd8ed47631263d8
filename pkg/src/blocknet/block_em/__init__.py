"""Block recovery by variational EM with minorization-maximization updates."""
from .diagnostics import PartitionSummary, partition_summary, yule_coefficient
from .init import init_blocks
from .layers import MAX_COVARIATES, SparseLayers
from .omega import ClampWarning, entropy_term, lower_bound, moebius_tables, omega, omega_naive
from .qp import kkt_residual, qp_simplex, qp_simplex_rows
from .run import EMResult, em_run, modal_assignment
from .state import MinorizerCoeffs, VariationalState, smoothed_one_hot
from .updates import EmptyCellWarning, minorizer_coeffs, update_eta, update_pi, update_xi

__all__ = [
    "ClampWarning", "EMResult", "EmptyCellWarning", "MAX_COVARIATES", "MinorizerCoeffs",
    "PartitionSummary", "SparseLayers", "VariationalState", "em_run", "entropy_term",
    "init_blocks", "kkt_residual", "lower_bound", "minorizer_coeffs", "modal_assignment",
    "moebius_tables", "omega", "omega_naive", "partition_summary", "qp_simplex",
    "qp_simplex_rows", "smoothed_one_hot", "update_eta", "update_pi", "update_xi",
    "yule_coefficient",
]
