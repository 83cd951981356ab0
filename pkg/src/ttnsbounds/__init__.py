"""Exact tree tensor network states, truncation, and certified error bounds."""
from .dense import (DenseState, SchmidtSpectrum, error_sq, inner, load_state, save_state,
                    schmidt_decompose, truncation_error)
from .entropy import (BoundEvaluation, EdgeDistribution, bond_dim_lower_bound,
                      bond_dim_upper_bound, entropy_upper_via_spread, error_lower_bound,
                      error_upper_bound, extremal_spread, majorizing_extremal, optimize_alpha,
                      renyi_entropy)
from .targets import HamiltonianSpec, entropy_profile, ground_state, make_named
from .tree import TreeGraph, branch, canonicalize, from_edge_list, is_linear
from .truncation import (TruncationPlan, TruncationResult, min_bond_dims, mps_channel_check,
                         mps_vc_bound, truncate_lazy, truncate_projector, verify_sandwich)
from .ttns import Ttns, TtnsTensor, check_canonical, contract, exact_decompose, spectrum_from_ttns

__version__ = "0.1.0"
