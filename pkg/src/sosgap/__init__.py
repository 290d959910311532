"""Exact desk-scale construction and verification of SOS lower-bound objects for random CSPs."""

__version__ = "0.1.0"

from .closure import ClosedSet, compute_closure, is_closed
from .instance import Clause, Instance, NiceParams, check_nice, generate_random, girth, load_instance, prune_cycles
from .localdist import check_consistency, check_disjoint_product, check_union_factorization, nu_closed, peel_order
from .ortho import build_ordering, orthogonalize_all
from .pairwise import PairwiseDist, builtin_mu, parity_distribution, uniform_distribution, verify_pairwise_independent
from .pseudo import PseudoExpectation, build_moment_matrix, check_psd_exact, check_psd_float
from .soundness import assignment_distribution, max_deviation, stat_distance
