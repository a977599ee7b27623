"""Exact computations of Ext_{E(m)}(F_p, A//E(n)) and the audits built on them."""

from .fp_linalg import FpMatrix, kernel_basis, row_reduce, solve_linear, valuation_maximize
from .milnor import Element, Monomial, enumerate_basis, q_left_action
from .koszul import KoszulElement, Tridegree, differential, ext_basis, normal_representation
from .ext_analysis import AuditReport, audit_exactness, audit_main_inequality, audit_vanishing
from .chainmap import build_phi, phi_action, pi_action, surjectivity_matrix, verify_chain_map

__version__ = "0.1.0"
