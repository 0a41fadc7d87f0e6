"""Exact computations for almost Lie algebroids and their cochain complex."""

from .scalars import Derivation, Polynomial, Rational, derivation_commutator, parse_polynomial
from .algebroid import (
    AlgebroidSpec,
    AxiomReport,
    KernelEscapeError,
    Section,
    SpecError,
    anchor_of,
    bracket,
    check_axioms,
    connection,
    connection_coefficients,
    frame_connection,
    jacobiator,
    jacobiator_tensor,
    permute_frame,
)
from .cochain import (
    Cochain,
    check_d_squared,
    check_dj_zero,
    d_operator,
    delta_hat,
    j_hat,
    j_tilde,
    l_star,
    q_coordinate_check,
    random_cochain,
    total_differential,
    wedge,
)
from .cohomology import BettiTable, ComplexSlice, assemble_slice, betti_table, exact_rank
from .specfile import dumps, loads, read_spec, write_spec

__all__ = [
    "Derivation",
    "Polynomial",
    "Rational",
    "derivation_commutator",
    "parse_polynomial",
    "AlgebroidSpec",
    "AxiomReport",
    "KernelEscapeError",
    "Section",
    "SpecError",
    "anchor_of",
    "bracket",
    "check_axioms",
    "connection",
    "connection_coefficients",
    "frame_connection",
    "jacobiator",
    "jacobiator_tensor",
    "permute_frame",
    "Cochain",
    "check_d_squared",
    "check_dj_zero",
    "d_operator",
    "delta_hat",
    "j_hat",
    "j_tilde",
    "l_star",
    "q_coordinate_check",
    "random_cochain",
    "total_differential",
    "wedge",
    "BettiTable",
    "ComplexSlice",
    "assemble_slice",
    "betti_table",
    "exact_rank",
    "dumps",
    "loads",
    "read_spec",
    "write_spec",
]

__version__ = "0.1.0"
