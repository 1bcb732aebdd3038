"""Exact engine for size-weighted tree automata and their generating functions."""

from .core import (
    Automaton,
    FinalVector,
    RankedAlphabet,
    Tree,
    absorb_final_vector,
    automaton_from_json,
    automaton_to_json,
    enumerate_trees,
    evaluate,
    kron,
    make_arity_distinct,
    parse_tree,
    tree_size,
    unify_alphabets,
)
from .exactmath import (
    MultiPolynomial,
    Rational,
    SizeRational,
    UniPolynomial,
    normalize_common_denominator,
    parse_size_rational,
    poly_integer_roots,
    size_rational_eval,
)
from .series import (
    SeriesPrefix,
    VectorSeriesPrefix,
    brute_force_coefficient,
    coefficients,
    generating_prefix,
    s_derive,
    series_add,
    series_cauchy,
    series_scale,
)
from .closure import (
    gf_add,
    gf_cauchy,
    gf_derive,
    gf_integrate,
    gf_inverse,
    gf_mul_shifted,
    gf_scale,
    gf_shift_backward,
    gf_shift_forward,
    ts_add,
    ts_hadamard,
    ts_scale,
)
from .compile import (
    DAEquation,
    DFiniteRecurrence,
    RDS,
    compile_cda,
    compile_dfinite,
    compile_rda,
    da_to_rds,
    parse_da,
    parse_dfinite,
    parse_rds,
    taylor_oracle,
)
from .decide import (
    check_equiv_genfun,
    check_equiv_tree_series,
    check_zero_genfun,
    check_zero_tree_series,
    compute_bound,
    emit_differential_system,
)
from .species import (
    SpeciesSpec,
    count_species,
    diffsys_to_rds,
    parse_species,
    species_to_diffsys,
    species_to_rds,
)

__all__ = [name for name in dir() if not name.startswith("_")]
