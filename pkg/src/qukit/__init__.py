"""Exact simulator of signed base-k qukit-string number representations."""
from .errors import (
    BaseMismatchError,
    DivisionByZeroError,
    FrameError,
    NonBasisError,
    NonTerminatingError,
    NonUnitaryError,
    OutOfDomainError,
    ParseError,
    QukitError,
    SequenceSpecError,
    StateError,
)
from .numeral import (
    ArithRelation,
    BasisNumeral,
    Op,
    arith_abs,
    arith_add,
    arith_div,
    arith_equal,
    arith_less,
    arith_mul,
    arith_op,
    arith_sub,
    canonicalize,
    decode_rational,
    encode_rational,
    format_numeral,
    parse_numeral,
    power_numeral,
    relate,
    successor_vj,
    unary_value,
)
from .fock import (
    FockState,
    MixedResult,
    apply_op_entangled,
    basis_state,
    inner_product,
    make_state,
    relation_probability,
    result_mixture,
    state_from_json,
    state_to_json,
)
from .gauge import GaugeField, apply_gauge, composite_signature, relation_in_gauge
from .base_change import (
    DomainKind,
    convert_approx,
    convert_exact,
    convert_state,
    convert_with_gauges,
    pf_domain_class,
    primorial,
    smallest_same_pf,
)
from .sequences import (
    StateSequence,
    asymptotic_compare,
    as_operator,
    cauchy_report,
    nearest_basis_sequence,
    p_nml,
    seq_arith,
    seq_from_spec,
    transform_sequence,
)
from .complexnum import ComplexBasisPair, complex_arith, complex_encode
from .frames import FrameField, FrameId, build_field, can_see, descendants, winding_number

__version__ = "0.1.0"
