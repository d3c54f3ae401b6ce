"""Numerical engine for bi-entangled hidden quantum Markov models."""
from .classical import classical_markov_probability, diagonal_closure_check, diagonal_restriction_check
from .entangled import (
    HiddenModel,
    QuantumChannelMap,
    apply_entangled,
    channel_from_pair_map,
    emission_operator_HO,
    transition_expectation_H,
    underlying_transition_expectation,
    validate_channel,
)
from .joint import (
    e0_of_word,
    hidden_expectation,
    hidden_lemma_formula,
    joint_expectation_bi,
    joint_expectation_generic,
    joint_expectation_oracle,
)
from .matrix import is_psd, kron, matrix_unit, schur_product
from .recurrence import (
    accessibility,
    communicates,
    complete_accessibility,
    e_recurrence_check,
    phi_recurrence_report,
    stopping_time_word,
    tail_word,
)

__version__ = "0.1.0"
