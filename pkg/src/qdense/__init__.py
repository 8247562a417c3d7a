"""Optimal approximate and unambiguous dense coding with pure entangled states."""

from .densecoding import (
    BoundReport,
    DenseCodingProtocol,
    OutcomeMatrix,
    Signal,
    all_inconclusive_protocol,
    approximate_bound,
    average_success_probability,
    build_approximate_protocol,
    build_unambiguous_protocol,
    check_unambiguous,
    generalized_pauli,
    monte_carlo_average,
    outcome_matrix,
    post_probability,
    random_protocol_search,
    success_probability,
    triangle_inequality_check,
    unambiguous_bound,
)
from .quantum import (
    BipartiteState,
    Povm,
    Prior,
    QuantumChannel,
    SchmidtSpectrum,
    ValidationError,
    apply_encoding,
    schmidt_decompose,
    state_from_spectrum,
    validate_channel,
    validate_povm,
)

__version__ = "0.1.0"
