"""Commuting approximants for averaged spin observables on tensor powers."""

from .errors import PreconditionError
from .exchange import ExchangePlan, braided_schedule, exchange_two_orbits
from .normalize import (
    nearest_normal,
    nearest_normal_sigma,
    normalize_shift,
)
from .shifts import (
    ShiftSystem,
    build_system,
    phase_normalize,
    self_commutator_norm,
    superdiagonal_norm,
    system_from_json,
    system_to_json,
    to_dense,
)
from .spin import (
    HalfInt,
    d_weight,
    d_weight_sq,
    irrep_generators,
    multiplicity_table,
    multiplicity_turning_point,
    pauli,
    pauli_coefficients,
    spin_matrix,
    spin_plus,
    spin_z,
    tensor_multiplicity,
    weight_estimates,
)

__version__ = "0.1.0"
