"""Finite-dimensional Heisenberg-picture simulator: operator algebra, unitary
motions, information-flow analysis and decision-theoretic game values checked
against the trace rule.
"""

from .checks import Check
from .darwinism import (
    BranchStructure,
    CorrelationReport,
    branch_decomposition,
    correlation_check,
    is_classical_act,
    phase_equivalent,
)
from .errors import DimensionError, NotClassicalError, ScenarioError, ValidationError
from .measurement import (
    Multiplicities,
    Permutation,
    coarse_measurement_unitary,
    measurement_unitary,
    mod_add,
    permutation_unitary,
    sequential_measurement,
)
from .operators import (
    CoefficientTensor,
    CompositeSpace,
    HeisenbergState,
    MatrixUnitFamily,
    Observable,
    ProjectorFamily,
    Spectrum,
    Unitary,
    accessible_info,
    evolve,
    express_in_family,
    is_pure,
    make_matrix_units,
    spectral_decompose,
    tensor_embed,
)

__version__ = "0.1.0"

__all__ = [
    "BranchStructure",
    "Check",
    "CoefficientTensor",
    "CompositeSpace",
    "CorrelationReport",
    "DimensionError",
    "HeisenbergState",
    "MatrixUnitFamily",
    "Multiplicities",
    "NotClassicalError",
    "Observable",
    "Permutation",
    "ProjectorFamily",
    "ScenarioError",
    "Spectrum",
    "Unitary",
    "ValidationError",
    "accessible_info",
    "branch_decomposition",
    "coarse_measurement_unitary",
    "correlation_check",
    "evolve",
    "express_in_family",
    "is_classical_act",
    "is_pure",
    "make_matrix_units",
    "measurement_unitary",
    "mod_add",
    "permutation_unitary",
    "phase_equivalent",
    "sequential_measurement",
    "spectral_decompose",
    "tensor_embed",
]
