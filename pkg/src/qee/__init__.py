"""Qubit-environment entanglement under pure dephasing."""

from .criterion import (
    EntanglementVerdict,
    Minor,
    SeparableDecomposition,
    Tolerances,
    commutator_criterion,
    concurrence_two_qubit,
    cross_block_elements,
    find_negative_minor,
    minor_value,
    ppt_negativity,
    separable_decomposition,
    verdict,
)
from .errors import ContractError, DimensionError, InconsistencyError, QEEError
from .evolution import conditional_evolution, joint_state, qubit_coherence, reduced_env
from .model import (
    EnvironmentState,
    PureDephasingModel,
    QubitState,
    analyze_environment,
    build_ising_bath,
    build_random_model,
    build_thermal,
)
from .witness import env_change_witness, witness_precondition

__version__ = "0.1.0"
