"""Dense state-vector simulation, an OpenQASM 2.0 subset, and constant-depth key search."""

from importlib import resources

from .algorithms import (
    GroverSpec,
    SearchSpec,
    build_constant_search,
    build_grover,
    entangling_oracle,
    grover_diffusion,
    grover_phase_oracle,
    hadamard_transform_reference,
    phase_oracle,
)
from .circuit import Circuit, Instruction, execute, validate
from .gates import GateDef, decompose_identity_check, matrix_of
from .noise import NoiseModel, apply_noisy_execution, fit_readout
from .qasm import ParseError, dumps, parse
from .report import CountsReport
from .statevec import (
    StateVector,
    apply_gate,
    dense_unitary_of,
    init_basis,
    probabilities,
    sample_measurements,
)

__version__ = "0.1.0"


def key_search_listing() -> str:
    """The bundled four-qubit key-search listing (key 01) as text."""
    return resources.files(__package__).joinpath("data/key_search_01.qasm").read_text(encoding="utf-8")


__all__ = [
    "Circuit",
    "CountsReport",
    "GateDef",
    "GroverSpec",
    "Instruction",
    "NoiseModel",
    "ParseError",
    "SearchSpec",
    "StateVector",
    "apply_gate",
    "apply_noisy_execution",
    "build_constant_search",
    "build_grover",
    "decompose_identity_check",
    "dense_unitary_of",
    "dumps",
    "entangling_oracle",
    "execute",
    "key_search_listing",
    "fit_readout",
    "grover_diffusion",
    "grover_phase_oracle",
    "hadamard_transform_reference",
    "init_basis",
    "matrix_of",
    "parse",
    "phase_oracle",
    "probabilities",
    "sample_measurements",
    "validate",
]
