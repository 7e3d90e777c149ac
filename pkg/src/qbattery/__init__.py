"""Single-qubit quantum battery: unitary vs. measurement-assisted extraction.

Conventions used throughout: hbar = 1, |0> is the excited sigma_z eigenstate,
energies are in units of the field strength h, times in units of 1/h.
"""

from .battery import (
    BlochVector,
    HamiltonianSpec,
    battery_state,
    bloch_state,
    energy,
    ergotropy,
    hamiltonian_battery,
    hamiltonian_joint,
    passive_state,
)
from .errors import ConfigError, DimensionError, DomainError, HermiticityError
from .optimizer import OptimizationReport, SearchSpace, optimize, sample_point
from .protocol import (
    EntangledInitParams,
    MeasurementBasis,
    ProtocolResult,
    best_outcome,
    entangled_initial,
    run_protocol,
    separable_initial,
)
from .analytic import (
    MpsScanReport,
    entanglement_entropy,
    mps_scan,
    wp_closed_form,
    wp_excited_oracle,
    wp_small_t,
)

__version__ = "0.1.0"

__all__ = [
    "BlochVector",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "EntangledInitParams",
    "HamiltonianSpec",
    "HermiticityError",
    "MeasurementBasis",
    "MpsScanReport",
    "OptimizationReport",
    "ProtocolResult",
    "SearchSpace",
    "battery_state",
    "best_outcome",
    "bloch_state",
    "energy",
    "entangled_initial",
    "entanglement_entropy",
    "ergotropy",
    "hamiltonian_battery",
    "hamiltonian_joint",
    "mps_scan",
    "optimize",
    "passive_state",
    "run_protocol",
    "sample_point",
    "separable_initial",
    "wp_closed_form",
    "wp_excited_oracle",
    "wp_small_t",
]
