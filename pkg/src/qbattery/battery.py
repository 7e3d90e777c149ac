"""Battery and auxiliary states, Hamiltonians, passive states, ergotropy.

The battery and auxiliary are single qubits with local Hamiltonian h*sigma_z
(h > 0), coupled by J*(sigma_x x sigma_x). Energies are reported in units of
h and times in units of 1/h. The default coupling for the numerical regime
is J = 2h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .errors import DomainError
from .qmath import I2, SIGMA_X, SIGMA_Y, SIGMA_Z


@dataclass(frozen=True)
class HamiltonianSpec:
    """Energy scale h and battery-auxiliary coupling J (J defaults to 2h)."""

    h: float = 1.0
    J: float | None = None

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise DomainError(f"field strength h must be positive and finite, got {self.h}")
        if self.J is None:
            object.__setattr__(self, "J", 2.0 * self.h)
        if not math.isfinite(self.J):
            raise DomainError(f"coupling J must be finite, got {self.J}")


@dataclass(frozen=True)
class BlochVector:
    """Spherical coordinates (r, theta, phi) of a qubit state on the Bloch ball."""

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0):
            raise DomainError(f"Bloch radius must lie in [0, 1], got {self.r}")

    def cartesian(self) -> tuple[float, float, float]:
        return (
            self.r * math.sin(self.theta) * math.cos(self.phi),
            self.r * math.sin(self.theta) * math.sin(self.phi),
            self.r * math.cos(self.theta),
        )


def battery_state(k: float) -> np.ndarray:
    """Diagonal battery state diag((1+k)/2, (1-k)/2), |0> excited, |k| <= 1."""
    if abs(k) > 1.0:
        raise DomainError(f"population bias k must lie in [-1, 1], got {k}")
    return np.diag([(1.0 + k) / 2.0, (1.0 - k) / 2.0]).astype(complex)


def bloch_state(b: BlochVector) -> np.ndarray:
    """Density matrix (I + r.sigma)/2 for a Bloch vector."""
    x, y, z = b.cartesian()
    return 0.5 * (I2 + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)


def hamiltonian_battery(spec: HamiltonianSpec) -> np.ndarray:
    """Local battery Hamiltonian h*sigma_z."""
    return spec.h * SIGMA_Z


def hamiltonian_joint(spec: HamiltonianSpec) -> np.ndarray:
    """Two-qubit Hamiltonian h(sz x I) + h(I x sz) + J(sx x sx)."""
    return (
        spec.h * qmath.kron(SIGMA_Z, I2)
        + spec.h * qmath.kron(I2, SIGMA_Z)
        + spec.J * qmath.kron(SIGMA_X, SIGMA_X)
    )


def energy(rho, spec: HamiltonianSpec) -> float:
    """Mean battery energy Tr(rho * h*sigma_z)."""
    return float(np.real(np.trace(np.asarray(rho) @ hamiltonian_battery(spec))))


def passive_state(rho, h_op) -> np.ndarray:
    """State with the same spectrum as rho but no unitarily extractable energy.

    Populations of rho, sorted descending, are attached to the eigenvectors
    of h_op sorted by ascending energy; the result commutes with h_op.
    """
    pops = np.sort(qmath.hermitian_eig(rho).values)[::-1]
    levels = qmath.hermitian_eig(h_op).vectors
    return (levels * pops) @ levels.conj().T


def ergotropy(rho, spec: HamiltonianSpec) -> float:
    """Maximum energy extractable by a unitary: E(rho) - E(passive(rho))."""
    w = energy(rho, spec) - energy(passive_state(rho, hamiltonian_battery(spec)), spec)
    # analytically non-negative; clamp the floating-point dust
    if -1e-10 <= w < 0.0:
        return 0.0
    return w
