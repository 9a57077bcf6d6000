"""Phase-flip channels on the qubit and on the qutrit.

Both channels are conjugations by diagonal unitaries mixed with the
identity, so they leave populations untouched and only rescale
coherences. The closed form in :func:`build_final_state` relies on that.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidChannel
from .params import ChannelScenario, ModelParams, check_range
from .states import DIM, assemble, build_accelerated_state, rho_coefficients

COMPLETENESS_TOL = 1e-10

SIGMA_Z_QUBIT = np.diag([1.0, 1.0, 1.0, -1.0, -1.0, -1.0]).astype(complex)
_OMEGA = cmath.exp(-2j * math.pi / 3)
QUTRIT_CLOCK = np.kron(np.eye(2), np.diag([1.0, _OMEGA, _OMEGA.conjugate()]))


@dataclass(frozen=True)
class KrausSet:
    operators: tuple
    label: str = ""

    def completeness_residual(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.linalg.norm(total - np.eye(total.shape[0])))

    def __len__(self) -> int:
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)


def qubit_amplitudes(gamma_a: float) -> tuple[float, float]:
    gamma_a = check_range("gamma_a", gamma_a, 0.0, 1.0)
    return math.sqrt(1 - gamma_a / 2), math.sqrt(gamma_a / 2)


def qutrit_amplitudes(gamma_b: float) -> tuple[float, float]:
    """Weights (R1, R2) of the identity and clock operators.

    R2 = sqrt(gamma_b / 3) is the unique nonnegative choice that makes
    R1**2 + 2 * R2**2 = 1.
    """
    gamma_b = check_range("gamma_b", gamma_b, 0.0, 1.0)
    return math.sqrt(1 - 2 * gamma_b / 3), math.sqrt(gamma_b / 3)


def qubit_phase_kraus(gamma_a: float) -> KrausSet:
    p1, p2 = qubit_amplitudes(gamma_a)
    return KrausSet((p1 * np.eye(DIM, dtype=complex), p2 * SIGMA_Z_QUBIT), label="qubit")


def qutrit_phase_kraus(gamma_b: float) -> KrausSet:
    r1, r2 = qutrit_amplitudes(gamma_b)
    k2 = r2 * QUTRIT_CLOCK
    return KrausSet((r1 * np.eye(DIM, dtype=complex), k2, k2.conj().T), label="qutrit")


def apply_channel(rho, ks: KrausSet) -> np.ndarray:
    """Return ``sum_k K rho K^H``; rejects sets that are not trace preserving."""
    residual = ks.completeness_residual()
    if residual > COMPLETENESS_TOL:
        raise InvalidChannel(f"Kraus completeness residual {residual:.3e} exceeds {COMPLETENESS_TOL:.0e}")
    rho = np.asarray(rho, dtype=complex)
    return sum(k @ rho @ k.conj().T for k in ks.operators)


def qutrit_dephasing_factor(gamma_b: float) -> float:
    return 1 - (2 * gamma_b / 3) * (1 - math.cos(2 * math.pi / 3))


def coherence_factor(scenario, gamma_a: float, gamma_b: float) -> float:
    """Factor by which the channel scales every coherence of the state."""
    scenario = ChannelScenario.parse(scenario)
    qubit = 1 - gamma_a
    qutrit = qutrit_dephasing_factor(gamma_b)
    if scenario is ChannelScenario.NONE:
        return 1.0
    if scenario is ChannelScenario.QUBIT:
        return qubit
    if scenario is ChannelScenario.QUTRIT:
        return qutrit
    return qubit * qutrit


def params_coherence_factor(params: ModelParams) -> float:
    return coherence_factor(params.scenario, params.gamma_a, params.gamma_b)


def kraus_sets_for(params: ModelParams) -> list[KrausSet]:
    """Kraus sets applied for a scenario, qubit first."""
    sets = []
    if params.scenario in (ChannelScenario.QUBIT, ChannelScenario.BOTH):
        sets.append(qubit_phase_kraus(params.gamma_a))
    if params.scenario in (ChannelScenario.QUTRIT, ChannelScenario.BOTH):
        sets.append(qutrit_phase_kraus(params.gamma_b))
    return sets


def build_final_state(params: ModelParams) -> np.ndarray:
    """Closed-form output state of the accelerated state after the channel(s)."""
    return assemble(rho_coefficients(params.mu, params.r), params_coherence_factor(params))


def final_state_via_kraus(params: ModelParams) -> np.ndarray:
    """Same state as :func:`build_final_state`, by explicit Kraus conjugation."""
    rho = build_accelerated_state(params.mu, params.r)
    for ks in kraus_sets_for(params):
        rho = apply_channel(rho, ks)
    return rho
