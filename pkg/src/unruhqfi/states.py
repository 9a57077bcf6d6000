"""Initial and accelerated qubit-qutrit states and their parameter derivatives.

Basis ordering is ``index = 3 * qubit + qutrit``::

    0:|00>  1:|01>  2:|02>  3:|10>  4:|11>  5:|12>

The accelerated state is a direct sum of two 2x2 blocks on {0, 5} and
{2, 3} plus singletons {1} and {4}.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass

import numpy as np

from .errors import DomainError
from .params import EstimationTarget, check_range, check_state_params

DIM = 6

# (row, col) positions of the coherences, in coefficient order rho3..rho6.
COHERENCE_POSITIONS = ((0, 5), (5, 0), (3, 2), (2, 3))
# Diagonal index of rho1, rho2, rho7, rho8, rho10, rho9.
_DIAG_ORDER = ("rho1", "rho2", "rho7", "rho8", "rho10", "rho9")


@dataclass(frozen=True)
class CoefficientSet:
    rho1: float
    rho2: float
    rho3: float
    rho4: float
    rho5: float
    rho6: float
    rho7: float
    rho8: float
    rho9: float
    rho10: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)

    def populations(self) -> np.ndarray:
        """Diagonal of the state in basis order."""
        return np.array([getattr(self, name) for name in _DIAG_ORDER])


def rho_coefficients(mu: float, r: float) -> CoefficientSet:
    """The ten matrix-element coefficients of the accelerated state."""
    mu, r = check_state_params(mu, r)
    c = math.cos(r)
    c2 = c * c
    s2 = math.sin(r) ** 2
    half_mu = mu / 2
    rest = (1 - 2 * mu) / 2
    return CoefficientSet(
        rho1=half_mu * c2,
        rho2=half_mu * c2,
        rho3=half_mu * c,
        rho4=half_mu * c,
        rho5=rest * c,
        rho6=rest * c,
        rho7=rest * c2,
        rho8=rest + half_mu * s2,
        rho9=half_mu + rest * s2,
        rho10=half_mu * (1 + s2),
    )


def assemble(coeffs: CoefficientSet, coherence_factor: float = 1.0) -> np.ndarray:
    """Place coefficients into the 6x6 matrix, scaling the coherences."""
    m = np.zeros((DIM, DIM), dtype=complex)
    m[np.arange(DIM), np.arange(DIM)] = coeffs.populations()
    for (i, j), value in zip(COHERENCE_POSITIONS, (coeffs.rho3, coeffs.rho4, coeffs.rho5, coeffs.rho6)):
        m[i, j] = coherence_factor * value
    return m


def build_accelerated_state(mu: float, r: float) -> np.ndarray:
    return assemble(rho_coefficients(mu, r))


def build_initial_state(mu: float) -> np.ndarray:
    """State before acceleration, taken as the zero-acceleration limit.

    This is Hermitian, unit-trace and positive semidefinite for every
    ``mu`` in [0, 1/2].
    """
    return build_accelerated_state(mu, 0.0)


def acceleration_to_rindler(omega: float, a_c: float, c: float = 1.0) -> float:
    """Map a proper acceleration to the Rindler angle ``r = arctan(exp(-pi*omega*c/a_c))``."""
    if omega <= 0 or c <= 0:
        raise DomainError("omega and c must be positive")
    if a_c == 0:
        raise DomainError("a_c = 0 has no Rindler angle (r -> 0 only as a limit)")
    return math.atan(math.exp(-math.pi * omega * c / a_c))


def _coefficient_derivatives(mu: float, r: float, wrt: EstimationTarget) -> CoefficientSet:
    c = math.cos(r)
    s = math.sin(r)
    if wrt is EstimationTarget.R:
        s2r = math.sin(2 * r)
        half_mu = mu / 2
        rest = (1 - 2 * mu) / 2
        return CoefficientSet(
            rho1=-half_mu * s2r,
            rho2=-half_mu * s2r,
            rho3=-half_mu * s,
            rho4=-half_mu * s,
            rho5=-rest * s,
            rho6=-rest * s,
            rho7=-rest * s2r,
            rho8=half_mu * s2r,
            rho9=rest * s2r,
            rho10=half_mu * s2r,
        )
    c2 = c * c
    s2 = s * s
    return CoefficientSet(
        rho1=c2 / 2,
        rho2=c2 / 2,
        rho3=c / 2,
        rho4=c / 2,
        rho5=-c,
        rho6=-c,
        rho7=-c2,
        rho8=-1 + s2 / 2,
        rho9=0.5 - s2,
        rho10=(1 + s2) / 2,
    )


def analytic_drho(mu: float, r: float, wrt, coherence_factor: float = 1.0) -> np.ndarray:
    """Closed-form derivative of the (possibly dephased) state.

    The dephasing factor does not depend on ``mu`` or ``r``, so it simply
    rescales the differentiated coherences.
    """
    mu, r = check_state_params(mu, r)
    check_range("coherence_factor", coherence_factor, 0.0, 1.0)
    wrt = EstimationTarget.parse(wrt)
    return assemble(_coefficient_derivatives(mu, r, wrt), coherence_factor)
