"""Small dense complex linear algebra.

The eigensolver is a cyclic complex Jacobi method. For the 6x6 states used
here it is exact on block structure: entries that are exactly zero are never
rotated, so disjoint blocks stay disjoint and their eigenvectors keep exact
zeros outside the block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotHermitian

HERMITIAN_TOL = 1e-12
MAX_SWEEPS = 100
MAX_DIM = 64
# Convergence: off-diagonal Frobenius norm relative to the full norm.
_OFF_RTOL = 1e-14
# Off-diagonal entries below this (relative to the norm) are dropped, not rotated.
_NEGLIGIBLE = 1e-30
# Components below this magnitude are skipped when fixing eigenvector phases.
_PHASE_ZERO = 1e-12


class Spectrum(NamedTuple):
    """Eigenvalues sorted descending; ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class DiagnosticsReport:
    hermiticity_residual: float
    trace_deviation: float
    min_eigenvalue: float
    is_hermitian: bool
    unit_trace: bool
    psd: bool

    @property
    def passed(self) -> bool:
        return self.is_hermitian and self.unit_trace and self.psd


def as_square(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def hermiticity_residual(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def frobenius_distance(a, b) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Annihilate ``a[p, q]`` in place with a complex Givens rotation."""
    apq = a[p, q]
    mag = abs(apq)
    phase = apq / mag
    app = a[p, p].real
    aqq = a[q, q].real
    diff = aqq - app
    if abs(diff) + 100.0 * mag == abs(diff):
        # angle ~ mag / diff; avoids overflow in zeta for negligible couplings
        t = mag / diff
    else:
        zeta = diff / (2.0 * mag)
        t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(zeta * zeta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    # U = diag(1, conj(phase)) @ [[c, s], [-s, c]] restricted to (p, q).
    u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ u
    a[idx, :] = u.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = app - t * mag
    a[q, q] = aqq + t * mag
    v[:, idx] = v[:, idx] @ u


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > _PHASE_ZERO)
        if nz.size:
            lead = col[nz[0]]
            out[:, j] = col * (abs(lead) / lead)
            out[nz[0], j] = abs(lead)
    return out


def hermitian_eigendecompose(a, tol: float = HERMITIAN_TOL, max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Args:
        a: square complex matrix, Hermitian within ``tol`` (max-entry norm).
        tol: Hermiticity tolerance.
        max_sweeps: sweep budget before giving up.

    Returns:
        Spectrum with eigenvalues descending (ties keep original diagonal
        order) and unit eigenvectors whose first nonzero component is real
        and nonnegative.

    Raises:
        NotHermitian: ``a`` deviates from its adjoint by more than ``tol``.
        NoConvergence: the off-diagonal mass did not vanish within the budget.
    """
    a = as_square(a)
    n = a.shape[0]
    if n > MAX_DIM:
        raise DimensionMismatch(f"dimension {n} exceeds {MAX_DIM}")
    res = hermiticity_residual(a)
    if res > tol:
        raise NotHermitian(f"matrix not Hermitian: max |A - A^H| = {res:.3e} > {tol:.1e}")

    work = 0.5 * (a + a.conj().T)
    vecs = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(work))
    if scale > 0.0:
        # unit Frobenius norm keeps subnormal entries out of the rotation formulas
        work /= scale
        for _ in range(max_sweeps):
            off = work - np.diag(np.diag(work))
            if float(np.linalg.norm(off)) <= _OFF_RTOL:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    mag = abs(work[p, q])
                    if mag == 0.0:
                        continue
                    if mag <= _NEGLIGIBLE:
                        work[p, q] = work[q, p] = 0.0
                    else:
                        _rotate(work, vecs, p, q)
        else:
            off = work - np.diag(np.diag(work))
            if float(np.linalg.norm(off)) > _OFF_RTOL:
                raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    vals = scale * np.real(np.diag(work))
    order = np.argsort(-vals, kind="stable")
    return Spectrum(vals[order], _fix_phases(vecs[:, order]))


def validate_density(a, tol: float = HERMITIAN_TOL, psd_tol: float | None = None) -> DiagnosticsReport:
    """Check Hermiticity, unit trace and positivity; never raises on bad input."""
    psd_tol = tol if psd_tol is None else psd_tol
    a = np.asarray(a, dtype=complex)
    herm = hermiticity_residual(a)
    trace_dev = abs(complex(np.trace(a)) - 1.0)
    try:
        min_eig = float(hermitian_eigendecompose(0.5 * (a + a.conj().T), tol=math.inf).eigenvalues[-1])
    except (NoConvergence, DimensionMismatch, ValueError):
        min_eig = float(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0]) if np.all(np.isfinite(a)) else math.nan
    return DiagnosticsReport(
        hermiticity_residual=herm,
        trace_deviation=trace_dev,
        min_eigenvalue=min_eig,
        is_hermitian=herm <= tol,
        unit_trace=trace_dev <= tol,
        psd=min_eig >= -psd_tol,
    )
