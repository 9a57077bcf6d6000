"""Quantum Fisher information of the dephased accelerated state.

Two independent routes share only the eigendecomposition of the state:

* :func:`qfi_sld` resolves the symmetric logarithmic derivative in the
  eigenbasis, ``F = sum_ij 2 |<i|drho|j>|^2 / (k_i + k_j)``.
* :func:`qfi_three_term` evaluates the classical / pure-state / mixing
  split ``F = F_cl + F_qu - F_mix`` from eigenvalue derivatives and
  first-order eigenvector derivatives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .channels import build_final_state, params_coherence_factor
from .errors import DegeneracyUnresolved, NotHermitian, OutOfRange
from .numerics import HERMITIAN_TOL, Spectrum, as_square, hermitian_eigendecompose, hermiticity_residual
from .params import MU_MAX, R_MAX, EstimationTarget, ModelParams
from .states import analytic_drho

logger = logging.getLogger(__name__)

EIG_CUTOFF = 1e-12
DEGENERACY_DELTA = 1e-10
FD_STEP = 1e-5
CONSISTENCY_RTOL = 1e-6
# Second-order couplings below this leave a doubly degenerate subspace harmless.
_CROSS_TERM_TOL = 1e-10

PROVIDERS = ("analytic", "fd")


@dataclass(frozen=True)
class QfiResult:
    """QFI total, its three components and diagnostics.

    ``total`` equals ``f_cl + f_qu - f_mix`` unless ``fallback`` is set, in
    which case it is the SLD value and ``note`` says why.
    """

    total: float
    f_cl: float
    f_qu: float
    f_mix: float
    dropped_pairs: int = 0
    degenerate_groups: int = 0
    sld_total: float | None = None
    residual_vs_sld: float | None = None
    fallback: bool = False
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "f_total": self.total,
            "f_cl": self.f_cl,
            "f_qu": self.f_qu,
            "f_mix": self.f_mix,
            "residual_vs_sld": self.residual_vs_sld,
        }


def _target_bounds(wrt: EstimationTarget) -> tuple[float, float]:
    return (0.0, R_MAX) if wrt is EstimationTarget.R else (0.0, MU_MAX)


def _target_value(params: ModelParams, wrt: EstimationTarget) -> float:
    return params.r if wrt is EstimationTarget.R else params.mu


def finite_diff_drho(params: ModelParams, wrt, h: float = FD_STEP) -> np.ndarray:
    """Second-order finite difference of the final state.

    Central differences in the interior; within ``h`` of an end of the
    parameter interval a one-sided three-point stencil is used instead.
    """
    wrt = EstimationTarget.parse(wrt)
    if not h > 0:
        raise ValueError("step h must be positive")
    lo, hi = _target_bounds(wrt)
    if 2 * h > hi - lo:
        raise OutOfRange(f"step h={h} too large for interval [{lo}, {hi}]")
    name = wrt.value
    x = _target_value(params, wrt)

    def state_at(value):
        return build_final_state(params.with_value(name, value))

    if x - h >= lo and x + h <= hi:
        d = (state_at(x + h) - state_at(x - h)) / (2 * h)
    elif x + 2 * h <= hi:
        d = (-3 * state_at(x) + 4 * state_at(x + h) - state_at(x + 2 * h)) / (2 * h)
    else:
        d = (3 * state_at(x) - 4 * state_at(x - h) + state_at(x - 2 * h)) / (2 * h)
    return 0.5 * (d + d.conj().T)


def richardson_drho(params: ModelParams, wrt, h: float = FD_STEP) -> np.ndarray:
    """Two-step Richardson extrapolation of :func:`finite_diff_drho` (h and h/2)."""
    coarse = finite_diff_drho(params, wrt, h)
    fine = finite_diff_drho(params, wrt, h / 2)
    return (4 * fine - coarse) / 3


def drho_for_params(params: ModelParams, wrt, provider: str = "analytic", h: float = FD_STEP) -> np.ndarray:
    wrt = EstimationTarget.parse(wrt)
    if provider == "analytic":
        return analytic_drho(params.mu, params.r, wrt, params_coherence_factor(params))
    if provider == "fd":
        return richardson_drho(params, wrt, h)
    raise ValueError(f"unknown derivative provider {provider!r}; expected one of {PROVIDERS}")


def _check_inputs(rho, drho, spectrum):
    rho = as_square(rho, "rho")
    drho = as_square(drho, "drho")
    if rho.shape != drho.shape:
        raise ValueError(f"rho and drho shapes differ: {rho.shape} vs {drho.shape}")
    res = hermiticity_residual(drho)
    if res > HERMITIAN_TOL:
        raise NotHermitian(f"drho not Hermitian: max |D - D^H| = {res:.3e}")
    if spectrum is None:
        spectrum = hermitian_eigendecompose(rho)
    return drho, spectrum


def _in_eigenbasis(vecs: np.ndarray, drho: np.ndarray) -> np.ndarray:
    m = vecs.conj().T @ drho @ vecs
    return 0.5 * (m + m.conj().T)


def qfi_sld(rho, drho, eig_cutoff: float = EIG_CUTOFF, spectrum: Spectrum | None = None) -> float:
    """QFI from the eigenbasis solution of the SLD equation.

    Pairs with ``k_i + k_j <= eig_cutoff`` are left out; the SLD is
    undetermined on the kernel of the state.
    """
    drho, spectrum = _check_inputs(rho, drho, spectrum)
    kappa = spectrum.eigenvalues
    m = _in_eigenbasis(spectrum.eigenvectors, drho)
    denom = kappa[:, None] + kappa[None, :]
    keep = denom > eig_cutoff
    f = 2.0 * np.sum(np.abs(m[keep]) ** 2 / denom[keep])
    return float(f)


def sld_operator(rho, drho, eig_cutoff: float = EIG_CUTOFF, spectrum: Spectrum | None = None) -> np.ndarray:
    """The SLD ``L`` in the computational basis, set to zero on the kernel."""
    drho, spectrum = _check_inputs(rho, drho, spectrum)
    kappa, vecs = spectrum
    m = _in_eigenbasis(vecs, drho)
    denom = kappa[:, None] + kappa[None, :]
    l_eig = np.where(denom > eig_cutoff, 2.0 * m / np.where(denom > eig_cutoff, denom, 1.0), 0.0)
    return vecs @ l_eig @ vecs.conj().T


def _degenerate_groups(values: np.ndarray, delta: float) -> list[list[int]]:
    """Chain consecutive sorted values closer than ``delta`` into groups."""
    groups = [[0]] if len(values) else []
    for i in range(1, len(values)):
        if abs(values[i - 1] - values[i]) < delta:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def qfi_three_term(
    rho,
    drho,
    degeneracy_delta: float = DEGENERACY_DELTA,
    eig_cutoff: float = EIG_CUTOFF,
    spectrum: Spectrum | None = None,
) -> QfiResult:
    """Classical, pure-state and mixing contributions to the QFI.

    Eigenvalue derivatives come from ``<psi_j|drho|psi_j>``; eigenvector
    derivatives from first-order perturbation theory in the gauge
    ``<psi_j|dpsi_j> = 0``. Inside a degenerate eigenspace the basis is first
    rotated to diagonalize the projected derivative, after which the
    intra-space components drop out of ``F_qu - F_mix`` and are set to zero.

    Eigenvalues at or below ``eig_cutoff`` are treated as exactly zero.

    Raises:
        NotHermitian: ``drho`` is not Hermitian.
        DegeneracyUnresolved: a degenerate eigenspace stays degenerate under
            the projected derivative while second-order couplings would
            still mix it, so the eigenvector derivatives are ambiguous.
    """
    drho, spectrum = _check_inputs(rho, drho, spectrum)
    kappa = np.where(spectrum.eigenvalues > eig_cutoff, spectrum.eigenvalues, 0.0)
    vecs = spectrum.eigenvectors.copy()
    m = _in_eigenbasis(vecs, drho)
    n = len(kappa)

    support = np.flatnonzero(kappa > 0)
    groups = [[int(support[i]) for i in g] for g in _degenerate_groups(kappa[support], degeneracy_delta)]
    kernel = [int(i) for i in np.flatnonzero(kappa == 0)]
    n_degenerate = sum(len(g) > 1 for g in groups) + (len(kernel) > 1)

    group_of = np.empty(n, dtype=int)
    for gi, g in enumerate(groups):
        group_of[g] = gi
    group_of[kernel] = len(groups)

    m_scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    for g in groups:
        if len(g) < 2:
            continue
        block = hermitian_eigendecompose(m[np.ix_(g, g)], tol=np.inf)
        vecs[:, g] = vecs[:, g] @ block.eigenvectors
        m = _in_eigenbasis(vecs, drho)
        outside = [i for i in range(n) if group_of[i] != group_of[g[0]]]
        for sub in _degenerate_groups(block.eigenvalues, degeneracy_delta * m_scale):
            if len(sub) < 2 or not outside:
                continue
            idx = [g[i] for i in sub]
            couplings = m[np.ix_(idx, outside)]
            gaps = kappa[g[0]] - kappa[outside]
            second = (couplings / gaps) @ couplings.conj().T
            cross = second - np.diag(np.diag(second))
            if np.max(np.abs(cross)) > _CROSS_TERM_TOL:
                raise DegeneracyUnresolved(
                    f"eigenspace {idx} (eigenvalue {kappa[g[0]]:.6g}) is degenerate under drho "
                    f"with second-order coupling {np.max(np.abs(cross)):.3e}"
                )

    dkappa = np.real(np.diag(m))
    gap = kappa[None, :] - kappa[:, None]  # gap[l, j] = k_j - k_l
    coupled = group_of[:, None] != group_of[None, :]
    # overlap[l, j] = <psi_l | d psi_j>
    overlap = np.where(coupled, m / np.where(coupled, gap, 1.0), 0.0)

    pos = kappa > 0
    f_cl = float(np.sum(dkappa[pos] ** 2 / kappa[pos]))
    norms = np.sum(np.abs(overlap) ** 2, axis=0)
    f_qu = float(4.0 * np.sum(kappa * (norms - np.abs(np.diag(overlap)) ** 2)))
    ksum = kappa[:, None] + kappa[None, :]
    pair = (ksum > eig_cutoff) & ~np.eye(n, dtype=bool)
    weights = np.where(pair, np.outer(kappa, kappa) / np.where(pair, ksum, 1.0), 0.0)
    f_mix = float(8.0 * np.sum(weights * np.abs(overlap) ** 2))

    raw = spectrum.eigenvalues
    raw_sum = raw[:, None] + raw[None, :]
    dropped = int(np.sum(np.triu(raw_sum <= eig_cutoff)))
    return QfiResult(
        total=f_cl + f_qu - f_mix,
        f_cl=f_cl,
        f_qu=f_qu,
        f_mix=f_mix,
        dropped_pairs=dropped,
        degenerate_groups=int(n_degenerate),
    )


def qfi_for_params(
    params: ModelParams,
    wrt,
    provider: str = "analytic",
    *,
    eig_cutoff: float = EIG_CUTOFF,
    degeneracy_delta: float = DEGENERACY_DELTA,
    h: float = FD_STEP,
    rtol: float = CONSISTENCY_RTOL,
) -> QfiResult:
    """QFI of the final state for one parameter point.

    Both routes are run. The three-term total is reported unless the
    decomposition fails or disagrees with the SLD value by more than
    ``rtol * max(1, F)``; then the SLD value is used and ``fallback`` set.
    """
    wrt = EstimationTarget.parse(wrt)
    rho = build_final_state(params)
    drho = drho_for_params(params, wrt, provider, h)
    spectrum = hermitian_eigendecompose(rho)
    sld = qfi_sld(rho, drho, eig_cutoff, spectrum=spectrum)
    try:
        result = qfi_three_term(rho, drho, degeneracy_delta, eig_cutoff, spectrum=spectrum)
    except DegeneracyUnresolved as exc:
        logger.debug("falling back to SLD total: %s", exc)
        return QfiResult(sld, float("nan"), float("nan"), float("nan"), sld_total=sld,
                         residual_vs_sld=float("nan"), fallback=True, note=str(exc))
    residual = abs(result.total - sld)
    result = replace(result, sld_total=sld, residual_vs_sld=residual)
    if residual > rtol * max(1.0, sld):
        note = f"three-term total deviates from SLD by {residual:.3e}"
        logger.debug("falling back to SLD total: %s", note)
        result = replace(result, total=sld, fallback=True, note=note)
    return result
