import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import draw_params
from unruhqfi import qfi as qfi_mod
from unruhqfi.channels import build_final_state, params_coherence_factor
from unruhqfi.errors import DegeneracyUnresolved, NotHermitian, OutOfRange
from unruhqfi.numerics import Spectrum, hermitian_eigendecompose
from unruhqfi.params import ChannelScenario, EstimationTarget, ModelParams
from unruhqfi.qfi import (
    finite_diff_drho,
    qfi_for_params,
    qfi_sld,
    qfi_three_term,
    richardson_drho,
    sld_operator,
)
from unruhqfi.states import analytic_drho

R, MU = EstimationTarget.R, EstimationTarget.MU


def random_density(rng, n=6, rank=None):
    rank = n if rank is None else rank
    x = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, n=6):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (x + x.conj().T)


def lyapunov_qfi(rho, drho):
    # rho L + L rho = 2 drho, F = tr(rho L^2); valid for full-rank rho
    sld = scipy.linalg.solve_continuous_lyapunov(rho, 2 * drho)
    return float(np.trace(rho @ sld @ sld).real)


def classical_fisher_golden():
    # populations (kappa, d kappa / d sin^2 r) at r = pi/6 with mu = 1/5; the state
    # is diagonal here, so F_r = sum (d kappa)^2 / kappa and (d sin^2 r / dr)^2 = 3/4
    mu = Fraction(1, 5)
    c2, s2 = Fraction(3, 4), Fraction(1, 4)
    half, rest = mu / 2, (1 - 2 * mu) / 2
    pops = [
        (half * c2, -half),
        (half * c2, -half),
        (rest * c2, -rest),
        (rest + half * s2, half),
        (half + rest * s2, rest),
        (half * (1 + s2), half),
    ]
    return sum(Fraction(3, 4) * d * d / k for k, d in pops)


# --- finite differences ---------------------------------------------------

def test_fd_one_sided_at_r0():
    p = ModelParams(0.3, 0.0)
    d = finite_diff_drho(p, R, 1e-5)
    assert np.linalg.norm(d) <= 1e-8


def test_fd_one_sided_at_upper_end():
    p = ModelParams(0.3, math.pi / 4, 0.4, 0.2, ChannelScenario.BOTH)
    exact = analytic_drho(p.mu, p.r, R, params_coherence_factor(p))
    assert np.max(np.abs(finite_diff_drho(p, R, 1e-5) - exact)) <= 1e-9
    p = ModelParams(0.5, 0.3)
    exact = analytic_drho(p.mu, p.r, MU)
    assert np.max(np.abs(finite_diff_drho(p, MU, 1e-5) - exact)) <= 1e-9


def test_fd_mu_is_step_independent():
    p = ModelParams(0.2, 0.4, 0.3, 0.6, ChannelScenario.BOTH)
    a = finite_diff_drho(p, MU, 1e-3)
    b = finite_diff_drho(p, MU, 1e-6)
    assert np.max(np.abs(a - b)) <= 1e-9


def test_fd_bad_step():
    with pytest.raises(ValueError):
        finite_diff_drho(ModelParams(0.2, 0.3), R, 0.0)
    with pytest.raises(OutOfRange):
        finite_diff_drho(ModelParams(0.2, 0.3), MU, 0.3)


def test_fd_matches_analytic(rng):
    h = 1e-5
    for _ in range(200):
        p = draw_params(rng)
        f = params_coherence_factor(p)
        for wrt in (R, MU):
            err = np.max(np.abs(finite_diff_drho(p, wrt, h) - analytic_drho(p.mu, p.r, wrt, f)))
            assert err <= 10 * h * h
            err = np.max(np.abs(richardson_drho(p, wrt, h) - analytic_drho(p.mu, p.r, wrt, f)))
            assert err <= 10 * h * h


# --- formula checks against oracles --------------------------------------

def test_classical_fisher_oracle_value():
    assert classical_fisher_golden() == Fraction(2204, 2275)


def test_diagonal_golden():
    p = ModelParams(0.2, math.pi / 6, 1.0, 0.0, ChannelScenario.QUBIT)
    res = qfi_for_params(p, R)
    assert res.total == pytest.approx(float(classical_fisher_golden()), abs=1e-12)
    assert res.f_qu == pytest.approx(0.0, abs=1e-12) and res.f_mix == pytest.approx(0.0, abs=1e-12)
    assert not res.fallback


@pytest.mark.parametrize(
    "params,wrt,expected",
    [
        (ModelParams(0.25, 0.3), MU, 14.973447775689875),
        (ModelParams.coupled(0.1, 0.5, 0.99, ChannelScenario.QUTRIT), R, 1.290961795438109),
    ],
)
def test_lyapunov_golden(params, wrt, expected):
    res = qfi_for_params(params, wrt)
    assert res.total == pytest.approx(expected, rel=1e-8)
    assert res.residual_vs_sld <= 1e-10


def test_sld_and_three_term_match_lyapunov(rng):
    for _ in range(200):
        rho = random_density(rng)
        drho = random_hermitian(rng)
        drho -= np.trace(drho) / 6 * np.eye(6)
        ref = lyapunov_qfi(rho, drho)
        assert qfi_sld(rho, drho) == pytest.approx(ref, rel=1e-8)
        assert qfi_three_term(rho, drho).total == pytest.approx(ref, rel=1e-7)


def test_sld_operator_solves_defining_equation(rng):
    for _ in range(50):
        rho = random_density(rng)
        drho = random_hermitian(rng)
        sld = sld_operator(rho, drho)
        np.testing.assert_allclose(rho @ sld + sld @ rho, 2 * drho, atol=1e-9)
        assert float(np.trace(rho @ sld @ sld).real) == pytest.approx(qfi_sld(rho, drho), rel=1e-10)


def test_zero_derivative_gives_zero():
    rho = build_final_state(ModelParams(0.3, 0.2, 0.2, 0.1, ChannelScenario.BOTH))
    z = np.zeros((6, 6))
    assert qfi_sld(rho, z) == 0.0
    res = qfi_three_term(rho, z)
    assert res.total == res.f_cl == res.f_qu == res.f_mix == 0.0


def test_pure_state_components(rng):
    for _ in range(50):
        psi = rng.normal(size=6) + 1j * rng.normal(size=6)
        psi /= np.linalg.norm(psi)
        dpsi = rng.normal(size=6) + 1j * rng.normal(size=6)
        dpsi -= np.vdot(psi, dpsi).real * psi  # keep the norm fixed to first order
        rho = np.outer(psi, psi.conj())
        drho = np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj())
        expected = 4 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2)
        res = qfi_three_term(rho, drho)
        assert res.f_mix == pytest.approx(0.0, abs=1e-12)
        assert res.f_cl == pytest.approx(0.0, abs=1e-10)
        assert res.total == pytest.approx(expected, rel=1e-9)
        assert qfi_sld(rho, drho) == pytest.approx(expected, rel=1e-9)
        assert res.dropped_pairs == 15


def test_diagonal_state_has_only_classical_part(rng):
    for _ in range(50):
        k = rng.dirichlet(np.ones(6))
        dk = rng.normal(size=6)
        dk -= dk.mean()
        res = qfi_three_term(np.diag(k), np.diag(dk))
        assert res.f_qu == 0.0 and res.f_mix == 0.0
        assert res.total == pytest.approx(float(np.sum(dk ** 2 / k)), rel=1e-12)


def test_equivalence_on_model(rng):
    for _ in range(1000):
        p = draw_params(rng)
        for wrt in (R, MU):
            res = qfi_for_params(p, wrt)
            assert not res.fallback
            assert abs(res.total - res.sld_total) <= 1e-6 * max(1.0, res.sld_total)
            assert res.total >= -1e-12


def test_gauge_invariance(rng):
    for _ in range(100):
        p = draw_params(rng)
        rho = build_final_state(p)
        drho = analytic_drho(p.mu, p.r, R, params_coherence_factor(p))
        spec = hermitian_eigendecompose(rho)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        twisted = Spectrum(spec.eigenvalues, spec.eigenvectors * phases)
        base = qfi_three_term(rho, drho, spectrum=spec).total
        assert qfi_three_term(rho, drho, spectrum=twisted).total == pytest.approx(base, abs=1e-9)
        assert qfi_sld(rho, drho, spectrum=twisted) == pytest.approx(qfi_sld(rho, drho), abs=1e-9)


def test_degenerate_support_is_resolved(rng):
    # twofold degenerate eigenvalue, lifted by the projected derivative
    rho = np.diag([0.4, 0.3, 0.3, 0.0, 0.0, 0.0]).astype(complex)
    drho = random_hermitian(rng)
    drho[3:, 3:] = 0
    res = qfi_three_term(rho, drho)
    assert res.degenerate_groups >= 1
    assert res.total == pytest.approx(qfi_sld(rho, drho), rel=1e-9)


def test_unresolved_degeneracy_raises():
    rho = np.diag([0.4, 0.3, 0.3]).astype(complex)
    drho = np.zeros((3, 3), dtype=complex)
    drho[0, 1] = drho[1, 0] = drho[0, 2] = drho[2, 0] = 0.1
    with pytest.raises(DegeneracyUnresolved):
        qfi_three_term(rho, drho)
    assert qfi_sld(rho, drho) > 0


def test_fallback_reports_sld(monkeypatch):
    def boom(*args, **kwargs):
        raise DegeneracyUnresolved("forced")

    monkeypatch.setattr(qfi_mod, "qfi_three_term", boom)
    res = qfi_for_params(ModelParams(0.2, 0.3, 0.5, 0.5, ChannelScenario.BOTH), R)
    assert res.fallback and "forced" in res.note
    assert res.total == res.sld_total
    assert math.isnan(res.f_cl)


def test_non_hermitian_derivative():
    rho = np.eye(6) / 6
    d = np.zeros((6, 6), dtype=complex)
    d[0, 1] = 1
    with pytest.raises(NotHermitian):
        qfi_sld(rho, d)
    with pytest.raises(NotHermitian):
        qfi_three_term(rho, d)


def test_providers_agree(rng):
    for _ in range(100):
        p = draw_params(rng)
        for wrt in (R, MU):
            a = qfi_for_params(p, wrt, "analytic").total
            b = qfi_for_params(p, wrt, "fd").total
            assert b == pytest.approx(a, rel=1e-6, abs=1e-8)
    with pytest.raises(ValueError):
        qfi_for_params(ModelParams(0.2, 0.3), R, "spline")


def test_zero_at_r0():
    for mu in np.linspace(0, 0.5, 10):
        for g in np.linspace(0, 1, 10):
            for scen in ChannelScenario:
                assert abs(qfi_for_params(ModelParams.coupled(mu, 0.0, g, scen), R).total) <= 1e-10


@settings(max_examples=150, deadline=None)
# For mu or r near zero the clean state has eigenvalues below the 1e-12 cutoff
# that still carry information; truncating them under-reports the clean QFI.
@given(st.floats(1e-3, 0.5), st.one_of(st.just(0.0), st.floats(1e-3, math.pi / 4)), st.floats(0, 1), st.floats(0, 1),
       st.sampled_from([ChannelScenario.QUBIT, ChannelScenario.QUTRIT, ChannelScenario.BOTH]),
       st.sampled_from([R, MU]))
def test_noise_never_helps(mu, r, ga, gb, scen, wrt):
    clean = qfi_for_params(ModelParams(mu, r), wrt).total
    noisy = qfi_for_params(ModelParams(mu, r, ga, gb, scen), wrt).total
    assert noisy >= -1e-10
    assert noisy <= clean + 1e-8 + 1e-12 * clean


def test_as_dict_keys():
    d = qfi_for_params(ModelParams(0.2, 0.3), R).as_dict()
    assert set(d) == {"f_total", "f_cl", "f_qu", "f_mix", "residual_vs_sld"}
