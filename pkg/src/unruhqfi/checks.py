"""Invariant suites behind the ``validate`` command."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channels
from .errors import InvalidChannel
from .numerics import frobenius_distance, validate_density
from .params import R_MAX, ChannelScenario, EstimationTarget, ModelParams
from .qfi import drho_for_params, finite_diff_drho, qfi_for_params, qfi_sld, qfi_three_term
from .states import analytic_drho, rho_coefficients

GAMMA_GRID = [round(0.1 * k, 10) for k in range(11)]
NOISY = (ChannelScenario.QUBIT, ChannelScenario.QUTRIT, ChannelScenario.BOTH)


@dataclass
class SuiteReport:
    name: str
    passed: int = 0
    failed: int = 0
    worst: float = 0.0
    first_failure: str = ""

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, ok: bool, value: float = 0.0, what: str = "") -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if not self.first_failure:
                self.first_failure = what
        if not math.isnan(value):
            self.worst = max(self.worst, value)


def random_params(rng: np.random.Generator, scenario=None) -> ModelParams:
    scen = scenario if scenario is not None else list(ChannelScenario)[int(rng.integers(4))]
    return ModelParams(
        mu=float(rng.uniform(0, 0.5)),
        r=float(rng.uniform(0, R_MAX)),
        gamma_a=float(rng.uniform(0, 1)),
        gamma_b=float(rng.uniform(0, 1)),
        scenario=scen,
    )


def cptp_suite() -> SuiteReport:
    rep = SuiteReport("cptp")
    for g in GAMMA_GRID:
        for ks in (channels.qubit_phase_kraus(g), channels.qutrit_phase_kraus(g)):
            res = ks.completeness_residual()
            rep.record(res <= 1e-12, res, f"{ks.label} gamma={g}: residual {res:.3e}")
    return rep


def state_suite(rng, samples) -> SuiteReport:
    rep = SuiteReport("trace_psd")
    for _ in range(samples):
        p = random_params(rng)
        d = validate_density(channels.build_final_state(p), tol=1e-12, psd_tol=1e-10)
        c = rho_coefficients(p.mu, p.r)
        tr = abs(c.rho1 + c.rho2 + c.rho7 + c.rho8 + c.rho9 + c.rho10 - 1)
        rep.record(d.passed and tr <= 1e-15, max(d.trace_deviation, tr), f"{p}: {d}")
    return rep


def closed_form_suite(rng, samples) -> SuiteReport:
    rep = SuiteReport("channel_closed_form")
    for _ in range(samples):
        p = random_params(rng)
        try:
            dist = frobenius_distance(channels.final_state_via_kraus(p), channels.build_final_state(p))
        except InvalidChannel as exc:
            rep.record(False, math.nan, f"{p}: {exc}")
            continue
        rep.record(dist <= 1e-12, dist, f"{p}: distance {dist:.3e}")
    return rep


def equivalence_suite(rng, samples) -> SuiteReport:
    rep = SuiteReport("qfi_equivalence")
    for _ in range(samples):
        p = random_params(rng)
        rho = channels.build_final_state(p)
        for wrt in EstimationTarget:
            drho = drho_for_params(p, wrt)
            sld = qfi_sld(rho, drho)
            total = qfi_three_term(rho, drho).total
            err = abs(total - sld) / max(1.0, sld)
            rep.record(err <= 1e-6, err, f"{p} wrt={wrt.value}: three-term {total!r} vs SLD {sld!r}")
    return rep


def derivative_suite(rng, samples, h: float = 1e-5) -> SuiteReport:
    rep = SuiteReport("derivatives")
    for _ in range(samples):
        p = random_params(rng)
        f = channels.params_coherence_factor(p)
        for wrt in EstimationTarget:
            exact = analytic_drho(p.mu, p.r, wrt, f)
            err = float(np.max(np.abs(finite_diff_drho(p, wrt, h) - exact)))
            rep.record(err <= 10 * h * h, err, f"{p} wrt={wrt.value}: error {err:.3e}")
    return rep


def monotonicity_suite(rng, samples) -> SuiteReport:
    rep = SuiteReport("monotonicity")
    for _ in range(samples):
        p = random_params(rng, ChannelScenario.NONE)
        for wrt in EstimationTarget:
            clean = qfi_for_params(p, wrt).total
            for scen in NOISY:
                noisy = qfi_for_params(ModelParams(p.mu, p.r, p.gamma_a, p.gamma_b, scen), wrt).total
                excess = noisy - clean
                rep.record(excess <= 1e-8, excess, f"{p} {scen.value} wrt={wrt.value}: {noisy!r} > {clean!r}")
    return rep


def zero_at_r0_suite(points: int = 10) -> SuiteReport:
    rep = SuiteReport("zero_at_r0")
    for mu in np.linspace(0, 0.5, points):
        for g in np.linspace(0, 1, points):
            for scen in ChannelScenario:
                f = qfi_for_params(ModelParams.coupled(float(mu), 0.0, float(g), scen), EstimationTarget.R).total
                rep.record(abs(f) <= 1e-10, abs(f), f"mu={mu} gamma={g} {scen.value}: F_r={f!r}")
    return rep


def run_all(seed: int = 0, samples: int = 1000) -> list[SuiteReport]:
    rng = np.random.default_rng(seed)
    return [
        cptp_suite(),
        state_suite(rng, samples),
        closed_form_suite(rng, samples),
        equivalence_suite(rng, samples),
        derivative_suite(rng, samples),
        monotonicity_suite(rng, samples),
        zero_at_r0_suite(),
    ]
