"""Named presets for the standard QFI maps and curves."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import R_MAX, ChannelScenario, EstimationTarget, ModelParams
from .qfi import qfi_for_params
from .sweep import Axis, GridSpec, SweepResult, format_number, run_sweep

DEFAULT_POINTS = 201


@dataclass(frozen=True)
class FigurePreset:
    """Heatmaps are mu (axis1) x coupled gamma (axis2) at fixed r; curves are r sweeps."""

    id: str
    kind: str  # "heatmap" or "curves"
    wrt: EstimationTarget
    scenario: ChannelScenario
    title: str
    r: float | None = None
    gamma: float | None = None
    mus: tuple[float, ...] = ()
    note: str = ""


_Q, _T, _B = ChannelScenario.QUBIT, ChannelScenario.QUTRIT, ChannelScenario.BOTH
_R, _MU = EstimationTarget.R, EstimationTarget.MU

PRESETS = {
    p.id: p
    for p in (
        FigurePreset("2a", "heatmap", _R, _Q, "F_r, only the qubit dephased, r=0.1", r=0.1),
        FigurePreset("2b", "heatmap", _R, _Q, "F_r, only the qubit dephased, r=0.2", r=0.2),
        FigurePreset(
            "3", "curves", _R, _Q, "F_r vs r, gamma=0.99, mu=0.01,0.1,0.2,0.3",
            gamma=0.99, mus=(0.01, 0.1, 0.2, 0.3),
            note="a listed mu of 3 lies outside [0, 1/2]; 0.3 is used",
        ),
        FigurePreset("4a", "heatmap", _MU, _Q, "F_mu, only the qubit dephased, r=0.2", r=0.2),
        FigurePreset(
            "4b", "curves", _MU, _Q, "F_mu vs r, gamma=0.99, mu=0.05,0.1,0.15,0.2",
            gamma=0.99, mus=(0.05, 0.1, 0.15, 0.2),
        ),
        FigurePreset("5a", "heatmap", _R, _T, "F_r, only the qutrit dephased, r=0.1", r=0.1),
        FigurePreset("5b", "heatmap", _R, _T, "F_r, only the qutrit dephased, r=0.5", r=0.5),
        FigurePreset(
            "6", "curves", _R, _T, "F_r vs r, only the qutrit dephased, gamma=0.99, mu=0.1,0.2,0.3,0.4",
            gamma=0.99, mus=(0.1, 0.2, 0.3, 0.4),
        ),
        FigurePreset("7a", "heatmap", _MU, _T, "F_mu, only the qutrit dephased, r=0.5", r=0.5),
        FigurePreset(
            "7b", "heatmap", _MU, _T, "F_mu, only the qutrit dephased, r=0.8", r=R_MAX,
            note="r=0.8 exceeds pi/4; r=pi/4 is used",
        ),
        FigurePreset(
            "8a", "heatmap", _R, _B, "F_r, both dephased, r=0.2", r=0.2,
            note="pass --r 0.1 for the r=0.1 variant",
        ),
        FigurePreset("8b", "heatmap", _R, _B, "F_r, both dephased, r=0.5", r=0.5),
        FigurePreset("9a", "heatmap", _MU, _B, "F_mu, both dephased, r=0.1", r=0.1),
        FigurePreset("9b", "heatmap", _MU, _B, "F_mu, both dephased, r=0.5", r=0.5),
    )
}


def heatmap_spec(preset: FigurePreset, points: int = DEFAULT_POINTS, r: float | None = None) -> GridSpec:
    r_value = preset.r if r is None else r
    return GridSpec(
        axis1=Axis("mu", 0.0, 0.5, points),
        axis2=Axis("gamma", 0.0, 1.0, points),
        fixed=ModelParams.coupled(0.0, r_value, 0.0, preset.scenario),
        wrt=preset.wrt,
    )


def run_heatmap(preset: FigurePreset, points: int = DEFAULT_POINTS, r: float | None = None,
                workers: int | None = 1) -> SweepResult:
    return run_sweep(heatmap_spec(preset, points, r), workers=workers)


def run_curves(preset: FigurePreset, points: int = DEFAULT_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """QFI along r in [0, pi/4] for each of the preset's mu values.

    Returns ``(r_values, F)`` with ``F[k]`` the curve for ``preset.mus[k]``.
    """
    rs = np.linspace(0.0, R_MAX, points)
    curves = np.array([
        [qfi_for_params(ModelParams.coupled(mu, float(r), preset.gamma, preset.scenario), preset.wrt).total
         for r in rs]
        for mu in preset.mus
    ])
    return rs, curves


def curves_csv(preset: FigurePreset, rs: np.ndarray, curves: np.ndarray) -> str:
    header = ["r"] + [f"mu={mu:g}" for mu in preset.mus]
    lines = [",".join(header)]
    for k, r in enumerate(rs):
        lines.append(",".join([format_number(r)] + [format_number(c[k]) for c in curves]))
    return "\n".join(lines) + "\n"


def describe(preset: FigurePreset, r_override: float | None = None) -> str:
    parts = [f"figure {preset.id}: {preset.title}", f"scenario={preset.scenario.value}", f"wrt={preset.wrt.value}"]
    if preset.kind == "heatmap":
        r = preset.r if r_override is None else r_override
        parts.append(f"r={r:.17g}; axes mu in [0, 0.5] x gamma in [0, 1]")
    else:
        parts.append(f"gamma={preset.gamma}; mu={list(preset.mus)}; r in [0, {math.pi / 4:.17g}]")
    if preset.note:
        parts.append(f"note: {preset.note}")
    return "; ".join(parts)
