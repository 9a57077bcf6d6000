"""Parameter containers for the accelerated qubit-qutrit model."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import OutOfRange

MU_MAX = 0.5
R_MAX = math.pi / 4


class ChannelScenario(enum.Enum):
    """Which subsystem(s) pass through the phase-flip channel."""

    NONE = "none"
    QUBIT = "qubit"
    QUTRIT = "qutrit"
    BOTH = "both"

    @classmethod
    def parse(cls, value: "str | ChannelScenario") -> "ChannelScenario":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"qubitonly": "qubit", "qutritonly": "qutrit", "null": "none"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(
                f"unknown scenario {value!r}; expected one of "
                f"{[s.value for s in cls]}"
            ) from None


class EstimationTarget(enum.Enum):
    """The parameter whose quantum Fisher information is computed."""

    R = "r"
    MU = "mu"

    @classmethod
    def parse(cls, value: "str | EstimationTarget") -> "EstimationTarget":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown estimation target {value!r}; expected 'r' or 'mu'") from None


def check_range(name: str, value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not (lo <= value <= hi):
        raise OutOfRange(f"{name}={value!r} outside [{lo}, {hi}]")
    return value


def check_state_params(mu: float, r: float) -> tuple[float, float]:
    return check_range("mu", mu, 0.0, MU_MAX), check_range("r", r, 0.0, R_MAX)


@dataclass(frozen=True)
class ModelParams:
    """Full configuration of one experiment point.

    ``coupled_gamma`` records that both channel strengths were set from a
    single value; construction then requires ``gamma_a == gamma_b``.
    """

    mu: float
    r: float
    gamma_a: float = 0.0
    gamma_b: float = 0.0
    scenario: ChannelScenario = ChannelScenario.NONE
    coupled_gamma: bool = False

    def __post_init__(self):
        check_state_params(self.mu, self.r)
        check_range("gamma_a", self.gamma_a, 0.0, 1.0)
        check_range("gamma_b", self.gamma_b, 0.0, 1.0)
        object.__setattr__(self, "scenario", ChannelScenario.parse(self.scenario))
        if self.coupled_gamma and self.gamma_a != self.gamma_b:
            raise ValueError("coupled_gamma requires gamma_a == gamma_b")

    @classmethod
    def coupled(cls, mu, r, gamma, scenario=ChannelScenario.BOTH) -> "ModelParams":
        return cls(mu, r, gamma, gamma, scenario, coupled_gamma=True)

    def with_value(self, name: str, value: float) -> "ModelParams":
        """Return a copy with one axis set; ``gamma`` sets both strengths."""
        fields = dict(
            mu=self.mu, r=self.r, gamma_a=self.gamma_a, gamma_b=self.gamma_b,
            scenario=self.scenario, coupled_gamma=self.coupled_gamma,
        )
        if name == "gamma":
            fields.update(gamma_a=value, gamma_b=value, coupled_gamma=True)
        elif name in ("gamma_a", "gamma_b"):
            fields[name] = value
            fields["coupled_gamma"] = False
        elif name in ("mu", "r"):
            fields[name] = value
        else:
            raise ValueError(f"unknown parameter name {name!r}")
        return ModelParams(**fields)
