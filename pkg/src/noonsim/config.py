"""Declarative scenario configuration (pydantic models, loaded from YAML or JSON).

Each scenario file holds exactly one mapping whose ``kind`` picks the model.
Validation enforces the preconditions of the engine modules so that a config
that validates can only fail at run time for numerical reasons.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator

from .errors import ConfigError
from .evolution import PropagatorConfig
from .hamiltonians import BESSEL_MAX_ARG, BESSEL_MAX_ORDER, ZETA_J0_ZERO
from .protocol import MAX_DIM, MeasurementPolicy

__all__ = [
    "NumericsModel",
    "PolicyModel",
    "OutputModel",
    "InputStateModel",
    "NoonProtocolConfig",
    "ConditionalMapConfig",
    "MultiNoonConfig",
    "FloquetSweepConfig",
    "TrappedIonConfig",
    "HpSweepConfig",
    "MetrologyConfig",
    "ScenarioConfig",
    "parse_config",
    "load_config",
    "MIN_NU_RATIO",
]

MIN_NU_RATIO = 5.0


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class NumericsModel(_Model):
    method: Literal["taylor", "eigh"] = "taylor"
    dt: Optional[float] = Field(default=None, gt=0)
    tol: float = Field(default=1e-15, gt=0)
    unitarity_check_threshold: float = Field(default=1e-10, gt=0)
    steps_per_period: int = Field(default=200, ge=2)

    def propagator(self) -> PropagatorConfig:
        return PropagatorConfig(
            method=self.method,
            dt=self.dt,
            tol=self.tol,
            unitarity_check_threshold=self.unitarity_check_threshold,
            steps_per_period=self.steps_per_period,
        )


class PolicyModel(_Model):
    """``forced`` runs every listed outcome; ``sampled`` draws one per run from ``seed``.

    ``outcomes`` is ignored in sampled mode.
    """

    mode: Literal["forced", "sampled"] = "forced"
    outcomes: List[Literal[0, 1]] = [0, 1]
    seed: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _seed_iff_sampled(self):
        if self.mode == "forced" and self.seed is not None:
            raise ValueError("a seed is only meaningful for sampled measurements")
        if self.mode == "forced" and not self.outcomes:
            raise ValueError("forced policy needs at least one outcome")
        return self

    def policies(self, seed: Optional[int], count: int) -> List[List[MeasurementPolicy]]:
        """Measurement policies for ``count`` independent runs."""
        if self.mode == "forced":
            return [[MeasurementPolicy.forced(o) for o in self.outcomes] for _ in range(count)]
        import numpy as np

        base = self.seed if seed is None else seed
        if base is None:
            raise ConfigError("sampled measurements need a seed (config policy.seed or --seed)")
        children = np.random.SeedSequence(base).spawn(count)
        return [[MeasurementPolicy.sampled(int(c.generate_state(1, dtype=np.uint64)[0]))] for c in children]


class OutputModel(_Model):
    path: Optional[str] = None
    format: Literal["csv", "json"] = "json"


class _Scenario(_Model):
    name: str = ""
    description: str = ""
    seed: Optional[int] = Field(default=None, ge=0)
    numerics: NumericsModel = NumericsModel()
    output: OutputModel = OutputModel()


class NoonProtocolConfig(_Scenario):
    kind: Literal["noon-protocol"]
    N: List[int] = Field(min_length=1)
    omega: float = Field(default=1.0, gt=0)
    truncation: Optional[int] = None
    policy: PolicyModel = PolicyModel()

    @model_validator(mode="after")
    def _check(self):
        if any(n < 1 for n in self.N):
            raise ValueError("every N must be >= 1")
        if self.truncation is not None and self.truncation < max(self.N) + 1:
            raise ValueError(f"truncation {self.truncation} < N + 1 = {max(self.N) + 1}")
        return self


class InputStateModel(_Model):
    type: Literal["fock", "coherent", "squeezed"]
    n: int = Field(default=0, ge=0)
    alpha: Tuple[float, float] = (0.0, 0.0)
    r: float = 0.0
    phi: float = 0.0


class ConditionalMapConfig(_Scenario):
    kind: Literal["conditional-map"]
    inputs: List[Tuple[InputStateModel, InputStateModel]] = Field(min_length=1)
    omega: float = Field(default=1.0, gt=0)
    truncation: int = Field(ge=2)
    policy: PolicyModel = PolicyModel()

    @model_validator(mode="after")
    def _check(self):
        for pair in self.inputs:
            for s in pair:
                if s.type == "fock" and s.n >= self.truncation:
                    raise ValueError(f"Fock input n={s.n} needs truncation >= n + 1")
        return self


class MultiNoonConfig(_Scenario):
    kind: Literal["multi-noon"]
    M: int = Field(ge=1)
    N: int = Field(ge=1)
    omega: float = Field(default=1.0, gt=0)
    truncation: Optional[int] = None
    policy: PolicyModel = PolicyModel()

    @model_validator(mode="after")
    def _check(self):
        d = self.N + 1 if self.truncation is None else self.truncation
        if d < self.N + 1:
            raise ValueError(f"truncation {d} < N + 1 = {self.N + 1}")
        if 2 * d ** (2 * self.M) > MAX_DIM:
            raise ValueError(f"dimension 2*{d}^{2 * self.M} exceeds the budget {MAX_DIM}")
        return self


class FloquetSweepConfig(_Scenario):
    kind: Literal["floquet-sweep"]
    scheme: Literal["coupling-mod", "frequency-mod"]
    g0: float = Field(default=1.0, gt=0)
    nu_ratios: List[float] = Field(min_length=1)
    phases: Tuple[float, float] = (math.pi / 3, 0.0)
    zeta: float = ZETA_J0_ZERO
    detuning: float = 0.0
    n_max: int = 40
    N: int = Field(default=2, ge=1)
    truncation: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        if any(r < MIN_NU_RATIO for r in self.nu_ratios):
            raise ValueError(f"every nu/g0 ratio must be >= {MIN_NU_RATIO}")
        if not 0 <= self.zeta <= BESSEL_MAX_ARG:
            raise ValueError(f"zeta must lie in [0, {BESSEL_MAX_ARG}]")
        if not 1 <= self.n_max <= BESSEL_MAX_ORDER:
            raise ValueError(f"n_max must lie in [1, {BESSEL_MAX_ORDER}]")
        if math.sin(self.phases[0] - self.phases[1]) == 0:
            raise ValueError("the phase difference must not be a multiple of pi (zero effective coupling)")
        # the qubit can hand one extra excitation to the modes
        if self.truncation is not None and self.truncation < self.N + 2:
            raise ValueError(f"truncation {self.truncation} < N + 2 = {self.N + 2}")
        return self


class TrappedIonConfig(_Scenario):
    kind: Literal["trapped-ion-verify"]
    g0: float = Field(default=1.0, gt=0)
    eta: float = Field(default=0.1, gt=0)
    ratios: List[float] = Field(min_length=1)
    phi_L: float = 0.0
    stage: Literal["rwa_reduced", "full"] = "rwa_reduced"
    nu: float = Field(default=0.0, ge=0)
    N: int = Field(default=2, ge=1)
    truncation: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        if any(not 0 < r <= 0.05 for r in self.ratios):
            raise ValueError("every ratio g0*eta/|epsilon_L| must lie in (0, 0.05]")
        if self.truncation is not None and self.truncation < self.N + 1:
            raise ValueError(f"truncation {self.truncation} < N + 1 = {self.N + 1}")
        if self.stage == "full" and self.nu <= 0:
            raise ValueError("the full stage needs a trap frequency nu > 0")
        return self


class HpSweepConfig(_Scenario):
    kind: Literal["hp-sweep"]
    N0: List[int] = Field(min_length=1)
    excitation: int = Field(default=1, ge=0)
    g: float = Field(default=1.0, gt=0)
    t: List[float] = Field(default=[1.0], min_length=1)
    cutoff: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        cutoff = self.excitation + 2 if self.cutoff is None else self.cutoff
        if cutoff < self.excitation + 1:
            raise ValueError(f"cutoff {cutoff} must exceed the initial excitation {self.excitation}")
        if any(n < 1 for n in self.N0):
            raise ValueError("every N0 must be >= 1")
        if cutoff > min(self.N0):
            raise ValueError(f"cutoff {cutoff} exceeds min N0 = {min(self.N0)}")
        if 10 * self.excitation > min(self.N0):
            raise ValueError("weak excitation requires excitation <= min(N0) / 10")
        if any(t <= 0 for t in self.t):
            raise ValueError("times must be > 0")
        return self

    @property
    def effective_cutoff(self) -> int:
        return self.excitation + 2 if self.cutoff is None else self.cutoff


class MetrologyConfig(_Scenario):
    kind: Literal["metrology-table"]
    noon_N: List[int] = [1, 2, 4, 8]
    cat_two_j: List[int] = [1, 2, 5, 10]
    random_cats: int = Field(default=3, ge=0)
    multi_noon: Tuple[int, int] = (2, 2)
    coherent_alpha: List[float] = [1.0]

    @model_validator(mode="after")
    def _check(self):
        if any(n < 1 for n in self.noon_N) or any(t < 1 for t in self.cat_two_j):
            raise ValueError("N and 2j entries must be >= 1")
        M, N = self.multi_noon
        if M < 1 or N < 1 or 2 * (N + 1) ** (2 * M) > MAX_DIM:
            raise ValueError("multi_noon (M, N) must be >= 1 and fit the dimension budget")
        return self


ScenarioConfig = Annotated[
    Union[
        NoonProtocolConfig,
        ConditionalMapConfig,
        MultiNoonConfig,
        FloquetSweepConfig,
        TrappedIonConfig,
        HpSweepConfig,
        MetrologyConfig,
    ],
    Field(discriminator="kind"),
]

_ADAPTER = TypeAdapter(ScenarioConfig)

KINDS = (
    "noon-protocol",
    "conditional-map",
    "multi-noon",
    "floquet-sweep",
    "trapped-ion-verify",
    "hp-sweep",
    "metrology-table",
)


def parse_config(data) -> ScenarioConfig:
    """Validate a mapping; raises pydantic.ValidationError with field-level messages."""
    return _ADAPTER.validate_python(data)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: a scenario file must contain one mapping")
    return parse_config(data)
