"""
Scenario files: the JSON documents the command line runs.

    {
      "unitary": {"haar": {"m": 4, "seed": 42}}
               | {"explicit": [[[re, im], ...], ...]}
               | {"beamsplitter": {}},
      "inputs": [
        {"port": 0, "spectrum": {"kind": "gaussian_pulse", "omega0": 100.0,
                                 "delta_omega": 1.0, "t0": 0.0,
                                 "polarization": [1, 0, 0, 0]}},
        ...
      ],
      "gram_override": [[[re, im], ...], ...],
      "output": {"format": "csv", "path": "out.csv"}
    }

Frequencies are angular (rad per time unit, not Hz); emission times are in
the inverse unit, conveniently multiples of ``1/delta_omega``. Explicit
matrix entries are plain numbers or ``[re, im]`` pairs. Give either a
spectrum for every input or a ``gram_override``, never both.
"""

import json
from pathlib import Path
from typing import Any, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import InputValidationError, ScenarioError
from .spectra import GramMatrix, SpectralAmplitude, SpectrumKind, gram_matrix
from .unitary import InterferometerMatrix, balanced_beam_splitter, haar_random

ComplexEntry = Union[float, Tuple[float, float]]


def _complex_rows(rows: List[List[ComplexEntry]]) -> List[List[complex]]:
    return [[complex(*entry) if isinstance(entry, tuple) else complex(entry) for entry in row] for row in rows]


class HaarSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    m: int = Field(ge=1)
    seed: int = 0


class UnitarySpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    haar: Optional[HaarSpec] = None
    explicit: Optional[List[List[ComplexEntry]]] = None
    beamsplitter: Optional[dict] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "UnitarySpec":
        given = [name for name in ("haar", "explicit", "beamsplitter") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"Unitary needs exactly one of 'haar', 'explicit', 'beamsplitter', got {given or 'none'}.")
        if self.explicit is not None:
            size = len(self.explicit)
            if size < 1 or any(len(row) != size for row in self.explicit):
                raise ValueError("Explicit unitary must be a non-empty square array of rows.")
        return self

    @property
    def m(self) -> int:
        if self.haar is not None:
            return self.haar.m
        if self.explicit is not None:
            return len(self.explicit)
        return 2

    def build(self) -> InterferometerMatrix:
        """The interferometer; explicit matrices are not checked here (see ``InterferometerMatrix.validate``)."""
        if self.haar is not None:
            return haar_random(self.haar.m, self.haar.seed)
        if self.explicit is not None:
            return InterferometerMatrix.from_entries(_complex_rows(self.explicit), check=False)
        return balanced_beam_splitter()


class SpectrumSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SpectrumKind = SpectrumKind.GAUSSIAN_PULSE
    omega0: float
    delta_omega: float = 0.0
    t0: float = 0.0
    polarization: Tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)

    def to_amplitude(self) -> SpectralAmplitude:
        return SpectralAmplitude(
            kind=self.kind,
            central_frequency=self.omega0,
            bandwidth=self.delta_omega,
            emission_time=self.t0,
            polarization=self.polarization,
        )


class InputSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    port: int = Field(ge=0)
    spectrum: Optional[SpectrumSpec] = None


class OutputSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    format: Literal["csv", "json"] = "csv"
    path: Optional[str] = None


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    unitary: UnitarySpec
    inputs: List[InputSpec] = Field(min_length=1)
    gram_override: Optional[List[List[ComplexEntry]]] = None
    output: OutputSpec = OutputSpec()

    @model_validator(mode="after")
    def _consistent(self) -> "Scenario":
        with_spectrum = [item.spectrum is not None for item in self.inputs]
        if self.gram_override is None and not all(with_spectrum):
            raise ValueError("Every input needs a 'spectrum' unless 'gram_override' is given.")
        if self.gram_override is not None and any(with_spectrum):
            raise ValueError("Give either per-input spectra or 'gram_override', not both.")
        ports = self.input_ports
        if len(set(ports)) != len(ports):
            raise ValueError(f"Input ports must be distinct, got {list(ports)}.")
        m = self.unitary.m
        for port in ports:
            if port >= m:
                raise ValueError(f"Input port {port} is out of range for {m} ports.")
        if self.gram_override is not None and (
            len(self.gram_override) != len(ports) or any(len(row) != len(ports) for row in self.gram_override)
        ):
            raise ValueError(f"'gram_override' must be {len(ports)}x{len(ports)}.")
        return self

    @property
    def input_ports(self) -> Tuple[int, ...]:
        return tuple(item.port for item in self.inputs)

    @property
    def n(self) -> int:
        return len(self.inputs)

    @property
    def m(self) -> int:
        return self.unitary.m

    def spectra(self) -> List[SpectralAmplitude]:
        if self.gram_override is not None:
            raise InputValidationError("This scenario gives a Gram matrix, not per-photon spectra.")
        try:
            return [item.spectrum.to_amplitude() for item in self.inputs]
        except ValidationError as e:
            raise InputValidationError(f"Invalid photon spectrum: {e}") from e

    def gram(self, validate: bool = True) -> GramMatrix:
        if self.gram_override is not None:
            return GramMatrix.from_entries(_complex_rows(self.gram_override), validate=validate)
        return gram_matrix(self.spectra())


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """
    Parses scenario JSON, reporting syntax and schema problems as ``ScenarioError``.
    """
    try:
        data: Any = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ScenarioError(f"{source}: invalid scenario:\n{e}") from e


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {path}: {e}") from e
    return parse_scenario(text, source=str(path))
