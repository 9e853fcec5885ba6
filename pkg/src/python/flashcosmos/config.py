# See the NOTICE file distributed with this work for additional information
# regarding copyright ownership.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""JSON experiment configuration.

Every section maps onto one of the simulator's parameter dataclasses and every field is optional: an absent
section or key keeps the embedded default. Keys the dataclass does not know about are rejected.

Typical usage example::

    from flashcosmos.config import ExperimentConfig

    config = ExperimentConfig.from_file("experiment.json")
    print(config.target_geometry.dies)

An example file::

    {
        "timing": {"tr_slc_us": 22.5},
        "geometry": {"channels": 1, "dies_per_channel": 1, "page_bytes": 64},
        "workloads": [{"kind": "kcs", "params": {"vertices": 512, "cliques": 2}, "sweep": [8, 16]}],
        "max_mws_blocks": 4,
        "pe_cycles": 1000,
        "retention_days": 30
    }

"""

__all__ = ["WorkloadConfig", "ExperimentConfig", "DESK_GEOMETRY", "load_config"]

from dataclasses import dataclass, field, fields
import json
import logging
from os import PathLike
from pathlib import Path
from typing import Any, Type, TypeVar

from flashcosmos.errors import ConfigError
from flashcosmos.flash.geometry import ChipGeometry
from flashcosmos.reliability.rber import RberModel
from flashcosmos.timing.params import PowerParams, TimingParams


DESK_GEOMETRY = ChipGeometry(
    channels=2,
    dies_per_channel=2,
    planes_per_die=2,
    blocks_per_plane=512,
    wordlines_per_block=48,
    page_bytes=512,
)

_T = TypeVar("_T")


def _tupled(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_tupled(item) for item in value)
    return value


def _section(cls: Type[_T], values: Any, name: str, default: _T | None = None) -> _T:
    """Returns an instance of the dataclass ``cls`` built from the mapping ``values``.

    JSON arrays become tuples, which is what the parameter dataclasses use for their curves.

    Raises:
        ConfigError: if ``values`` is not an object, has unknown keys or holds invalid values.
    """
    if values is None:
        return default if default is not None else cls()
    if not isinstance(values, dict):
        raise ConfigError(f"Section '{name}' must be an object, got {type(values).__name__}")
    known = {item.name for item in fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"Unknown key(s) in section '{name}': {', '.join(unknown)}")
    try:
        return cls(**{key: _tupled(value) for key, value in values.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid section '{name}': {exc}") from exc


@dataclass(frozen=True)
class WorkloadConfig:
    """One workload entry of the configuration.

    Attributes:
        kind: ``bmi``, ``ims`` or ``kcs``.
        params: Keyword arguments of the workload's spec class.
        sweep: Values of the workload's swept parameter (months, images or k); ``None`` runs ``params``
            as given.
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    sweep: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("bmi", "ims", "kcs"):
            raise ValueError(f"Unknown workload kind '{self.kind}'")
        if not isinstance(self.params, dict):
            raise ValueError("Workload params must be an object")


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete experiment configuration.

    Attributes:
        timing: Device and interface timing.
        power: Power and energy coefficients.
        reliability: RBER model calibration.
        geometry: Geometry of the functionally simulated (desk-scale) device.
        target_geometry: Geometry the analytic timing model scales to.
        workloads: Workloads the ``run`` command executes.
        max_mws_blocks: Largest number of blocks one multi-wordline sensing may target.
        host_fallback: Whether the planner may combine partial results on the host.
        pe_cycles: Program/erase cycles every block of the functional device has already endured.
        retention_days: Days since the stored operands were programmed, as seen by the error model.
    """

    timing: TimingParams = field(default_factory=TimingParams)
    power: PowerParams = field(default_factory=PowerParams)
    reliability: RberModel = field(default_factory=RberModel)
    geometry: ChipGeometry = DESK_GEOMETRY
    target_geometry: ChipGeometry = field(default_factory=ChipGeometry)
    workloads: tuple[WorkloadConfig, ...] = ()
    max_mws_blocks: int = 4
    host_fallback: bool = True
    pe_cycles: int = 0
    retention_days: float = 0.0

    def __post_init__(self) -> None:
        if not 1 <= self.max_mws_blocks <= 4:
            raise ConfigError(f"max_mws_blocks must lie in [1, 4], got {self.max_mws_blocks}")
        if self.pe_cycles < 0:
            raise ConfigError(f"pe_cycles must not be negative, got {self.pe_cycles}")
        if self.retention_days < 0:
            raise ConfigError(f"retention_days must not be negative, got {self.retention_days}")

    @classmethod
    def from_dict(cls, raw: Any) -> "ExperimentConfig":
        """Returns the configuration described by the decoded JSON document ``raw``.

        Raises:
            ConfigError: if the document is not an object, has unknown keys or invalid values.
        """
        if not isinstance(raw, dict):
            raise ConfigError("The configuration must be a JSON object")
        unknown = sorted(set(raw) - {item.name for item in fields(cls)})
        if unknown:
            raise ConfigError(f"Unknown configuration key(s): {', '.join(unknown)}")
        workloads = raw.get("workloads", [])
        if not isinstance(workloads, list):
            raise ConfigError("'workloads' must be a list")
        max_mws_blocks = raw.get("max_mws_blocks", 4)
        host_fallback = raw.get("host_fallback", True)
        if not isinstance(max_mws_blocks, int) or isinstance(max_mws_blocks, bool):
            raise ConfigError("'max_mws_blocks' must be an integer")
        if not isinstance(host_fallback, bool):
            raise ConfigError("'host_fallback' must be a boolean")
        pe_cycles = raw.get("pe_cycles", 0)
        retention_days = raw.get("retention_days", 0.0)
        if not isinstance(pe_cycles, int) or isinstance(pe_cycles, bool):
            raise ConfigError("'pe_cycles' must be an integer")
        if not isinstance(retention_days, (int, float)) or isinstance(retention_days, bool):
            raise ConfigError("'retention_days' must be a number")
        return cls(
            timing=_section(TimingParams, raw.get("timing"), "timing"),
            power=_section(PowerParams, raw.get("power"), "power"),
            reliability=_section(RberModel, raw.get("reliability"), "reliability"),
            geometry=_section(ChipGeometry, raw.get("geometry"), "geometry", DESK_GEOMETRY),
            target_geometry=_section(ChipGeometry, raw.get("target_geometry"), "target_geometry"),
            workloads=tuple(
                _section(WorkloadConfig, entry, f"workloads[{index}]")
                for index, entry in enumerate(workloads)
            ),
            max_mws_blocks=max_mws_blocks,
            host_fallback=host_fallback,
            pe_cycles=pe_cycles,
            retention_days=float(retention_days),
        )

    @classmethod
    def from_file(cls, path: PathLike | str) -> "ExperimentConfig":
        """Loads the configuration stored in the JSON file ``path``.

        Raises:
            ConfigError: if the file does not exist, is not valid JSON or describes an invalid configuration.
        """
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Configuration file '{path}' not found")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Configuration file '{path}' is not valid JSON: {exc}") from exc
        config = cls.from_dict(raw)
        logging.debug(f"Loaded configuration from '{path}' with {len(config.workloads)} workload(s)")
        return config


def load_config(path: PathLike | str | None) -> ExperimentConfig:
    """Returns the configuration in ``path``, or the defaults if ``path`` is ``None``."""
    if path is None:
        return ExperimentConfig()
    return ExperimentConfig.from_file(path)
