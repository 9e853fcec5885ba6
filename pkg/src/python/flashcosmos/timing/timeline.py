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
"""End-to-end latency and energy of a query under each system model.

Execution is a three-stage pipeline over work items: die (sensing plus the die's share of the channel
transfer), channel (every die of the channel transferring its data in turn) and external interface (the
whole device). Work items are device-wide stripe rounds; outside-storage (OSP) and in-storage (ISP) processing
handle one item per operand round, in-flash processing (PB for ParaBit, FC for Flash-Cosmos) one item per
result round. Latency is the first item's trip through all stages plus one bottleneck-stage time per further
item. Host computation is overlapped with the transfers.

Typical usage example::

    from flashcosmos.flash import ChipGeometry
    from flashcosmos.timing import PowerParams, QueryProfile, SystemModel, TimingParams, simulate_timeline

    profile = QueryProfile(operands=2, vector_bits=8 * 2**30)
    result = simulate_timeline(profile, SystemModel.OSP, ChipGeometry(), TimingParams(), PowerParams())

"""

__all__ = [
    "SystemModel",
    "InFlashCost",
    "QueryProfile",
    "EnergyBreakdown",
    "TimelineResult",
    "simulate_timeline",
    "energy_of",
    "CSV_SCHEMA_VERSION",
    "CSV_COLUMNS",
    "result_row",
]

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from flashcosmos.flash.geometry import ChipGeometry
from flashcosmos.timing.params import PowerParams, TimingParams, sensing_energy


CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "schema_version",
    "workload",
    "param",
    "system",
    "latency_us",
    "energy_uJ",
    "die_busy_us",
    "channel_busy_us",
    "external_busy_us",
    "flash_uJ",
    "channel_uJ",
    "external_uJ",
    "dram_uJ",
    "host_uJ",
    "accelerator_uJ",
    "correct",
]


class SystemModel(Enum):
    """Where the bitwise computation runs."""

    OSP = "osp"
    ISP = "isp"
    PB = "pb"
    FC = "fc"

    @property
    def in_flash(self) -> bool:
        return self in (SystemModel.PB, SystemModel.FC)


@dataclass(frozen=True)
class InFlashCost:
    """Per-plane, per-stripe cost of an in-flash plan.

    Attributes:
        sensing_us: Time one plane spends on the plan's device commands.
        sensing_energy_j: Sensing energy one plane spends on the plan.
        readouts: Cache-latch transfers to the controller.
    """

    sensing_us: float = 0.0
    sensing_energy_j: float = 0.0
    readouts: int = 1


@dataclass(frozen=True)
class QueryProfile:
    """Analytic description of a query.

    Attributes:
        operands: Bit-vectors outside- and in-storage processing read per evaluation.
        vector_bits: Length of every operand and of the result.
        repeats: Independent evaluations of the same shape (e.g. one per color or per clique).
        pb: In-flash cost of the ParaBit plan.
        fc: In-flash cost of the Flash-Cosmos plan.
    """

    operands: int
    vector_bits: int
    repeats: int = 1
    pb: InFlashCost = field(default_factory=InFlashCost)
    fc: InFlashCost = field(default_factory=InFlashCost)

    def cost(self, system: SystemModel) -> InFlashCost:
        """Returns the in-flash cost of ``system``.

        Raises:
            ValueError: if ``system`` does not compute in flash.
        """
        if system is SystemModel.PB:
            return self.pb
        if system is SystemModel.FC:
            return self.fc
        raise ValueError(f"{system.name} does not compute in flash")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy per component (J)."""

    flash_j: float = 0.0
    channel_j: float = 0.0
    external_j: float = 0.0
    dram_j: float = 0.0
    host_j: float = 0.0
    accelerator_j: float = 0.0

    @property
    def total_j(self) -> float:
        parts = (self.flash_j, self.channel_j, self.external_j, self.dram_j, self.host_j, self.accelerator_j)
        return sum(parts)


@dataclass(frozen=True)
class TimelineResult:
    """Latency, per-stage busy time and energy of one query under one system model."""

    system: SystemModel
    latency_us: float
    items: int
    die_busy_us: float
    channel_busy_us: float
    external_busy_us: float
    energy: EnergyBreakdown

    @property
    def stage_busy_us(self) -> dict[str, float]:
        return {"die": self.die_busy_us, "channel": self.channel_busy_us, "external": self.external_busy_us}


@dataclass(frozen=True)
class _Stages:
    items: int
    sensing_us: float
    die_us: float
    channel_us: float
    external_us: float


def _stages(
    profile: QueryProfile, system: SystemModel, geometry: ChipGeometry, params: TimingParams
) -> _Stages:
    rounds = geometry.rounds_for(profile.vector_bits) * profile.repeats
    die_dma = params.dma_us(geometry.bytes_per_die)
    channel = geometry.dies_per_channel * die_dma
    external = params.ext_us(geometry.round_bits / 8)
    if system.in_flash:
        cost = profile.cost(system)
        # One latch bank per plane: the planes of a die run in-flash commands one after another.
        sensing = geometry.planes_per_die * cost.sensing_us
        readouts = cost.readouts
        return _Stages(rounds, sensing, sensing + readouts * die_dma, readouts * channel, readouts * external)
    items = profile.operands * rounds
    if system is SystemModel.ISP:
        external = external / profile.operands if profile.operands else 0.0
    return _Stages(items, params.tr_slc_us, params.tr_slc_us + die_dma, channel, external)


def energy_of(
    profile: QueryProfile,
    system: SystemModel,
    geometry: ChipGeometry,
    params: TimingParams,
    power: PowerParams,
) -> EnergyBreakdown:
    """Returns the energy of ``profile`` under ``system``, split by component.

    Outside-storage processing buffers every operand byte in host DRAM (one write, one read) and combines
    it on the CPU. In-storage processing buffers the operands in SSD DRAM for the accelerator and sends only
    the result out. In-flash systems move their readouts, which the host combines only when the plan fell
    back to the host. Every result crossing the external link is written once to host DRAM.
    """
    rounds = geometry.rounds_for(profile.vector_bits) * profile.repeats
    round_bytes = geometry.round_bits / 8
    planes = geometry.planes
    ssd_dram_bytes = 0.0
    accelerator = 0.0
    if system.in_flash:
        cost = profile.cost(system)
        flash = rounds * planes * cost.sensing_energy_j
        channel_bytes = rounds * cost.readouts * round_bytes
        external_bytes = channel_bytes
        host_bytes = channel_bytes if cost.readouts > 1 else 0.0
        dram_bytes = external_bytes + host_bytes
    else:
        operand_bytes = profile.operands * rounds * round_bytes
        flash = profile.operands * rounds * planes * sensing_energy(params, power, 1, 1)
        channel_bytes = operand_bytes
        if system is SystemModel.ISP:
            external_bytes = rounds * round_bytes if profile.operands else 0.0
            ssd_dram_bytes = 2 * operand_bytes
            accelerator = operand_bytes / power.isp_op_bytes * power.isp_accel_pj_per_op * 1e-12
            host_bytes = 0.0
            dram_bytes = external_bytes
        else:
            external_bytes = operand_bytes
            host_bytes = operand_bytes
            dram_bytes = 2 * operand_bytes
    return EnergyBreakdown(
        flash_j=flash,
        channel_j=channel_bytes * power.channel_pj_per_byte * 1e-12,
        external_j=external_bytes * power.external_pj_per_byte * 1e-12,
        dram_j=(dram_bytes * power.dram_pj_per_byte + ssd_dram_bytes * power.ssd_dram_pj_per_byte) * 1e-12,
        host_j=host_bytes * power.host_pj_per_byte * 1e-12,
        accelerator_j=accelerator,
    )


def simulate_timeline(
    profile: QueryProfile,
    system: SystemModel,
    geometry: ChipGeometry,
    params: TimingParams,
    power: PowerParams,
) -> TimelineResult:
    """Returns the pipelined latency and the energy of ``profile`` under ``system``.

    Args:
        profile: Query to evaluate.
        system: Where the computation runs.
        geometry: Device geometry the operands are striped over.
        params: Device and interface timing.
        power: Power and energy coefficients.
    """
    stages = _stages(profile, system, geometry, params)
    energy = energy_of(profile, system, geometry, params, power)
    if stages.items == 0:
        return TimelineResult(system, 0.0, 0, 0.0, 0.0, 0.0, energy)
    first = stages.sensing_us + stages.channel_us + stages.external_us
    bottleneck = max(stages.die_us, stages.channel_us, stages.external_us)
    latency = first + (stages.items - 1) * bottleneck
    return TimelineResult(
        system,
        latency,
        stages.items,
        stages.items * stages.die_us,
        stages.items * stages.channel_us,
        stages.items * stages.external_us,
        energy,
    )


def result_row(
    workload: str, param: Any, result: TimelineResult, correct: bool | None = None
) -> dict[str, Any]:
    """Returns the CSV row of one result, keyed by :data:`CSV_COLUMNS`."""
    energy = result.energy
    return {
        "schema_version": CSV_SCHEMA_VERSION,
        "workload": workload,
        "param": param,
        "system": result.system.name,
        "latency_us": round(result.latency_us, 6),
        "energy_uJ": round(energy.total_j * 1e6, 6),
        "die_busy_us": round(result.die_busy_us, 6),
        "channel_busy_us": round(result.channel_busy_us, 6),
        "external_busy_us": round(result.external_busy_us, 6),
        "flash_uJ": round(energy.flash_j * 1e6, 6),
        "channel_uJ": round(energy.channel_j * 1e6, 6),
        "external_uJ": round(energy.external_j * 1e6, 6),
        "dram_uJ": round(energy.dram_j * 1e6, 6),
        "host_uJ": round(energy.host_j * 1e6, 6),
        "accelerator_uJ": round(energy.accelerator_j * 1e6, 6),
        "correct": "" if correct is None else int(correct),
    }
