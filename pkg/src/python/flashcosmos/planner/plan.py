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
"""Compiled command plans and their statistics.

A plan is the per-plane program every stripe of the operands runs: MWS and XOR frames, readouts that move the
cache latch to a controller register, and host-side combinations of registers. Block addresses in the frames
are relative to the stripe's block offset.
"""

__all__ = [
    "PlanStyle",
    "HostOp",
    "Readout",
    "HostCombine",
    "PlanStep",
    "Plan",
    "PlanStats",
    "plan_stats",
    "plan_latency_us",
    "plan_energy_j",
    "in_flash_cost",
]

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Union

from flashcosmos.commands.frames import MwsFrame, XorFrame, encode, encode_stream
from flashcosmos.sensing.engine import wordlines_from_pbm
from flashcosmos.timing.params import PowerParams, TimingParams, frame_latency, sensing_energy
from flashcosmos.timing.timeline import InFlashCost


class PlanStyle(Enum):
    """Sensing capabilities a plan may use."""

    FLASH_COSMOS = "flash-cosmos"
    PARABIT = "parabit"


class HostOp(Enum):
    AND = "and"
    OR = "or"
    XOR = "xor"


@dataclass(frozen=True)
class Readout:
    """Transfer of the cache latch to controller register ``register``."""

    register: int


@dataclass(frozen=True)
class HostCombine:
    """Bitwise combination of controller registers, optionally negated, written to ``output``."""

    op: HostOp
    inputs: tuple[int, ...]
    output: int
    negate: bool = False


PlanStep = Union[MwsFrame, XorFrame, Readout, HostCombine]


@dataclass(frozen=True)
class Plan:
    """Ordered plan steps plus the register holding the result."""

    steps: tuple[PlanStep, ...] = ()
    result_register: int = 0
    style: PlanStyle = PlanStyle.FLASH_COSMOS
    expression: str = ""

    @property
    def frames(self) -> list[MwsFrame | XorFrame]:
        """Device command frames, in issue order."""
        return [step for step in self.steps if isinstance(step, (MwsFrame, XorFrame))]

    @property
    def host_fallback(self) -> bool:
        """Whether part of the expression is combined on the host."""
        return any(isinstance(step, HostCombine) for step in self.steps)

    def to_bytes(self) -> bytes:
        """Returns the command stream of the plan."""
        return encode_stream(self.frames)

    def describe(self) -> list[str]:
        """Returns one human-readable line per step."""
        lines = []
        for step in self.steps:
            if isinstance(step, MwsFrame):
                flags = [name for name, value in vars(step.flags).items() if value] or ["accumulate"]
                targets = "; ".join(
                    f"block {block} WL {wordlines_from_pbm(pbm)}" for block, pbm in step.groups
                )
                lines.append(f"MWS [{', '.join(flags)}] {targets} -> {encode(step).hex()}")
            elif isinstance(step, XorFrame):
                lines.append(f"XOR -> {encode(step).hex()}")
            elif isinstance(step, Readout):
                lines.append(f"READOUT cache latch -> r{step.register}")
            else:
                operands = f" {step.op.value} ".join(f"r{register}" for register in step.inputs)
                prefix = "not " if step.negate else ""
                lines.append(f"HOST r{step.output} = {prefix}({operands})")
        return lines

    def to_json_dict(self) -> dict[str, Any]:
        """Returns the JSON sidecar of the plan: metadata the byte stream does not carry."""
        steps: list[dict[str, Any]] = []
        frame_index = 0
        for step in self.steps:
            if isinstance(step, (MwsFrame, XorFrame)):
                steps.append({"kind": "frame", "index": frame_index})
                frame_index += 1
            elif isinstance(step, Readout):
                steps.append({"kind": "readout", "register": step.register})
            else:
                steps.append(
                    {
                        "kind": "host",
                        "op": step.op.value,
                        "inputs": list(step.inputs),
                        "output": step.output,
                        "negate": step.negate,
                    }
                )
        return {
            "expression": self.expression,
            "style": self.style.value,
            "result_register": self.result_register,
            "host_fallback": self.host_fallback,
            "steps": steps,
            "stats": plan_stats(self).as_dict(),
        }


@dataclass(frozen=True)
class PlanStats:
    """Counts describing a plan."""

    sensings: int = 0
    frames: int = 0
    xors: int = 0
    readouts: int = 0
    host_combines: int = 0
    blocks_per_frame: dict[int, int] = field(default_factory=dict)
    wordlines_sensed: int = 0

    @property
    def max_blocks(self) -> int:
        return max(self.blocks_per_frame, default=0)

    def as_dict(self) -> dict[str, Any]:
        return {
            "sensings": self.sensings,
            "frames": self.frames,
            "xors": self.xors,
            "readouts": self.readouts,
            "host_combines": self.host_combines,
            "blocks_per_frame": {str(blocks): n for blocks, n in sorted(self.blocks_per_frame.items())},
            "wordlines_sensed": self.wordlines_sensed,
        }


def plan_stats(plan: Plan) -> PlanStats:
    """Returns the sensing, frame and readout counts of ``plan``."""
    mws = [step for step in plan.steps if isinstance(step, MwsFrame)]
    return PlanStats(
        sensings=len(mws),
        frames=len(plan.frames),
        xors=sum(isinstance(step, XorFrame) for step in plan.steps),
        readouts=sum(isinstance(step, Readout) for step in plan.steps),
        host_combines=sum(isinstance(step, HostCombine) for step in plan.steps),
        blocks_per_frame=dict(Counter(frame.inter_block_count for frame in mws)),
        wordlines_sensed=sum(bin(pbm).count("1") for frame in mws for _, pbm in frame.groups),
    )


def _counts(params: TimingParams, frame: MwsFrame) -> tuple[int, int]:
    return min(frame.intra_wl_count, params.max_intra_wls), frame.inter_block_count


def plan_latency_us(plan: Plan, params: TimingParams) -> float:
    """Returns the time one plane spends executing the device frames of ``plan`` (µs)."""
    total = 0.0
    for frame in plan.frames:
        if isinstance(frame, MwsFrame):
            total += frame_latency(params, *_counts(params, frame))
        else:
            total += params.txor_us
    return total


def plan_energy_j(plan: Plan, params: TimingParams, power: PowerParams) -> float:
    """Returns the sensing energy one plane spends executing ``plan`` (J)."""
    return sum(
        sensing_energy(params, power, *_counts(params, frame))
        for frame in plan.frames
        if isinstance(frame, MwsFrame)
    )


def in_flash_cost(plan: Plan, params: TimingParams, power: PowerParams) -> InFlashCost:
    """Returns the per-plane cost of ``plan`` the timeline model consumes."""
    return InFlashCost(
        sensing_us=plan_latency_us(plan, params),
        sensing_energy_j=plan_energy_j(plan, params, power),
        readouts=max(plan_stats(plan).readouts, 1),
    )
