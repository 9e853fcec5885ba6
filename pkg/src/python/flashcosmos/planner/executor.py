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
"""Execution of compiled plans on a simulated device."""

__all__ = ["esp_program", "store_operands", "execute", "host_read"]

import logging
from typing import Mapping

import numpy as np

from flashcosmos.commands.frames import EspFrame, MwsFrame, XorFrame, decode_stream, encode_stream
from flashcosmos.errors import MalformedFrame
from flashcosmos.flash.chip import ChipState
from flashcosmos.flash.device import FlashDevice
from flashcosmos.flash.geometry import PageAddress, StripeLocation
from flashcosmos.nand import ProgramMode
from flashcosmos.planner.expr import Expr, evaluate, variables
from flashcosmos.planner.placement import Placement
from flashcosmos.planner.plan import HostCombine, HostOp, Plan, Readout
from flashcosmos.sensing.engine import SensingEngine


def esp_program(chip: ChipState, plane: int, frame: EspFrame) -> None:
    """Executes an ESP frame on ``plane`` of ``chip``.

    The payload is one page, packed most significant bit first, stored as given.

    Raises:
        MalformedFrame: if the payload is not exactly one page long.
        ProgramOnNonErasedPage: if the target page is already programmed.
    """
    if len(frame.payload) != chip.geometry.page_bytes:
        raise MalformedFrame(
            f"ESP payload of {len(frame.payload)} bytes, the page holds {chip.geometry.page_bytes}"
        )
    bits = np.unpackbits(np.frombuffer(frame.payload, dtype=np.uint8)).astype(bool)
    chip.program_page(PageAddress(plane, frame.block, frame.wordline), bits, ProgramMode.ESP)


def store_operands(device: FlashDevice, placement: Placement, vectors: Mapping[str, np.ndarray]) -> None:
    """Programs every vector of ``vectors`` at its placed location.

    ESP operands travel as one frame stream per stripe, complemented on the host when stored inverted; the
    tail of the last page is padded with erased (``True``) bits before that. Other modes are programmed
    directly.

    Raises:
        PlacementMissing: if a vector has no placement.
        ValueError: if a vector is longer than the placement's vector length.
    """
    page_bits = placement.geometry.bitlines_per_block
    streams: dict[StripeLocation, list[EspFrame]] = {}
    for name, bits in vectors.items():
        loc = placement.location(name)
        if len(bits) > placement.vector_bits:
            raise ValueError(f"Operand '{name}' has {len(bits)} bits, more than {placement.vector_bits}")
        if loc.mode is not ProgramMode.ESP:
            device.program_vector(
                bits, placement.stripes, loc.block, loc.wordline, loc.mode, loc.stored_inverted
            )
            continue
        padded = np.ones(len(placement.stripes) * page_bits, dtype=bool)
        padded[: len(bits)] = bits
        if loc.stored_inverted:
            padded = ~padded
        for index, stripe in enumerate(placement.stripes):
            payload = np.packbits(padded[index * page_bits : (index + 1) * page_bits]).tobytes()
            frame = EspFrame(stripe.block_offset + loc.block, loc.wordline, payload)
            streams.setdefault(stripe, []).append(frame)
    for stripe, frames in streams.items():
        stream = encode_stream(frames)
        chip = device.chip(stripe.channel, stripe.die)
        for frame in decode_stream(stream):
            esp_program(chip, stripe.plane, frame)
    logging.debug(f"Stored {len(vectors)} operands over {len(placement.stripes)} stripes")


def _combine(step: HostCombine, registers: dict[int, np.ndarray]) -> np.ndarray:
    values = [registers[register] for register in step.inputs]
    if step.op is HostOp.AND:
        result = np.logical_and.reduce(values)
    elif step.op is HostOp.OR:
        result = np.logical_or.reduce(values)
    else:
        result = np.logical_xor.reduce(values)
    return ~result if step.negate else result


def execute(plan: Plan, device: FlashDevice, placement: Placement) -> np.ndarray:
    """Runs ``plan`` on every stripe of ``placement`` and returns the concatenated result.

    A plan without steps yields all zeros.

    Raises:
        InvalidTarget: if a frame violates the chip's MWS constraints.
    """
    chunks = []
    for loc in placement.stripes:
        chip = device.chip(loc.channel, loc.die)
        registers: dict[int, np.ndarray] = {}
        for step in plan.steps:
            if isinstance(step, MwsFrame):
                SensingEngine.mws_execute(chip, step.to_target(loc.plane, loc.block_offset), step.flags)
            elif isinstance(step, XorFrame):
                SensingEngine.xor_latches(chip, loc.plane)
            elif isinstance(step, Readout):
                registers[step.register] = SensingEngine.read_cache(chip, loc.plane)
            else:
                registers[step.output] = _combine(step, registers)
        chunks.append(registers.get(plan.result_register, np.zeros(chip.bitlines, dtype=bool)))
    if not chunks:
        return np.zeros(0, dtype=bool)
    return np.concatenate(chunks)[: placement.vector_bits]


def host_read(expr: Expr, device: FlashDevice, placement: Placement) -> np.ndarray:
    """Reads every operand of ``expr`` with regular page reads and evaluates it on the host.

    This is how outside-storage and in-storage processing obtain their result.
    """
    env = {}
    for name in variables(expr):
        loc = placement.location(name)
        env[name] = device.read_vector(
            placement.vector_bits, placement.stripes, loc.block, loc.wordline, inverse=loc.stored_inverted
        )
    return evaluate(expr, env)
