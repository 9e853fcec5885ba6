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
"""Byte-level encoder and decoder of the in-flash computation commands.

Frame layouts (multi-byte fields little endian)::

    MWS: 0xC5 | ISCM | block (3 B) | PBM (6 B) [| 0x85 | block | PBM]... | 0xD0
    ESP: 0xC6 | block (3 B) | wordline (1 B) | payload length (u16) | payload
    XOR: 0xC7 | plane (1 B)

ISCM bits: bit 0 inverse, bit 1 init-S, bit 2 init-C, bit 3 move S to C.

Typical usage example::

    from flashcosmos.commands import MwsFrame, decode, encode
    from flashcosmos.sensing import MwsFlags

    frame = MwsFrame(MwsFlags(init_s=True, init_c=True, move_s_to_c=True), ((7, 0b101),))
    assert decode(encode(frame)) == frame

"""

__all__ = [
    "Opcode",
    "MwsFrame",
    "EspFrame",
    "XorFrame",
    "CommandFrame",
    "MAX_ADDRESS_GROUPS",
    "encode",
    "decode",
    "encode_stream",
    "decode_stream",
    "flags_to_iscm",
    "iscm_to_flags",
]

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Union

from flashcosmos.errors import InverseWithoutInit, MalformedFrame
from flashcosmos.flash.geometry import MAX_SENSED_WORDLINES
from flashcosmos.sensing.engine import MwsFlags, MwsTarget


MAX_ADDRESS_GROUPS = 4
BLOCK_BYTES = 3
PBM_BYTES = MAX_SENSED_WORDLINES // 8
WORDLINE_BYTES = 1
PAYLOAD_LENGTH_BYTES = 2

_ISCM_INVERSE = 0x1
_ISCM_INIT_S = 0x2
_ISCM_INIT_C = 0x4
_ISCM_MOVE = 0x8


class Opcode(IntEnum):
    """Command opcodes."""

    MWS = 0xC5
    ESP = 0xC6
    XOR = 0xC7
    CONT = 0x85
    CONF = 0xD0


def flags_to_iscm(flags: MwsFlags) -> int:
    """Returns the ISCM byte of ``flags``."""
    iscm = 0
    if flags.inverse:
        iscm |= _ISCM_INVERSE
    if flags.init_s:
        iscm |= _ISCM_INIT_S
    if flags.init_c:
        iscm |= _ISCM_INIT_C
    if flags.move_s_to_c:
        iscm |= _ISCM_MOVE
    return iscm


def iscm_to_flags(iscm: int) -> MwsFlags:
    """Returns the flags encoded in the ISCM byte ``iscm``.

    Raises:
        MalformedFrame: if reserved bits are set or the flags are inconsistent.
    """
    if iscm & ~(_ISCM_INVERSE | _ISCM_INIT_S | _ISCM_INIT_C | _ISCM_MOVE):
        raise MalformedFrame(f"Reserved ISCM bits set in {iscm:#04x}")
    try:
        return MwsFlags(
            inverse=bool(iscm & _ISCM_INVERSE),
            init_s=bool(iscm & _ISCM_INIT_S),
            init_c=bool(iscm & _ISCM_INIT_C),
            move_s_to_c=bool(iscm & _ISCM_MOVE),
        )
    except InverseWithoutInit as exc:
        raise MalformedFrame(str(exc)) from exc


@dataclass(frozen=True)
class MwsFrame:
    """Multi-wordline sensing command.

    Attributes:
        flags: Latch control flags.
        groups: ``(block, pbm)`` address groups, one per target block.
    """

    flags: MwsFlags
    groups: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.groups) <= MAX_ADDRESS_GROUPS:
            raise MalformedFrame(
                f"An MWS frame carries 1 to {MAX_ADDRESS_GROUPS} address groups, got {len(self.groups)}"
            )
        blocks = [block for block, _ in self.groups]
        if len(set(blocks)) != len(blocks):
            raise MalformedFrame(f"Duplicate block in MWS frame: {blocks}")
        for block, pbm in self.groups:
            if not 0 <= block < 1 << (8 * BLOCK_BYTES):
                raise MalformedFrame(f"Block address {block} does not fit in {BLOCK_BYTES} bytes")
            if not 0 < pbm < 1 << (8 * PBM_BYTES):
                raise MalformedFrame(f"Page bitmap {pbm:#x} is empty or wider than {8 * PBM_BYTES} wordlines")

    def to_target(self, plane: int, block_offset: int = 0) -> MwsTarget:
        """Returns the sensing target of this frame on ``plane``, its blocks shifted by ``block_offset``."""
        return MwsTarget(plane, tuple((block + block_offset, pbm) for block, pbm in self.groups))

    @property
    def intra_wl_count(self) -> int:
        return max(bin(pbm).count("1") for _, pbm in self.groups)

    @property
    def inter_block_count(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class EspFrame:
    """Enhanced SLC-mode program command."""

    block: int
    wordline: int
    payload: bytes

    def __post_init__(self) -> None:
        if not 0 <= self.block < 1 << (8 * BLOCK_BYTES):
            raise MalformedFrame(f"Block address {self.block} does not fit in {BLOCK_BYTES} bytes")
        if not 0 <= self.wordline < 1 << (8 * WORDLINE_BYTES):
            raise MalformedFrame(f"Wordline {self.wordline} does not fit in {WORDLINE_BYTES} byte")
        if len(self.payload) >= 1 << (8 * PAYLOAD_LENGTH_BYTES):
            raise MalformedFrame(f"ESP payload of {len(self.payload)} bytes is too long")


@dataclass(frozen=True)
class XorFrame:
    """Inter-latch XOR command."""

    plane: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.plane < 256:
            raise MalformedFrame(f"Plane {self.plane} does not fit in one byte")


CommandFrame = Union[MwsFrame, EspFrame, XorFrame]


def _le(value: int, size: int) -> bytes:
    return value.to_bytes(size, "little")


def encode(frame: CommandFrame) -> bytes:
    """Returns the byte encoding of ``frame``.

    Raises:
        MalformedFrame: if ``frame`` is not a command frame.
    """
    if isinstance(frame, MwsFrame):
        out = bytearray([Opcode.MWS, flags_to_iscm(frame.flags)])
        for index, (block, pbm) in enumerate(frame.groups):
            if index:
                out.append(Opcode.CONT)
            out += _le(block, BLOCK_BYTES) + _le(pbm, PBM_BYTES)
        out.append(Opcode.CONF)
        return bytes(out)
    if isinstance(frame, EspFrame):
        return (
            bytes([Opcode.ESP])
            + _le(frame.block, BLOCK_BYTES)
            + _le(frame.wordline, WORDLINE_BYTES)
            + _le(len(frame.payload), PAYLOAD_LENGTH_BYTES)
            + frame.payload
        )
    if isinstance(frame, XorFrame):
        return bytes([Opcode.XOR, frame.plane])
    raise MalformedFrame(f"Cannot encode {type(frame).__name__}")


def _take(data: bytes, offset: int, size: int) -> bytes:
    if offset + size > len(data):
        raise MalformedFrame(f"Frame truncated at byte {len(data)}, expected {offset + size} bytes")
    return data[offset : offset + size]


def _decode_at(data: bytes, offset: int) -> tuple[CommandFrame, int]:
    opcode = _take(data, offset, 1)[0]
    offset += 1
    if opcode == Opcode.MWS:
        flags = iscm_to_flags(_take(data, offset, 1)[0])
        offset += 1
        groups = []
        while True:
            if len(groups) == MAX_ADDRESS_GROUPS:
                raise MalformedFrame(f"MWS frame has more than {MAX_ADDRESS_GROUPS} address groups")
            block = int.from_bytes(_take(data, offset, BLOCK_BYTES), "little")
            offset += BLOCK_BYTES
            pbm = int.from_bytes(_take(data, offset, PBM_BYTES), "little")
            offset += PBM_BYTES
            groups.append((block, pbm))
            separator = _take(data, offset, 1)[0]
            offset += 1
            if separator == Opcode.CONF:
                return MwsFrame(flags, tuple(groups)), offset
            if separator != Opcode.CONT:
                raise MalformedFrame(f"Expected CONT or CONF, found {separator:#04x} at byte {offset - 1}")
    if opcode == Opcode.ESP:
        block = int.from_bytes(_take(data, offset, BLOCK_BYTES), "little")
        offset += BLOCK_BYTES
        wordline = _take(data, offset, WORDLINE_BYTES)[0]
        offset += WORDLINE_BYTES
        length = int.from_bytes(_take(data, offset, PAYLOAD_LENGTH_BYTES), "little")
        offset += PAYLOAD_LENGTH_BYTES
        payload = _take(data, offset, length)
        return EspFrame(block, wordline, bytes(payload)), offset + length
    if opcode == Opcode.XOR:
        return XorFrame(_take(data, offset, 1)[0]), offset + 1
    raise MalformedFrame(f"Unknown opcode {opcode:#04x} at byte {offset - 1}")


def decode(data: bytes) -> CommandFrame:
    """Returns the single frame encoded in ``data``.

    Raises:
        MalformedFrame: on a bad opcode, more than four address groups, a missing CONF or trailing bytes.
    """
    frame, offset = _decode_at(bytes(data), 0)
    if offset != len(data):
        raise MalformedFrame(f"{len(data) - offset} trailing bytes after the frame")
    return frame


def encode_stream(frames: Iterable[CommandFrame]) -> bytes:
    """Returns the concatenated encoding of ``frames``."""
    return b"".join(encode(frame) for frame in frames)


def decode_stream(data: bytes) -> list[CommandFrame]:
    """Returns the frames of a concatenated byte stream.

    Raises:
        MalformedFrame: if any frame is malformed.
    """
    data = bytes(data)
    frames = []
    offset = 0
    while offset < len(data):
        frame, offset = _decode_at(data, offset)
        frames.append(frame)
    return frames
