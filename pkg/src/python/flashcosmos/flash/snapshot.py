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
"""Versioned binary snapshots of a chip ("FCSM" images).

Layout (little endian)::

    magic "FCSM" | version u16 | flags u16 (bit 0: zstd payload)
    geometry (u32 each): channels, dies_per_channel, planes_per_die, blocks_per_plane,
                         wordlines_per_block, page_bytes
    payload:
        default P/E cycles u32 | default retention days f64
        block count u32, then per block: plane u16 | block u32 | P/E cycles u32 | retention days f64
        per plane: packed S latch | packed C latch (page_bytes each)
        page count u32, then per page: plane u16 | block u32 | wordline u16 | mode u8 | randomized u8 |
                                       tesp ratio f64 | packed data (page_bytes)

The random generator state, the error model and the ledger are not part of the image.

Typical usage example::

    from flashcosmos.flash import dump_snapshot, load_snapshot

    image = dump_snapshot(chip)
    clone = load_snapshot(image, seed=7)

"""

__all__ = [
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
    "dump_snapshot",
    "load_snapshot",
    "save_snapshot",
    "read_snapshot",
]

from os import PathLike
from pathlib import Path
import struct

import numpy as np
import zstandard

from flashcosmos.errors import SnapshotFormatError
from flashcosmos.flash.chip import ChipState, LatchBank, PageState
from flashcosmos.flash.geometry import ChipGeometry, PageAddress
from flashcosmos.nand import ProgramMode
from flashcosmos.reliability.rber import RberModel
from flashcosmos.timing.params import TimingParams


SNAPSHOT_MAGIC = b"FCSM"
SNAPSHOT_VERSION = 1
FLAG_ZSTD = 0x1

_HEADER = struct.Struct("<4sHH6I")
_DEFAULTS = struct.Struct("<Id")
_COUNT = struct.Struct("<I")
_BLOCK = struct.Struct("<HIId")
_PAGE = struct.Struct("<HIHBBd")
_MODES = list(ProgramMode)


def _pack(bits: np.ndarray) -> bytes:
    return np.packbits(bits).tobytes()


def _unpack(raw: bytes, bitlines: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=bitlines).astype(bool)


def dump_snapshot(chip: ChipState, compress: bool = True) -> bytes:
    """Returns the binary image of ``chip``.

    Args:
        chip: Chip to serialize.
        compress: Compress the payload with zstd.
    """
    geometry = chip.geometry
    payload = bytearray(_DEFAULTS.pack(chip.default_pe_cycles, chip.default_retention_days))
    blocks = sorted(set(chip.pe_cycles) | set(chip.retention_days))
    payload += _COUNT.pack(len(blocks))
    for plane, block in blocks:
        payload += _BLOCK.pack(
            plane, block, chip.block_pe_cycles(plane, block), chip.block_retention_days(plane, block)
        )
    for latches in chip.latches:
        payload += _pack(latches.s_latch) + _pack(latches.c_latch)
    payload += _COUNT.pack(len(chip.pages))
    for addr in sorted(chip.pages):
        state = chip.pages[addr]
        payload += _PAGE.pack(
            addr.plane,
            addr.block,
            addr.wordline,
            _MODES.index(state.mode),
            int(state.randomized),
            state.tesp_ratio,
        )
        payload += _pack(state.data)
    flags = FLAG_ZSTD if compress else 0
    body = zstandard.ZstdCompressor().compress(bytes(payload)) if compress else bytes(payload)
    header = _HEADER.pack(
        SNAPSHOT_MAGIC,
        SNAPSHOT_VERSION,
        flags,
        geometry.channels,
        geometry.dies_per_channel,
        geometry.planes_per_die,
        geometry.blocks_per_plane,
        geometry.wordlines_per_block,
        geometry.page_bytes,
    )
    return header + body


class _Reader:
    """Sequential reader over a snapshot payload."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise SnapshotFormatError("Snapshot payload is truncated")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, layout: struct.Struct) -> tuple:
        return layout.unpack(self.take(layout.size))


def load_snapshot(
    data: bytes,
    rber_model: RberModel | None = None,
    seed: int | np.random.SeedSequence = 0,
    timing: TimingParams | None = None,
    max_mws_blocks: int = 4,
) -> ChipState:
    """Returns the chip stored in the binary image ``data``.

    Raises:
        SnapshotFormatError: if the image is not a valid snapshot.
    """
    if len(data) < _HEADER.size:
        raise SnapshotFormatError("Snapshot is shorter than its header")
    magic, version, flags, *fields = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"Bad snapshot magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotFormatError(f"Unsupported snapshot version {version}")
    body = data[_HEADER.size :]
    if flags & FLAG_ZSTD:
        try:
            body = zstandard.ZstdDecompressor().decompress(body)
        except zstandard.ZstdError as exc:
            raise SnapshotFormatError(f"Cannot decompress snapshot payload: {exc}") from exc
    try:
        geometry = ChipGeometry(*fields)
    except ValueError as exc:
        raise SnapshotFormatError(f"Invalid snapshot geometry: {exc}") from exc
    reader = _Reader(body)
    default_pec, default_retention = reader.unpack(_DEFAULTS)
    chip = ChipState(
        geometry,
        rber_model=rber_model,
        seed=seed,
        timing=timing,
        max_mws_blocks=max_mws_blocks,
        pe_cycles=default_pec,
        retention_days=default_retention,
    )
    (block_count,) = reader.unpack(_COUNT)
    for _ in range(block_count):
        plane, block, pec, retention = reader.unpack(_BLOCK)
        chip.pe_cycles[(plane, block)] = pec
        chip.retention_days[(plane, block)] = retention
    for plane in range(geometry.planes_per_die):
        s_latch = _unpack(reader.take(geometry.page_bytes), geometry.bitlines_per_block)
        c_latch = _unpack(reader.take(geometry.page_bytes), geometry.bitlines_per_block)
        chip.latches[plane] = LatchBank(s_latch, c_latch)
    (page_count,) = reader.unpack(_COUNT)
    for _ in range(page_count):
        plane, block, wordline, mode_index, randomized, tesp_ratio = reader.unpack(_PAGE)
        if mode_index >= len(_MODES):
            raise SnapshotFormatError(f"Unknown programming mode index {mode_index}")
        addr = PageAddress(plane, block, wordline)
        geometry.check_page(addr)
        bits = _unpack(reader.take(geometry.page_bytes), geometry.bitlines_per_block)
        chip.pages[addr] = PageState(_MODES[mode_index], bits, bool(randomized), tesp_ratio)
    if reader.offset != len(body):
        raise SnapshotFormatError(f"{len(body) - reader.offset} trailing bytes after the snapshot payload")
    return chip


def save_snapshot(chip: ChipState, path: PathLike, compress: bool = True) -> None:
    """Writes the binary image of ``chip`` to ``path``."""
    Path(path).write_bytes(dump_snapshot(chip, compress))


def read_snapshot(path: PathLike, **kwargs) -> ChipState:
    """Returns the chip stored in the snapshot file ``path``.

    Keyword arguments are passed on to :func:`load_snapshot`.
    """
    return load_snapshot(Path(path).read_bytes(), **kwargs)
