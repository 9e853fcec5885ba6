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
"""NAND flash geometry and addressing.

Typical usage example::

    from flashcosmos.flash import ChipGeometry, PageAddress

    geometry = ChipGeometry()  # 8 channels x 8 dies x 2 planes, 48-WL blocks of 16 KiB pages
    addr = PageAddress(plane=1, block=12, wordline=3)
    geometry.check_page(addr)

"""

__all__ = ["ChipGeometry", "PageAddress", "StripeLocation"]

from dataclasses import dataclass
import math
from typing import NamedTuple

from flashcosmos.errors import AddressOutOfRange


MAX_WORDLINES_PER_BLOCK = 64
# Widest page bitmap one MWS command carries; wordlines above it are programmed and read only.
MAX_SENSED_WORDLINES = 48


class PageAddress(NamedTuple):
    """Address of one page (wordline) inside a chip."""

    plane: int
    block: int
    wordline: int


class StripeLocation(NamedTuple):
    """Where one page-sized stripe of a bit-vector lives in the device.

    ``block_offset`` is added to the per-variable block index of a placement.
    """

    channel: int
    die: int
    plane: int
    block_offset: int


@dataclass(frozen=True)
class ChipGeometry:
    """Shape of the simulated SSD and of each of its NAND dies.

    Defaults follow the reference SSD configuration: 8 channels, 8 dies per channel, 2 planes per die and
    16 KiB pages. A 196-wordline physical block is modelled as four 48-wordline blocks.

    Attributes:
        channels: Number of channels.
        dies_per_channel: Number of dies sharing one channel.
        planes_per_die: Number of planes (each with its own latch bank) in a die.
        blocks_per_plane: Number of 48-wordline blocks in a plane.
        wordlines_per_block: Number of wordlines (pages) in a block.
        page_bytes: Page size in bytes.
    """

    channels: int = 8
    dies_per_channel: int = 8
    planes_per_die: int = 2
    blocks_per_plane: int = 8192
    wordlines_per_block: int = 48
    page_bytes: int = 16384

    def __post_init__(self) -> None:
        counts = {
            "channels": self.channels,
            "dies_per_channel": self.dies_per_channel,
            "planes_per_die": self.planes_per_die,
            "blocks_per_plane": self.blocks_per_plane,
            "wordlines_per_block": self.wordlines_per_block,
            "page_bytes": self.page_bytes,
        }
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"Geometry field '{name}' must be at least 1, got {value}")
        if self.wordlines_per_block > MAX_WORDLINES_PER_BLOCK:
            raise ValueError(
                f"At most {MAX_WORDLINES_PER_BLOCK} wordlines per block are addressable, "
                f"got {self.wordlines_per_block}"
            )

    @property
    def bitlines_per_block(self) -> int:
        """Page width in bits."""
        return self.page_bytes * 8

    @property
    def sensed_wordlines(self) -> int:
        """Wordlines per block that one MWS page bitmap can select."""
        return min(self.wordlines_per_block, MAX_SENSED_WORDLINES)

    @property
    def dies(self) -> int:
        return self.channels * self.dies_per_channel

    @property
    def planes(self) -> int:
        """Total number of planes in the device."""
        return self.dies * self.planes_per_die

    @property
    def bytes_per_die(self) -> int:
        """Bytes one multi-plane page operation moves between a die and the controller."""
        return self.planes_per_die * self.page_bytes

    @property
    def round_bits(self) -> int:
        """Bits covered by one round of stripes, i.e. one page in every plane of the device."""
        return self.planes * self.bitlines_per_block

    def rounds_for(self, vector_bits: int) -> int:
        """Returns the number of stripe rounds a ``vector_bits`` long bit-vector spans."""
        return math.ceil(vector_bits / self.round_bits)

    def pages_for(self, vector_bits: int) -> int:
        """Returns the number of pages a ``vector_bits`` long bit-vector occupies."""
        return math.ceil(vector_bits / self.bitlines_per_block)

    def check_block(self, plane: int, block: int) -> None:
        """Checks that (``plane``, ``block``) exists in a chip.

        Raises:
            AddressOutOfRange: if the plane or the block index is out of range.
        """
        if not 0 <= plane < self.planes_per_die:
            raise AddressOutOfRange(f"Plane {plane} outside [0, {self.planes_per_die})")
        if not 0 <= block < self.blocks_per_plane:
            raise AddressOutOfRange(f"Block {block} outside [0, {self.blocks_per_plane})")

    def check_page(self, addr: PageAddress) -> None:
        """Checks that ``addr`` exists in a chip.

        Raises:
            AddressOutOfRange: if any component of ``addr`` is out of range.
        """
        self.check_block(addr.plane, addr.block)
        if not 0 <= addr.wordline < self.wordlines_per_block:
            raise AddressOutOfRange(f"Wordline {addr.wordline} outside [0, {self.wordlines_per_block})")

    def check_chip(self, channel: int, die: int) -> None:
        """Checks that the die ``die`` of channel ``channel`` exists.

        Raises:
            AddressOutOfRange: if the channel or die index is out of range.
        """
        if not 0 <= channel < self.channels:
            raise AddressOutOfRange(f"Channel {channel} outside [0, {self.channels})")
        if not 0 <= die < self.dies_per_channel:
            raise AddressOutOfRange(f"Die {die} outside [0, {self.dies_per_channel})")

    def stripe_map(self, vector_bits: int, blocks_per_stripe: int = 1) -> tuple[StripeLocation, ...]:
        """Returns where each page-sized stripe of a ``vector_bits`` long bit-vector goes.

        Stripes fill channels first, then dies, then planes. Once every plane holds one stripe, the next round
        starts ``blocks_per_stripe`` blocks further.
        """
        locations = []
        for index in range(self.pages_for(vector_bits)):
            channel = index % self.channels
            die = (index // self.channels) % self.dies_per_channel
            plane = (index // self.dies) % self.planes_per_die
            rounds = index // self.planes
            locations.append(StripeLocation(channel, die, plane, rounds * blocks_per_stripe))
        return tuple(locations)
