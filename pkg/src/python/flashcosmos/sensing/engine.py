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
"""Functional semantics of multi-wordline sensing (MWS) and of the latch operations built on it.

Sensing several wordlines of one block returns the bitwise AND of their pages; sensing several blocks at once
returns the OR of the per-block ANDs. The latch bank of each plane accumulates successive sensings: AND in the
sensing latch, OR in the cache latch.

Typical usage example::

    from flashcosmos.sensing import MwsFlags, MwsTarget, SensingEngine

    target = MwsTarget.single(plane=0, block=3, wordlines=[0, 2])
    SensingEngine.mws_execute(chip, target, MwsFlags(init_s=True, init_c=True, move_s_to_c=True))
    result = SensingEngine.read_cache(chip, plane=0)

"""

__all__ = ["MwsTarget", "MwsFlags", "SensingEngine", "pbm_from_wordlines", "wordlines_from_pbm"]

from dataclasses import dataclass
import logging
from typing import Iterable

import numpy as np

from flashcosmos.errors import InvalidTarget, InverseWithoutInit
from flashcosmos.flash.chip import ChipState
from flashcosmos.flash.geometry import PageAddress
from flashcosmos.timing.params import frame_latency


MAX_PBM_BITS = 64


def pbm_from_wordlines(wordlines: Iterable[int]) -> int:
    """Returns the page bitmap selecting ``wordlines``."""
    pbm = 0
    for wordline in wordlines:
        if not 0 <= wordline < MAX_PBM_BITS:
            raise InvalidTarget(f"Wordline {wordline} cannot be encoded in a page bitmap")
        pbm |= 1 << wordline
    return pbm


def wordlines_from_pbm(pbm: int) -> list[int]:
    """Returns the wordlines selected by the page bitmap ``pbm``, in increasing order."""
    return [wordline for wordline in range(pbm.bit_length()) if pbm >> wordline & 1]


@dataclass(frozen=True)
class MwsTarget:
    """Pages sensed together by one MWS command.

    Attributes:
        plane: Plane whose latch bank receives the result.
        entries: ``(block, pbm)`` pairs; each page bitmap selects wordlines of its block.
    """

    plane: int
    entries: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise InvalidTarget("An MWS target needs at least one block")
        blocks = [block for block, _ in self.entries]
        if len(set(blocks)) != len(blocks):
            raise InvalidTarget(f"Blocks must be distinct within one MWS target: {blocks}")
        for block, pbm in self.entries:
            if not 0 < pbm < 1 << MAX_PBM_BITS:
                raise InvalidTarget(f"Page bitmap {pbm:#x} of block {block} selects no valid wordline")

    @classmethod
    def single(cls, plane: int, block: int, wordlines: Iterable[int]) -> "MwsTarget":
        """Returns an intra-block target."""
        return cls(plane, ((block, pbm_from_wordlines(wordlines)),))

    @property
    def blocks(self) -> list[int]:
        return [block for block, _ in self.entries]

    @property
    def inter_block_count(self) -> int:
        return len(self.entries)

    @property
    def intra_wl_count(self) -> int:
        """Largest number of wordlines selected in one block."""
        return max(bin(pbm).count("1") for _, pbm in self.entries)


@dataclass(frozen=True)
class MwsFlags:
    """Latch control flags of an MWS command.

    Attributes:
        inverse: Latch the complement of the sensed value.
        init_s: Initialise the sensing latch with the sensed value instead of AND-accumulating it.
        init_c: Clear the cache latch before the (optional) move.
        move_s_to_c: OR the sensing latch into the cache latch.
    """

    inverse: bool = False
    init_s: bool = False
    init_c: bool = False
    move_s_to_c: bool = False

    def __post_init__(self) -> None:
        if self.inverse and not self.init_s:
            raise InverseWithoutInit("Inverse sensing re-initialises the sensing latch and requires init_s")


class SensingEngine:
    """Operations on the latch banks of a chip."""

    @classmethod
    def check_target(cls, chip: ChipState, target: MwsTarget) -> None:
        """Checks ``target`` against the geometry and MWS block limit of ``chip``.

        Raises:
            InvalidTarget: if too many blocks are targeted or a bitmap selects a missing wordline.
            AddressOutOfRange: if a plane or block does not exist.
        """
        if target.inter_block_count > chip.max_mws_blocks:
            raise InvalidTarget(
                f"{target.inter_block_count} blocks exceed the MWS limit of {chip.max_mws_blocks} blocks"
            )
        wordline_mask = (1 << chip.geometry.wordlines_per_block) - 1
        for block, pbm in target.entries:
            chip.geometry.check_block(target.plane, block)
            if pbm & ~wordline_mask:
                raise InvalidTarget(f"Page bitmap {pbm:#x} selects wordlines beyond the end of block {block}")

    @classmethod
    def raw_sense(cls, chip: ChipState, target: MwsTarget) -> np.ndarray:
        """Returns the OR over target blocks of the AND of their selected pages.

        Every page draws fresh bit errors. Latches are left untouched.

        Raises:
            InvalidTarget: if ``target`` is not valid for ``chip``.
        """
        cls.check_target(chip, target)
        result = np.zeros(chip.bitlines, dtype=bool)
        for block, pbm in target.entries:
            conducting = np.ones(chip.bitlines, dtype=bool)
            for wordline in wordlines_from_pbm(pbm):
                conducting &= chip.sense_page(PageAddress(target.plane, block, wordline))
            result |= conducting
        return result

    @classmethod
    def mws_execute(cls, chip: ChipState, target: MwsTarget, flags: MwsFlags) -> None:
        """Senses ``target`` and updates the latches of its plane.

        With ``N`` the sensed value (complemented for inverse sensing): the sensing latch becomes ``N`` when
        ``init_s`` is set and ``S & N`` otherwise; then the cache latch is cleared if ``init_c`` is set; then
        ``C | S`` is written to it if ``move_s_to_c`` is set.

        Raises:
            InvalidTarget: if ``target`` is not valid for ``chip``.
        """
        sensed = cls.raw_sense(chip, target)
        if flags.inverse:
            sensed = ~sensed
        latches = chip.latches[target.plane]
        if flags.init_s:
            latches.s_latch = sensed
        else:
            latches.s_latch = latches.s_latch & sensed
        if flags.init_c:
            latches.c_latch = np.zeros(chip.bitlines, dtype=bool)
        if flags.move_s_to_c:
            latches.c_latch = latches.c_latch | latches.s_latch
        chip.ledger.sensings += 1
        intra = min(target.intra_wl_count, chip.timing.max_intra_wls)
        chip.ledger.busy_us += frame_latency(chip.timing, intra, target.inter_block_count)
        logging.debug(f"MWS on plane {target.plane} blocks {target.blocks} with {flags}")

    @classmethod
    def xor_latches(cls, chip: ChipState, plane: int) -> None:
        """Replaces the cache latch of ``plane`` with ``S ^ C``."""
        chip.geometry.check_block(plane, 0)
        latches = chip.latches[plane]
        latches.c_latch = latches.s_latch ^ latches.c_latch
        chip.ledger.xors += 1
        chip.ledger.busy_us += chip.timing.txor_us

    @classmethod
    def read_cache(cls, chip: ChipState, plane: int) -> np.ndarray:
        """Returns a copy of the cache latch of ``plane``."""
        chip.geometry.check_block(plane, 0)
        return chip.latches[plane].c_latch.copy()
