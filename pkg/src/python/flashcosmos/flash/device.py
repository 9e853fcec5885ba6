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
"""A whole SSD as a grid of independent NAND dies.

Long bit-vectors are striped page by page across channels first, then dies, then planes, so that every die of
every channel holds a share of each operand.
"""

__all__ = ["FlashDevice"]

import logging
from typing import Iterator, Sequence

import numpy as np

from flashcosmos.flash.chip import DEFAULT_TESP_RATIO, ChipLedger, ChipState
from flashcosmos.flash.geometry import ChipGeometry, PageAddress, StripeLocation
from flashcosmos.nand import ProgramMode
from flashcosmos.reliability.rber import RberModel
from flashcosmos.timing.params import TimingParams


class FlashDevice:
    """Channels x dies collection of :class:`ChipState`, created on first use.

    Each chip gets its own generator, derived from ``seed`` and the chip coordinates, so chips can be
    simulated in any order (or in separate processes) with identical results.
    """

    def __init__(
        self,
        geometry: ChipGeometry,
        rber_model: RberModel | None = None,
        seed: int = 0,
        timing: TimingParams | None = None,
        max_mws_blocks: int = 4,
        pe_cycles: int = 0,
        retention_days: float = 0.0,
    ) -> None:
        self.geometry = geometry
        self.rber_model = rber_model
        self.seed = seed
        self.timing = timing if timing is not None else TimingParams()
        self.max_mws_blocks = max_mws_blocks
        self.pe_cycles = pe_cycles
        self.retention_days = retention_days
        self._chips: dict[tuple[int, int], ChipState] = {}

    def chip(self, channel: int, die: int) -> ChipState:
        """Returns the die ``die`` of channel ``channel``.

        Raises:
            AddressOutOfRange: if the chip does not exist.
        """
        key = (channel, die)
        if key not in self._chips:
            self.geometry.check_chip(channel, die)
            self._chips[key] = ChipState(
                self.geometry,
                rber_model=self.rber_model,
                seed=np.random.SeedSequence([self.seed, channel, die]),
                timing=self.timing,
                max_mws_blocks=self.max_mws_blocks,
                pe_cycles=self.pe_cycles,
                retention_days=self.retention_days,
            )
        return self._chips[key]

    def chips(self) -> Iterator[tuple[tuple[int, int], ChipState]]:
        """Yields the chips created so far with their (channel, die) coordinates."""
        yield from sorted(self._chips.items())

    def ledger(self) -> ChipLedger:
        """Returns the sum of every chip's ledger; ``busy_us`` is the busiest chip's time."""
        total = ChipLedger()
        for _, chip in self.chips():
            ledger = chip.ledger
            total.busy_us = max(total.busy_us, ledger.busy_us)
            total.erases += ledger.erases
            total.programs += ledger.programs
            total.reads += ledger.reads
            total.sensings += ledger.sensings
            total.xors += ledger.xors
            for mode, value in ledger.program_us.items():
                total.program_us[mode] = total.program_us.get(mode, 0.0) + value
        return total

    def program_vector(
        self,
        bits: np.ndarray,
        stripes: Sequence[StripeLocation],
        block: int,
        wordline: int,
        mode: ProgramMode,
        inverted: bool = False,
        tesp_ratio: float = DEFAULT_TESP_RATIO,
    ) -> None:
        """Programs a bit-vector striped over ``stripes``.

        The tail of the last page is padded with erased (``True``) bits before any inversion.

        Raises:
            ValueError: if ``stripes`` cannot hold ``bits``.
        """
        page_bits = self.geometry.bitlines_per_block
        if len(stripes) * page_bits < len(bits):
            raise ValueError(f"{len(stripes)} stripes cannot hold {len(bits)} bits")
        padded = np.ones(len(stripes) * page_bits, dtype=bool)
        padded[: len(bits)] = bits
        for index, loc in enumerate(stripes):
            chip = self.chip(loc.channel, loc.die)
            addr = PageAddress(loc.plane, loc.block_offset + block, wordline)
            page = padded[index * page_bits : (index + 1) * page_bits]
            chip.program_page(addr, page, mode, inverted, tesp_ratio=tesp_ratio)
        logging.debug(f"Programmed {len(bits)} bits in {len(stripes)} pages at block {block}, WL {wordline}")

    def read_vector(
        self,
        length: int,
        stripes: Sequence[StripeLocation],
        block: int,
        wordline: int,
        inverse: bool = False,
    ) -> np.ndarray:
        """Reads back ``length`` bits striped over ``stripes``."""
        chunks = []
        for loc in stripes:
            chip = self.chip(loc.channel, loc.die)
            chunks.append(chip.read_page(PageAddress(loc.plane, loc.block_offset + block, wordline), inverse))
        if not chunks:
            return np.zeros(0, dtype=bool)
        return np.concatenate(chunks)[:length]
