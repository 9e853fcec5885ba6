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
"""Logical model of one NAND die.

A chip holds per-page cell states (one bit per bitline, ``True`` for an erased cell), one latch bank per
plane and per-block wear conditions. Pages are materialised lazily, so chips with the reference geometry are
cheap as long as few pages are programmed.

Typical usage example::

    import numpy as np
    from flashcosmos.flash import ChipGeometry, ChipState, PageAddress
    from flashcosmos.nand import ProgramMode

    chip = ChipState(ChipGeometry(page_bytes=8), seed=1)
    addr = PageAddress(plane=0, block=0, wordline=0)
    chip.program_page(addr, np.ones(64, dtype=bool), ProgramMode.ESP)
    bits = chip.read_page(addr)

"""

__all__ = ["PageState", "LatchBank", "ChipLedger", "ChipState"]

from dataclasses import dataclass, field
import logging

import numpy as np

from flashcosmos.errors import ProgramOnNonErasedPage
from flashcosmos.flash.geometry import ChipGeometry, PageAddress
from flashcosmos.nand import ProgramMode
from flashcosmos.reliability.rber import RberModel, flip_bits, rber
from flashcosmos.timing.params import TimingParams, frame_latency, program_latency


DEFAULT_TESP_RATIO = 2.0


@dataclass
class PageState:
    """Contents of one page.

    Attributes:
        mode: Programming mode the page was written with.
        data: Stored bits, one per bitline (``True`` is an erased cell).
        randomized: Whether the controller randomized the data before programming.
        tesp_ratio: ESP program latency as a multiple of the SLC one (only meaningful for ESP pages).
    """

    mode: ProgramMode
    data: np.ndarray
    randomized: bool = False
    tesp_ratio: float = DEFAULT_TESP_RATIO

    @classmethod
    def erased(cls, bitlines: int) -> "PageState":
        return cls(ProgramMode.ERASED, np.ones(bitlines, dtype=bool), randomized=False)


@dataclass
class LatchBank:
    """Sensing (S) and cache (C) latches of every bitline of a plane."""

    s_latch: np.ndarray
    c_latch: np.ndarray

    @classmethod
    def empty(cls, bitlines: int) -> "LatchBank":
        return cls(np.zeros(bitlines, dtype=bool), np.zeros(bitlines, dtype=bool))


@dataclass
class ChipLedger:
    """Device busy time and operation counts accrued by a chip."""

    busy_us: float = 0.0
    erases: int = 0
    programs: int = 0
    reads: int = 0
    sensings: int = 0
    xors: int = 0
    program_us: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict[str, float]:
        counts: dict[str, float] = {
            "busy_us": self.busy_us,
            "erases": self.erases,
            "programs": self.programs,
            "reads": self.reads,
            "sensings": self.sensings,
            "xors": self.xors,
        }
        counts.update({f"program_us_{mode}": value for mode, value in self.program_us.items()})
        return counts


class ChipState:
    """One NAND die: pages, latch banks and per-block wear.

    Every chip owns a random generator seeded at construction, so the chip's evolution is a pure function of
    the command sequence and the seed. Sensing injects bit errors through ``rber_model``; passing ``None``
    makes every sensing error-free.

    Args:
        geometry: Shape of the chip (only the per-die fields are used).
        rber_model: Error model, or ``None`` to disable error injection.
        seed: Seed of the chip's random generator.
        timing: Latencies charged to the chip's ledger.
        max_mws_blocks: Largest number of blocks one MWS command may target.
        pe_cycles: Initial P/E-cycle count of every block.
        retention_days: Initial retention age of every block.
    """

    def __init__(
        self,
        geometry: ChipGeometry,
        rber_model: RberModel | None = None,
        seed: int | np.random.SeedSequence = 0,
        timing: TimingParams | None = None,
        max_mws_blocks: int = 4,
        pe_cycles: int = 0,
        retention_days: float = 0.0,
    ) -> None:
        if not 1 <= max_mws_blocks <= 32:
            raise ValueError(f"MWS block limit {max_mws_blocks} outside [1, 32]")
        self.geometry = geometry
        self.rber_model = rber_model
        self.timing = timing if timing is not None else TimingParams()
        self.max_mws_blocks = max_mws_blocks
        self.rng = np.random.default_rng(seed)
        self.pages: dict[PageAddress, PageState] = {}
        self.latches = [LatchBank.empty(geometry.bitlines_per_block) for _ in range(geometry.planes_per_die)]
        self.default_pe_cycles = pe_cycles
        self.default_retention_days = retention_days
        self.pe_cycles: dict[tuple[int, int], int] = {}
        self.retention_days: dict[tuple[int, int], float] = {}
        self.ledger = ChipLedger()

    @property
    def bitlines(self) -> int:
        return self.geometry.bitlines_per_block

    def block_pe_cycles(self, plane: int, block: int) -> int:
        """Returns the P/E-cycle count of a block."""
        return self.pe_cycles.get((plane, block), self.default_pe_cycles)

    def block_retention_days(self, plane: int, block: int) -> float:
        """Returns the retention age of a block."""
        return self.retention_days.get((plane, block), self.default_retention_days)

    def set_block_condition(
        self, plane: int, block: int, pe_cycles: int | None = None, retention_days: float | None = None
    ) -> None:
        """Sets the wear condition of a block.

        Raises:
            AddressOutOfRange: if the block does not exist.
            ValueError: if ``pe_cycles`` is lower than the block's current count.
        """
        self.geometry.check_block(plane, block)
        if pe_cycles is not None:
            current = self.block_pe_cycles(plane, block)
            if pe_cycles < current:
                raise ValueError(f"P/E cycles cannot decrease (block {block}: {current} -> {pe_cycles})")
            self.pe_cycles[(plane, block)] = pe_cycles
        if retention_days is not None:
            self.retention_days[(plane, block)] = retention_days

    def page(self, addr: PageAddress) -> PageState:
        """Returns the state of the page at ``addr`` (an erased page if it was never programmed).

        Raises:
            AddressOutOfRange: if ``addr`` is out of range.
        """
        self.geometry.check_page(addr)
        state = self.pages.get(addr)
        if state is None:
            return PageState.erased(self.bitlines)
        return state

    def erase_block(self, plane: int, block: int) -> None:
        """Erases every page of a block and increments its P/E-cycle count.

        Raises:
            AddressOutOfRange: if the block does not exist.
        """
        self.geometry.check_block(plane, block)
        for wordline in range(self.geometry.wordlines_per_block):
            self.pages.pop(PageAddress(plane, block, wordline), None)
        self.pe_cycles[(plane, block)] = self.block_pe_cycles(plane, block) + 1
        self.ledger.erases += 1
        self.ledger.busy_us += self.timing.tbers_us
        logging.debug(f"Erased block {block} of plane {plane}")

    def program_page(
        self,
        addr: PageAddress,
        data: np.ndarray,
        mode: ProgramMode,
        inverted: bool = False,
        randomized: bool | None = None,
        tesp_ratio: float = DEFAULT_TESP_RATIO,
    ) -> None:
        """Programs one page.

        Args:
            addr: Target page.
            data: Bits to store, one per bitline.
            mode: Programming mode; ESP pages are never randomized.
            inverted: Store the bitwise complement of ``data``.
            randomized: Override the randomization default (on for every mode but ESP).
            tesp_ratio: ESP program latency as a multiple of the SLC one.

        Raises:
            AddressOutOfRange: if ``addr`` is out of range.
            ProgramOnNonErasedPage: if the page was programmed since its block's last erase.
            ValueError: if ``mode`` is ``ERASED``, ``data`` has the wrong width or ``tesp_ratio`` is below 1.
        """
        self.geometry.check_page(addr)
        if mode is ProgramMode.ERASED:
            raise ValueError("Cannot program a page in erased mode")
        if tesp_ratio < 1.0:
            raise ValueError(f"ESP latency ratio must be at least 1.0, got {tesp_ratio}")
        bits = np.asarray(data, dtype=bool)
        if bits.shape != (self.bitlines,):
            raise ValueError(f"Page data must hold {self.bitlines} bits, got shape {bits.shape}")
        if addr in self.pages:
            raise ProgramOnNonErasedPage(f"Page {addr} has not been erased since it was last programmed")
        if mode is ProgramMode.ESP:
            randomized = False
        elif randomized is None:
            randomized = True
        self.pages[addr] = PageState(mode, ~bits if inverted else bits.copy(), randomized, tesp_ratio)
        latency = program_latency(self.timing, mode, tesp_ratio if mode is ProgramMode.ESP else None)
        self.ledger.programs += 1
        self.ledger.busy_us += latency
        self.ledger.program_us[mode.value] = self.ledger.program_us.get(mode.value, 0.0) + latency

    def error_rate(self, addr: PageAddress) -> float:
        """Returns the raw bit-error rate a sensing of ``addr`` currently suffers."""
        state = self.page(addr)
        if self.rber_model is None or state.mode is ProgramMode.ERASED:
            return 0.0
        return rber(
            self.rber_model,
            state.mode,
            state.randomized,
            self.block_pe_cycles(addr.plane, addr.block),
            self.block_retention_days(addr.plane, addr.block),
            state.tesp_ratio,
        )

    def sense_page(self, addr: PageAddress) -> np.ndarray:
        """Returns the bits a sensing of ``addr`` observes, with freshly drawn bit errors.

        Raises:
            AddressOutOfRange: if ``addr`` is out of range.
        """
        state = self.page(addr)
        return flip_bits(state.data, self.error_rate(addr), self.rng)

    def read_page(self, addr: PageAddress, inverse: bool = False) -> np.ndarray:
        """Reads one page, leaving the result in both latches of its plane.

        Args:
            addr: Page to read.
            inverse: Return (and latch) the complement of the sensed data.

        Raises:
            AddressOutOfRange: if ``addr`` is out of range.
        """
        bits = self.sense_page(addr)
        if inverse:
            bits = ~bits
        latches = self.latches[addr.plane]
        latches.s_latch = bits
        latches.c_latch = bits.copy()
        self.ledger.reads += 1
        self.ledger.busy_us += frame_latency(self.timing, 1, 1)
        return bits.copy()
