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
"""Unit testing of :mod:`flashcosmos.planner.executor` module.

Typical usage example::

    $ pytest test_executor.py

"""

import numpy as np
import pytest
from pytest import raises
from pytest_mock import MockerFixture

from flashcosmos.commands.frames import EspFrame
from flashcosmos.errors import MalformedFrame, PlacementMissing
from flashcosmos.flash.device import FlashDevice
from flashcosmos.flash.geometry import ChipGeometry, PageAddress
from flashcosmos.nand import ProgramMode
from flashcosmos.planner import executor
from flashcosmos.planner.compiler import compile_plan
from flashcosmos.planner.executor import esp_program, execute, host_read, store_operands
from flashcosmos.planner.expr import evaluate, parse_expression, variables
from flashcosmos.planner.placement import Placement, place
from flashcosmos.planner.plan import Plan


GEOMETRY = ChipGeometry(channels=2, dies_per_channel=1, planes_per_die=2, blocks_per_plane=16, page_bytes=1)
MIXED = "(A1 | B1 & B2 & B3 & B4) & (C1 | C3) & (D2 | D4)"


@pytest.fixture(name="stored")
def fixture_stored() -> tuple[FlashDevice, Placement, dict[str, np.ndarray]]:
    """Returns a device holding 44-bit operands of the mixed AND/OR example, and the operands."""
    expr = parse_expression(MIXED)
    rng = np.random.default_rng(4)
    vectors = {name: rng.random(44) < 0.5 for name in variables(expr)}
    placement = place([], [expr], GEOMETRY, vector_bits=44)
    device = FlashDevice(GEOMETRY, seed=4)
    store_operands(device, placement, vectors)
    return device, placement, vectors


def test_execute_over_stripes(stored: tuple[FlashDevice, Placement, dict[str, np.ndarray]]) -> None:
    """Tests that a plan runs on every stripe and the tail padding is dropped."""
    device, placement, vectors = stored
    expr = parse_expression(MIXED)
    result = execute(compile_plan(expr, placement), device, placement)
    assert result.shape == (44,)
    np.testing.assert_array_equal(result, evaluate(expr, vectors))
    assert device.ledger().sensings == 2 * len(placement.stripes)


@pytest.mark.parametrize("text", ["A1 & C1", "!(B2 | D4) ^ C3", MIXED])
def test_host_read(stored: tuple[FlashDevice, Placement, dict[str, np.ndarray]], text: str) -> None:
    """Tests that regular reads undo the stored polarity before host evaluation.

    Args:
        stored: Stored operands fixture.
        text: Expression text.
    """
    device, placement, vectors = stored
    expr = parse_expression(text)
    np.testing.assert_array_equal(host_read(expr, device, placement), evaluate(expr, vectors))


def test_empty_plan(stored: tuple[FlashDevice, Placement, dict[str, np.ndarray]]) -> None:
    """Tests that a plan without steps yields zeros."""
    device, placement, _ = stored
    result = execute(Plan(), device, placement)
    assert result.shape == (44,)
    assert not result.any()


def test_store_rejects(stored: tuple[FlashDevice, Placement, dict[str, np.ndarray]]) -> None:
    """Tests that unplaced and oversized operands are rejected."""
    device, placement, _ = stored
    with raises(PlacementMissing):
        store_operands(device, placement, {"E1": np.ones(44, dtype=bool)})
    with raises(ValueError):
        store_operands(device, placement, {"A1": np.ones(45, dtype=bool)})


def test_store_as_esp_frames(mocker: MockerFixture) -> None:
    """Tests that ESP operands reach the chips as decoded frame streams, one per stripe."""
    expr = parse_expression(MIXED)
    rng = np.random.default_rng(8)
    vectors = {name: rng.random(44) < 0.5 for name in variables(expr)}
    placement = place([], [expr], GEOMETRY, vector_bits=44)
    device = FlashDevice(GEOMETRY, seed=8)
    spy = mocker.spy(executor, "decode_stream")
    store_operands(device, placement, vectors)
    assert spy.call_count == len(placement.stripes)
    ledger = device.ledger()
    assert ledger.programs == len(vectors) * len(placement.stripes)
    assert list(ledger.program_us) == [ProgramMode.ESP.value]
    result = execute(compile_plan(expr, placement), device, placement)
    np.testing.assert_array_equal(result, evaluate(expr, vectors))


def test_store_other_modes() -> None:
    """Tests that operands placed in a non-ESP mode are programmed directly and read back."""
    expr = parse_expression("a & !b")
    vectors = {"a": np.array([True, False] * 6), "b": np.array([False] * 12)}
    placement = place([], [expr], GEOMETRY, vector_bits=12, mode=ProgramMode.SLC)
    device = FlashDevice(GEOMETRY, seed=2)
    store_operands(device, placement, vectors)
    assert list(device.ledger().program_us) == [ProgramMode.SLC.value]
    np.testing.assert_array_equal(host_read(expr, device, placement), evaluate(expr, vectors))


class TestEspProgram:
    """Tests :func:`~flashcosmos.planner.executor.esp_program`"""

    def test_bit_order(self) -> None:
        """Tests that the first payload bit lands on the first bitline."""
        chip = FlashDevice(GEOMETRY).chip(0, 0)
        esp_program(chip, 1, EspFrame(block=3, wordline=5, payload=bytes([0b10000001])))
        page = chip.page(PageAddress(1, 3, 5))
        assert page.mode is ProgramMode.ESP
        np.testing.assert_array_equal(page.data, [True, False, False, False, False, False, False, True])

    @pytest.mark.parametrize("payload", [b"", bytes(2), bytes(16384)])
    def test_payload_must_fill_a_page(self, payload: bytes) -> None:
        """Tests that a payload other than exactly one page is rejected before programming.

        Args:
            payload: ESP payload.
        """
        chip = FlashDevice(GEOMETRY).chip(0, 0)
        with raises(MalformedFrame, match="page holds 1"):
            esp_program(chip, 0, EspFrame(block=0, wordline=0, payload=payload))
        assert chip.ledger.programs == 0
