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
"""Unit testing of :mod:`flashcosmos.planner.compiler` module.

Typical usage example::

    $ pytest test_compiler.py

"""

from contextlib import nullcontext as does_not_raise
from dataclasses import replace
import math
from typing import ContextManager

import numpy as np
import pytest
from pytest import raises

from flashcosmos.commands.frames import MwsFrame, XorFrame
from flashcosmos.errors import PlacementMissing, UnsupportedShape
from flashcosmos.flash.device import FlashDevice
from flashcosmos.flash.geometry import ChipGeometry
from flashcosmos.planner.compiler import compile_plan
from flashcosmos.planner.executor import execute, store_operands
from flashcosmos.planner.expr import Var, conjunction, disjunction, evaluate, parse_expression, variables
from flashcosmos.planner.placement import place
from flashcosmos.planner.plan import HostCombine, HostOp, PlanStyle, Readout, plan_stats
from flashcosmos.sensing.engine import MwsFlags


MIXED = "(A1 | B1 & B2 & B3 & B4) & (C1 | C3) & (D2 | D4)"


def _run(text: str, geometry: ChipGeometry, seed: int = 1, hinted: bool = True, **kwargs) -> None:
    """Compiles and executes ``text`` on random operands and checks the result against direct evaluation."""
    expr = parse_expression(text)
    names = variables(expr)
    rng = np.random.default_rng(seed)
    vectors = {name: rng.random(geometry.bitlines_per_block) < 0.5 for name in names}
    placement = place(names, [expr] if hinted else [], geometry)
    device = FlashDevice(geometry, seed=seed)
    store_operands(device, placement, vectors)
    plan = compile_plan(expr, placement, **kwargs)
    np.testing.assert_array_equal(execute(plan, device, placement), evaluate(expr, vectors))


class TestCompilePlan:
    """Tests :func:`~flashcosmos.planner.compiler.compile_plan`"""

    def test_operational_example(self, toy_geometry: ChipGeometry) -> None:
        """Tests the two-frame plan of the mixed AND/OR example, inverse frame first."""
        expr = parse_expression(MIXED)
        plan = compile_plan(expr, place([], [expr], toy_geometry))
        assert plan.steps == (
            MwsFrame(MwsFlags(inverse=True, init_s=True, init_c=True), ((1, 0b11), (2, 0b11))),
            MwsFrame(MwsFlags(move_s_to_c=True), ((0, 0b1111), (3, 0b1))),
            Readout(0),
        )
        assert plan.result_register == 0
        assert not plan.host_fallback
        assert plan_stats(plan).sensings == 2
        _run(MIXED, toy_geometry)

    @pytest.mark.parametrize("build", [conjunction, disjunction])
    def test_flat_sensing_count(self, toy_geometry: ChipGeometry, build) -> None:
        """Tests that a flat AND or OR of co-located operands needs one sensing per 48 operands.

        Args:
            toy_geometry: Toy geometry fixture.
            build: Builds the flat expression from its operands.
        """
        for operands in range(1, 201):
            expr = build([Var(f"v{index}") for index in range(operands)])
            plan = compile_plan(expr, place([], [expr], toy_geometry))
            assert plan_stats(plan).sensings == math.ceil(operands / 48), operands
            assert not plan.host_fallback

    def test_bitmap_index_sensings(self, toy_geometry: ChipGeometry) -> None:
        """Tests the sensing counts of a 1095-operand AND for both sensing styles."""
        expr = conjunction([Var(f"day{index}") for index in range(1095)])
        placement = place([], [expr], toy_geometry)
        flash_cosmos = compile_plan(expr, placement)
        parabit = compile_plan(expr, placement, PlanStyle.PARABIT)
        assert plan_stats(flash_cosmos).sensings == 23
        assert plan_stats(parabit).sensings == 1095
        assert plan_stats(parabit).wordlines_sensed == 1095
        assert plan_stats(flash_cosmos).wordlines_sensed == 1095

    def test_two_block_and(self, toy_geometry: ChipGeometry) -> None:
        """Tests that 96 co-located operands take two accumulated sensings and one readout."""
        expr = conjunction([Var(f"v{index}") for index in range(96)])
        plan = compile_plan(expr, place([], [expr], toy_geometry))
        first, second, readout = plan.steps
        assert first.flags == MwsFlags(init_s=True, init_c=True)
        assert second.flags == MwsFlags(move_s_to_c=True)
        assert readout == Readout(0)

    @pytest.mark.parametrize(
        "text",
        [
            "a",
            "!a",
            "a & b & c",
            "a | b | c",
            "!(a & b)",
            "!(a | b)",
            "(a & b) | (c & d)",
            "(a | b) & (c | d) & e",
            "a ^ b",
            "!(a ^ b)",
            "(a & b) ^ c",
            "(a | b) ^ (c | d)",
            MIXED,
        ],
    )
    def test_in_latch_results(self, toy_geometry: ChipGeometry, text: str) -> None:
        """Tests that expressions computable in the latches execute to their value.

        Args:
            toy_geometry: Toy geometry fixture.
            text: Expression text.
        """
        expr = parse_expression(text)
        plan = compile_plan(expr, place([], [expr], toy_geometry), host_fallback=False)
        assert not plan.host_fallback
        _run(text, toy_geometry, host_fallback=False)

    def test_xor_plan(self, toy_geometry: ChipGeometry) -> None:
        """Tests that XOR leaves one operand in each latch before the inter-latch XOR."""
        expr = parse_expression("a ^ b")
        plan = compile_plan(expr, place([], [expr], toy_geometry))
        cache, sensing, xor, readout = plan.steps
        assert cache.flags == MwsFlags(init_s=True, init_c=True, move_s_to_c=True)
        assert sensing.flags == MwsFlags(inverse=True, init_s=True)
        assert xor == XorFrame()
        assert readout == Readout(0)

    def test_host_fallback(self, toy_geometry: ChipGeometry) -> None:
        """Tests splitting an expression whose operands are stored without a matching layout."""
        text = "(a | b) & (c | d)"
        expr = parse_expression(text)
        placement = place(["a", "b", "c", "d"], [], toy_geometry)
        with raises(UnsupportedShape):
            compile_plan(expr, placement, host_fallback=False)
        plan = compile_plan(expr, placement)
        assert plan.host_fallback
        assert plan.steps[-1] == HostCombine(HostOp.AND, (0, 1), 2)
        assert plan.result_register == 2
        assert plan_stats(plan).readouts == 2
        _run(text, toy_geometry, hinted=False)

    @pytest.mark.parametrize(
        "text",
        ["(a | b) & (c | d)", "(a & b) ^ (c | d) ^ e", "!((a | b) & c ^ d)", "a & !a | b ^ c"],
    )
    def test_unhinted_results(self, toy_geometry: ChipGeometry, text: str) -> None:
        """Tests that plans over an arbitrary layout still compute the expression.

        Args:
            toy_geometry: Toy geometry fixture.
            text: Expression text.
        """
        _run(text, toy_geometry, hinted=False)

    @pytest.mark.parametrize(
        "max_blocks, expectation",
        [
            (1, does_not_raise()),
            (4, does_not_raise()),
            (0, raises(ValueError)),
            (5, raises(ValueError)),
        ],
    )
    def test_max_blocks(
        self, toy_geometry: ChipGeometry, max_blocks: int, expectation: ContextManager
    ) -> None:
        """Tests the MWS block limit argument.

        Args:
            toy_geometry: Toy geometry fixture.
            max_blocks: Largest number of blocks per frame.
            expectation: Context manager for the expected exception.
        """
        expr = parse_expression(MIXED)
        with expectation:
            plan = compile_plan(expr, place([], [expr], toy_geometry), max_blocks=max_blocks)
            assert plan_stats(plan).max_blocks <= max_blocks

    def test_single_block_frames(self, toy_geometry: ChipGeometry) -> None:
        """Tests that a one-block limit still yields a correct plan."""
        _run(MIXED, toy_geometry, max_blocks=1)

    def test_missing_placement(self, toy_geometry: ChipGeometry) -> None:
        """Tests that an operand without placement is reported."""
        with raises(PlacementMissing):
            compile_plan(parse_expression("a & z"), place(["a"], [], toy_geometry))

    def test_wide_block_geometry(self, toy_geometry: ChipGeometry) -> None:
        """Tests that 64-wordline blocks still yield frames whose page bitmaps fit in 48 bits."""
        geometry = replace(toy_geometry, wordlines_per_block=64)
        text = " & ".join(f"v{index}" for index in range(60))
        expr = parse_expression(text)
        placement = place([], [expr], geometry)
        assert max(loc.wordline for loc in placement.locations.values()) == 47
        plan = compile_plan(expr, placement)
        frames = [step for step in plan.steps if isinstance(step, MwsFrame)]
        assert [frame.intra_wl_count for frame in frames] == [48, 12]
        assert all(pbm < 1 << 48 for frame in frames for _, pbm in frame.groups)
        _run(text, geometry)
