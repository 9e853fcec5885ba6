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
"""Unit testing of :mod:`flashcosmos.timing.timeline` module.

Typical usage example::

    $ pytest test_timeline.py

"""

from dataclasses import replace

import pytest
from pytest import raises

from flashcosmos.flash.geometry import ChipGeometry
from flashcosmos.timing.params import PowerParams, TimingParams
from flashcosmos.timing.timeline import (
    CSV_COLUMNS,
    CSV_SCHEMA_VERSION,
    InFlashCost,
    QueryProfile,
    SystemModel,
    TimelineResult,
    energy_of,
    result_row,
    simulate_timeline,
)


GEOMETRY = ChipGeometry(
    channels=1, dies_per_channel=2, planes_per_die=2, blocks_per_plane=64, page_bytes=1024
)
TIMING = TimingParams()
POWER = PowerParams()
DMA = 2048 / 1200
CHANNEL = 2 * DMA
EXTERNAL = 4096 / 8000
PROFILE = QueryProfile(
    operands=2,
    vector_bits=3 * 32768,
    pb=InFlashCost(sensing_us=45.0, sensing_energy_j=2e-6, readouts=1),
    fc=InFlashCost(sensing_us=25.0, sensing_energy_j=1e-6, readouts=1),
)


def _simulate(system: SystemModel, profile: QueryProfile = PROFILE) -> TimelineResult:
    return simulate_timeline(profile, system, GEOMETRY, TIMING, POWER)


class TestSimulateTimeline:
    """Tests :func:`~flashcosmos.timing.timeline.simulate_timeline`"""

    def test_outside_storage(self) -> None:
        """Tests the pipeline of regular reads: one item per operand and round."""
        result = _simulate(SystemModel.OSP)
        assert result.items == 6
        expected = 22.5 + CHANNEL + EXTERNAL + 5 * (22.5 + DMA)
        assert result.latency_us == pytest.approx(expected)
        assert result.latency_us == pytest.approx(147.4587, rel=1e-5)
        assert result.die_busy_us == pytest.approx(6 * (22.5 + DMA))
        assert result.channel_busy_us == pytest.approx(6 * CHANNEL)
        assert result.external_busy_us == pytest.approx(6 * EXTERNAL)

    def test_in_storage(self) -> None:
        """Tests that in-storage processing only sends the result over the external interface."""
        result = _simulate(SystemModel.ISP)
        assert result.latency_us == pytest.approx(22.5 + CHANNEL + EXTERNAL / 2 + 5 * (22.5 + DMA))
        assert result.external_busy_us == pytest.approx(3 * EXTERNAL)

    @pytest.mark.parametrize("system, sensing_us", [(SystemModel.FC, 25.0), (SystemModel.PB, 45.0)])
    def test_in_flash(self, system: SystemModel, sensing_us: float) -> None:
        """Tests the in-flash pipeline: planes run serially, one item per result round.

        Args:
            system: In-flash system.
            sensing_us: Per-plane command time of the system's plan.
        """
        result = _simulate(system)
        assert result.items == 3
        die = 2 * sensing_us + DMA
        assert result.latency_us == pytest.approx(2 * sensing_us + CHANNEL + EXTERNAL + 2 * die)
        assert result.stage_busy_us == pytest.approx(
            {"die": 3 * die, "channel": 3 * CHANNEL, "external": 3 * EXTERNAL}
        )

    def test_repeats_scale_rounds(self) -> None:
        """Tests that repeated queries add work items."""
        twice = QueryProfile(2, 3 * 32768, repeats=2, fc=PROFILE.fc)
        assert _simulate(SystemModel.FC, twice).items == 6
        assert _simulate(SystemModel.OSP, twice).items == 12

    @pytest.mark.parametrize("system", list(SystemModel))
    def test_empty_workload(self, system: SystemModel) -> None:
        """Tests that a zero-length workload takes no time and no energy.

        Args:
            system: System model.
        """
        result = _simulate(system, QueryProfile(operands=2, vector_bits=0))
        assert result.latency_us == 0.0
        assert result.items == 0
        assert result.energy.total_j == 0.0

    def test_cost_of_host_systems(self) -> None:
        """Tests that only in-flash systems have an in-flash cost."""
        assert PROFILE.cost(SystemModel.FC) is PROFILE.fc
        with raises(ValueError):
            PROFILE.cost(SystemModel.OSP)


class TestEnergy:
    """Tests :func:`~flashcosmos.timing.timeline.energy_of`"""

    def test_outside_storage(self) -> None:
        """Tests that every operand is sensed and moved over both interfaces."""
        energy = energy_of(PROFILE, SystemModel.OSP, GEOMETRY, TIMING, POWER)
        assert energy.flash_j == pytest.approx(2 * 3 * 4 * 0.05 * 22.5e-6)
        assert energy.channel_j == pytest.approx(24576 * 40e-12)
        assert energy.external_j == pytest.approx(24576 * 80e-12)
        assert energy.dram_j == pytest.approx(2 * 24576 * 160e-12)
        assert energy.host_j == pytest.approx(24576 * 2700e-12)
        assert energy.accelerator_j == 0.0

    def test_in_storage(self) -> None:
        """Tests that the accelerator replaces host work and only the result leaves the SSD."""
        energy = energy_of(PROFILE, SystemModel.ISP, GEOMETRY, TIMING, POWER)
        assert energy.channel_j == pytest.approx(24576 * 40e-12)
        assert energy.external_j == pytest.approx(12288 * 80e-12)
        assert energy.accelerator_j == pytest.approx(24576 / 64 * 93e-12)
        assert energy.dram_j == pytest.approx(2 * 24576 * 140e-12 + 12288 * 160e-12)
        assert energy.host_j == 0.0

    def test_in_flash(self) -> None:
        """Tests that in-flash systems pay their plan's sensing energy in every plane and move the result."""
        energy = energy_of(PROFILE, SystemModel.FC, GEOMETRY, TIMING, POWER)
        assert energy.flash_j == pytest.approx(3 * 4 * 1e-6)
        assert energy.channel_j == pytest.approx(12288 * 40e-12)
        assert energy.dram_j == pytest.approx(12288 * 160e-12)
        assert energy.host_j == 0.0
        assert energy.total_j == pytest.approx(
            energy.flash_j + energy.channel_j + energy.external_j + energy.dram_j + energy.host_j
        )

    def test_in_flash_saves_energy(self) -> None:
        """Tests that a cheap in-flash plan uses less energy than reading both operands out."""
        fc = energy_of(PROFILE, SystemModel.FC, GEOMETRY, TIMING, POWER)
        osp = energy_of(PROFILE, SystemModel.OSP, GEOMETRY, TIMING, POWER)
        assert fc.total_j < osp.total_j

    def test_host_fallback_pays_host(self) -> None:
        """Tests that the host combines (and buffers twice) the readouts of a plan that fell back to it."""
        profile = replace(PROFILE, fc=InFlashCost(sensing_us=25.0, sensing_energy_j=1e-6, readouts=2))
        energy = energy_of(profile, SystemModel.FC, GEOMETRY, TIMING, POWER)
        assert energy.host_j == pytest.approx(24576 * 2700e-12)
        assert energy.dram_j == pytest.approx(2 * 24576 * 160e-12)

    def test_saving_exceeds_speedup(self) -> None:
        """Tests that a many-operand AND saves more energy over outside-storage processing than time."""
        profile = QueryProfile(
            operands=1095,
            vector_bits=3 * 32768,
            pb=InFlashCost(sensing_us=1095 * 22.5, sensing_energy_j=1095 * 1.125e-6, readouts=1),
            fc=InFlashCost(sensing_us=23 * 25.0, sensing_energy_j=23 * 1.162e-6, readouts=1),
        )
        results = {system: _simulate(system, profile) for system in SystemModel}
        energy = {system: result.energy.total_j for system, result in results.items()}
        order = (SystemModel.OSP, SystemModel.ISP, SystemModel.PB, SystemModel.FC)
        osp, isp, pb, fc = (energy[system] for system in order)
        assert osp > isp > pb > fc
        speedup = results[SystemModel.OSP].latency_us / results[SystemModel.FC].latency_us
        assert energy[SystemModel.OSP] / energy[SystemModel.FC] > speedup


class TestResultRow:
    """Tests :func:`~flashcosmos.timing.timeline.result_row`"""

    @pytest.mark.parametrize("correct, expected", [(None, ""), (True, 1), (False, 0)])
    def test_row(self, correct: bool | None, expected: object) -> None:
        """Tests the CSV row layout.

        Args:
            correct: Oracle outcome.
            expected: Expected ``correct`` column.
        """
        row = result_row("bmi", 36, _simulate(SystemModel.FC), correct)
        assert list(row) == CSV_COLUMNS
        assert row["schema_version"] == CSV_SCHEMA_VERSION
        assert row["system"] == "FC"
        assert row["param"] == 36
        assert row["correct"] == expected
        assert row["energy_uJ"] == pytest.approx(_simulate(SystemModel.FC).energy.total_j * 1e6, abs=1e-6)
