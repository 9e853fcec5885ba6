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
"""Characterization curves of the device model: MWS latency, sensing power and energy, RBER and write
bandwidth, sampled over their input ranges as rows of a long-format table."""

__all__ = ["CHARACTERIZATION_COLUMNS", "characterization_rows"]

from typing import Any

import numpy as np

from flashcosmos.config import ExperimentConfig
from flashcosmos.nand import ProgramMode
from flashcosmos.reliability.rber import rber
from flashcosmos.timing.params import (
    capacity_bits_per_cell,
    power_scale,
    sensing_energy,
    tmws,
    tmws_raw,
    write_bandwidth,
)


CHARACTERIZATION_COLUMNS = ["curve", "x", "value", "unit"]
PEC_POINTS = (0, 1_000, 3_000, 5_000, 10_000, 15_000, 20_000)
RETENTION_POINTS = (0, 30, 90, 180, 365, 730, 1_095)


def _row(curve: str, x: Any, value: float, unit: str) -> dict[str, Any]:
    return {"curve": curve, "x": x, "value": value, "unit": unit}


def characterization_rows(config: ExperimentConfig) -> list[dict[str, Any]]:
    """Returns every sampled point of the model's characterization curves.

    Curves:
        ``tmws_intra_raw``: MWS latency against the number of wordlines of one block.
        ``tmws_inter_raw``: MWS latency against the number of blocks, every wordline selected.
        ``tmws_inter_scheduled``: the latency the controller schedules for the same operations.
        ``sensing_power_scale``: sensing power relative to a regular read against the number of blocks.
        ``sensing_energy``: energy of one MWS against the number of blocks.
        ``rber_<mode>_pec`` and ``rber_<mode>_retention``: error rates of randomized pages.
        ``rber_<mode>_derandomized_pec``: the same pages stored without randomization.
        ``rber_esp_tesp_ratio``: ESP error rate against the program-latency ratio.
        ``write_bandwidth_<mode>``: sequential write bandwidth of the target geometry against the bits stored
            per cell.
    """
    timing, power, model = config.timing, config.power, config.reliability
    rows = [_row("tmws_intra_raw", n, tmws_raw(timing, n), "us") for n in range(1, timing.max_intra_wls + 1)]
    blocks = range(1, timing.max_inter_blocks + 1)
    rows += [_row("tmws_inter_raw", n, tmws_raw(timing, timing.max_intra_wls, n), "us") for n in blocks]
    rows += [_row("tmws_inter_scheduled", n, tmws(timing, timing.max_intra_wls, n), "us") for n in blocks]
    rows += [_row("sensing_power_scale", n, power_scale(power, n), "x") for n in blocks]
    rows += [
        _row("sensing_energy", n, sensing_energy(timing, power, timing.max_intra_wls, n) * 1e9, "nJ")
        for n in blocks
    ]
    reference_days = model.reference_retention_days
    for mode in (ProgramMode.SLC, ProgramMode.MLC, ProgramMode.TLC):
        name = mode.value
        rows += [
            _row(f"rber_{name}_pec", pec, rber(model, mode, True, pec, reference_days), "")
            for pec in PEC_POINTS
        ]
        rows += [
            _row(f"rber_{name}_derandomized_pec", pec, rber(model, mode, False, pec, reference_days), "")
            for pec in PEC_POINTS
        ]
        rows += [
            _row(f"rber_{name}_retention", days, rber(model, mode, True, model.reference_pec, days), "")
            for days in RETENTION_POINTS
        ]
    for ratio in np.round(np.arange(1.0, 2.01, 0.1), 2):
        rate = rber(model, ProgramMode.ESP, False, model.reference_pec, reference_days, float(ratio))
        rows.append(_row("rber_esp_tesp_ratio", float(ratio), rate, ""))
    geometry = config.target_geometry
    for mode in (ProgramMode.ESP, ProgramMode.SLC, ProgramMode.MLC, ProgramMode.TLC):
        bandwidth = write_bandwidth(
            timing, mode, geometry.channels, geometry.dies_per_channel, geometry.bytes_per_die
        )
        rows.append(_row(f"write_bandwidth_{mode.value}", capacity_bits_per_cell(mode), bandwidth, "GB/s"))
    return rows
