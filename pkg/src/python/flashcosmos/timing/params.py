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
"""Device timing and power parameters.

Latencies are expressed in microseconds, bandwidths in GB/s (10^9 bytes per second) and energies in joules
unless a field name says otherwise.
"""

__all__ = [
    "TimingParams",
    "PowerParams",
    "interpolate",
    "tmws_raw",
    "tmws",
    "frame_latency",
    "power_scale",
    "sensing_energy",
    "program_latency",
    "write_bandwidth",
    "capacity_bits_per_cell",
]

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from flashcosmos.nand import BITS_PER_CELL, ProgramMode


@dataclass(frozen=True)
class TimingParams:
    """NAND and interface timing.

    The intra- and inter-block anchors describe the uncapped MWS latency as a multiple of ``tr_slc_us``.
    Intermediate anchors are calibration constants; the end points are measured.
    """

    tr_slc_us: float = 22.5
    tmws_capped_us: float = 25.0
    mws_cap_blocks: int = 4
    tprog_slc_us: float = 200.0
    tprog_mlc_us: float = 500.0
    tprog_tlc_us: float = 700.0
    tesp_us: float = 400.0
    tbers_us: float = 4000.0
    txor_us: float = 1.0
    channel_bw_gbps: float = 1.2
    external_bw_gbps: float = 8.0
    max_intra_wls: int = 48
    max_inter_blocks: int = 32
    intra_anchors: tuple[tuple[float, float], ...] = ((1, 1.000), (8, 1.010), (48, 1.033))
    inter_anchors: tuple[tuple[float, float], ...] = ((4, 1.033), (8, 1.05), (16, 1.15), (32, 1.363))

    def __post_init__(self) -> None:
        positive = [
            self.tr_slc_us,
            self.tmws_capped_us,
            self.tprog_slc_us,
            self.tprog_mlc_us,
            self.tprog_tlc_us,
            self.tesp_us,
            self.tbers_us,
            self.channel_bw_gbps,
            self.external_bw_gbps,
        ]
        if any(value <= 0 for value in positive):
            raise ValueError("Timing parameters must be positive")

    def transfer_us(self, num_bytes: float, bandwidth_gbps: float) -> float:
        """Returns the time to move ``num_bytes`` over a link of ``bandwidth_gbps``."""
        return num_bytes / (bandwidth_gbps * 1e3)

    def dma_us(self, num_bytes: float) -> float:
        """Returns the channel transfer time of ``num_bytes`` between a die and the controller."""
        return self.transfer_us(num_bytes, self.channel_bw_gbps)

    def ext_us(self, num_bytes: float) -> float:
        """Returns the external transfer time of ``num_bytes`` between the SSD and the host."""
        return self.transfer_us(num_bytes, self.external_bw_gbps)


@dataclass(frozen=True)
class PowerParams:
    """Power and energy coefficients.

    ``read_power_w`` is the power of one plane sensing a regular page; inter-block MWS scales it by the
    ``power_anchors`` table. The per-byte coefficients of the SSD interfaces, DRAM and host are calibration
    constants that scale end-to-end results but not in-SSD ratios. ``dram_pj_per_byte`` and
    ``ssd_dram_pj_per_byte`` are charged once per access (a buffered operand is written and read back).
    ``host_pj_per_byte`` is the CPU energy per operand byte the host combines, including the package
    power spent while streaming it.
    """

    read_power_w: float = 0.05
    power_anchors: tuple[tuple[float, float], ...] = (
        (1, 1.00),
        (2, 1.34),
        (4, 1.80),
        (8, 2.50),
        (16, 3.60),
        (32, 5.20),
    )
    erase_power_scale: float = 1.9
    program_power_w: float = 0.05
    isp_accel_pj_per_op: float = 93.0
    isp_op_bytes: int = 64
    channel_pj_per_byte: float = 40.0
    external_pj_per_byte: float = 80.0
    dram_pj_per_byte: float = 160.0
    ssd_dram_pj_per_byte: float = 140.0
    host_pj_per_byte: float = 2700.0

    def __post_init__(self) -> None:
        if self.power_anchors[0] != (1, 1.0):
            raise ValueError("The power scale of a single-block sensing must be 1.0")
        values = [value for _, value in self.power_anchors]
        if values != sorted(values):
            raise ValueError("The power scale must be non-decreasing in the block count")


def interpolate(anchors: Sequence[tuple[float, float]], x: float) -> float:
    """Returns the piecewise-linear interpolation of ``anchors`` at ``x``, clamped at both ends."""
    xs, ys = zip(*anchors)
    return float(np.interp(x, xs, ys))


def _check_counts(params: TimingParams, intra_wl_count: int, inter_block_count: int) -> None:
    if not 1 <= intra_wl_count <= params.max_intra_wls:
        raise ValueError(f"Intra-block wordline count {intra_wl_count} outside [1, {params.max_intra_wls}]")
    if not 1 <= inter_block_count <= params.max_inter_blocks:
        raise ValueError(f"Inter-block count {inter_block_count} outside [1, {params.max_inter_blocks}]")


def tmws_raw(params: TimingParams, intra_wl_count: int, inter_block_count: int = 1) -> float:
    """Returns the uncapped latency of a reliable MWS operation (µs).

    A single block follows the intra-block curve; several blocks cannot be faster than the inter-block curve,
    which was characterised with every wordline of the target blocks selected.

    Raises:
        ValueError: if a count is out of range.
    """
    _check_counts(params, intra_wl_count, inter_block_count)
    factor = interpolate(params.intra_anchors, intra_wl_count)
    if inter_block_count > 1:
        factor = max(factor, interpolate(params.inter_anchors, inter_block_count))
    return params.tr_slc_us * factor


def tmws(params: TimingParams, intra_wl_count: int, inter_block_count: int = 1) -> float:
    """Returns the MWS latency a controller schedules (µs).

    Up to ``mws_cap_blocks`` blocks every MWS takes the fixed ``tmws_capped_us``; beyond that the latency
    follows the raw curve but never drops below the cap.

    Raises:
        ValueError: if a count is out of range.
    """
    raw = tmws_raw(params, intra_wl_count, inter_block_count)
    if inter_block_count <= params.mws_cap_blocks:
        return params.tmws_capped_us
    return max(params.tmws_capped_us, raw)


def frame_latency(params: TimingParams, intra_wl_count: int, inter_block_count: int) -> float:
    """Returns the latency of one sensing command: a single-page sensing is a regular read."""
    if intra_wl_count == 1 and inter_block_count == 1:
        return params.tr_slc_us
    return tmws(params, intra_wl_count, inter_block_count)


def power_scale(power: PowerParams, inter_block_count: int) -> float:
    """Returns the sensing power of an inter-block MWS relative to a regular read."""
    if inter_block_count < 1:
        raise ValueError("At least one block must be sensed")
    return interpolate(power.power_anchors, inter_block_count)


def sensing_energy(
    params: TimingParams, power: PowerParams, intra_wl_count: int, inter_block_count: int = 1
) -> float:
    """Returns the energy (J) one plane spends on a sensing, using the raw (uncapped) latency."""
    duration_us = tmws_raw(params, intra_wl_count, inter_block_count)
    return power.read_power_w * power_scale(power, inter_block_count) * duration_us * 1e-6


def program_latency(params: TimingParams, mode: ProgramMode, tesp_ratio: float | None = None) -> float:
    """Returns the page program latency (µs) of ``mode``.

    ESP pages take ``tesp_us`` unless ``tesp_ratio`` gives their latency as a multiple of the SLC one.

    Raises:
        ValueError: if ``mode`` is ``ERASED``.
    """
    latencies = {
        ProgramMode.SLC: params.tprog_slc_us,
        ProgramMode.ESP: params.tesp_us,
        ProgramMode.MLC: params.tprog_mlc_us,
        ProgramMode.TLC: params.tprog_tlc_us,
    }
    if mode not in latencies:
        raise ValueError(f"No program latency for mode {mode.name}")
    if mode is ProgramMode.ESP and tesp_ratio is not None:
        return params.tprog_slc_us * tesp_ratio
    return latencies[mode]


def write_bandwidth(
    params: TimingParams, mode: ProgramMode, channels: int, dies_per_channel: int, bytes_per_die: int
) -> float:
    """Returns the sequential write bandwidth (GB/s) of the SSD when every page is programmed in ``mode``.

    Each channel serialises the die transfers while the dies program concurrently; a die can only accept its
    next page after its previous program finished.
    """
    dma = params.dma_us(bytes_per_die)
    cycle = max(dies_per_channel * dma, dma + program_latency(params, mode))
    return channels * dies_per_channel * bytes_per_die / (cycle * 1e3)


def capacity_bits_per_cell(mode: ProgramMode) -> int:
    """Returns how many bits a cell stores in ``mode``."""
    return BITS_PER_CELL[mode]
