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
"""Raw bit-error rate (RBER) model and seeded error injection.

The model maps a page's programming mode, randomization, P/E-cycle count, retention age and (for ESP pages)
program-latency ratio to the probability that one sensed bit is flipped. Errors are injected as independent
Bernoulli flips.

Typical usage example::

    from flashcosmos.nand import ProgramMode
    from flashcosmos.reliability import RberModel, rber, inject

    model = RberModel()
    rate = rber(model, ProgramMode.SLC, randomized=True, pec=10_000, retention_days=365)
    noisy = inject(bits, rate, rng_seed=7)

"""

__all__ = [
    "RberModel",
    "rber",
    "inject",
    "flip_bits",
    "esp_error_bound",
    "operand_success_probability",
]

from dataclasses import dataclass
import logging
import math

import numpy as np

from flashcosmos.nand import ProgramMode


@dataclass(frozen=True)
class RberModel:
    """Calibration of the RBER model.

    Base rates are given at the reference condition (``reference_pec`` P/E cycles and
    ``reference_retention_days`` of retention). Only the MLC range bounds, the randomization multipliers and
    the ESP zero-error point are measured values; every other number is a calibration constant.

    Attributes:
        slc_randomized: SLC RBER with data randomization at the reference condition.
        mlc_randomized: MLC RBER with data randomization at the reference condition.
        tlc_randomized: TLC RBER with data randomization at the reference condition.
        slc_derandomized_factor: RBER multiplier for SLC pages stored without randomization.
        mlc_derandomized_factor: RBER multiplier for MLC pages stored without randomization.
        tlc_derandomized_factor: RBER multiplier for TLC pages stored without randomization.
        mlc_range: Lower and upper bounds MLC rates are clamped to.
        esp_anchors: ``(tesp_ratio, rate)`` points of the ESP curve for the median block.
        reference_pec: P/E-cycle count the base rates refer to.
        reference_retention_days: Retention age the base rates refer to.
        pec_exponent: Power-law exponent of the P/E-cycle scaling.
        retention_exponent: Power-law exponent of the retention scaling.
        calibrated_pec: Largest P/E-cycle count the scaling is calibrated for.
        calibrated_retention_days: Largest retention age the scaling is calibrated for.
    """

    slc_randomized: float = 1.0e-3
    mlc_randomized: float = 1.6e-2 / 4.92
    tlc_randomized: float = 6.5e-3
    slc_derandomized_factor: float = 1.91
    mlc_derandomized_factor: float = 4.92
    tlc_derandomized_factor: float = 4.92
    mlc_range: tuple[float, float] = (8.6e-4, 1.6e-2)
    esp_anchors: tuple[tuple[float, float], ...] = ((1.0, 1.0e-6), (1.6, 1.0e-7), (1.9, 0.0))
    reference_pec: int = 10_000
    reference_retention_days: float = 365.0
    pec_exponent: float = 0.5
    retention_exponent: float = 0.3
    calibrated_pec: int = 20_000
    calibrated_retention_days: float = 3650.0

    def __post_init__(self) -> None:
        rates = [self.slc_randomized, self.mlc_randomized, self.tlc_randomized]
        if any(not 0.0 <= rate <= 1.0 for rate in rates):
            raise ValueError("Base rates must lie in [0, 1]")
        if not self.esp_anchors:
            raise ValueError("The ESP curve needs at least one anchor")
        ratios = [ratio for ratio, _ in self.esp_anchors]
        values = [value for _, value in self.esp_anchors]
        if ratios != sorted(ratios) or ratios[0] < 1.0:
            raise ValueError("ESP anchors must be sorted by ratio, starting at 1.0 or above")
        if any(later > earlier for earlier, later in zip(values, values[1:])):
            raise ValueError("ESP anchor rates must be non-increasing")
        if values[-1] != 0.0:
            raise ValueError("The last ESP anchor must reach a zero error rate")

    def esp_curve(self, tesp_ratio: float) -> float:
        """Returns the ESP RBER at ``tesp_ratio`` for the median block at the reference condition.

        Interpolation is linear in log(rate) between non-zero anchors and linear in rate towards a zero
        anchor, which keeps the curve monotone non-increasing.
        """
        anchors = self.esp_anchors
        if tesp_ratio <= anchors[0][0]:
            return anchors[0][1]
        for (r0, v0), (r1, v1) in zip(anchors, anchors[1:]):
            if tesp_ratio < r1:
                t = (tesp_ratio - r0) / (r1 - r0)
                if v0 > 0.0 and v1 > 0.0:
                    return math.exp(math.log(v0) + t * (math.log(v1) - math.log(v0)))
                return v0 + t * (v1 - v0)
        return anchors[-1][1]

    def wear_scale(self, pec: int, retention_days: float) -> float:
        """Returns the multiplicative RBER scaling of a block relative to the reference condition."""
        pec_scale = ((pec + 1) / (self.reference_pec + 1)) ** self.pec_exponent
        retention_ratio = (retention_days + 1) / (self.reference_retention_days + 1)
        retention_scale = retention_ratio ** self.retention_exponent
        return pec_scale * retention_scale


def rber(
    model: RberModel,
    mode: ProgramMode,
    randomized: bool,
    pec: int,
    retention_days: float,
    tesp_ratio: float = 2.0,
) -> float:
    """Returns the raw bit-error rate of a page.

    Inputs outside the calibrated range are clamped and reported with a warning, never rejected.

    Args:
        model: Calibration to use.
        mode: Programming mode of the page.
        randomized: Whether the page was stored with data randomization (ignored for ESP pages).
        pec: P/E-cycle count of the page's block.
        retention_days: Effective retention age of the page's block.
        tesp_ratio: ESP program latency as a multiple of the SLC program latency.
    """
    if mode is ProgramMode.ERASED:
        return 0.0
    if pec < 0 or pec > model.calibrated_pec:
        logging.warning(f"P/E-cycle count {pec} outside the calibrated range [0, {model.calibrated_pec}]")
        pec = min(max(pec, 0), model.calibrated_pec)
    if retention_days < 0 or retention_days > model.calibrated_retention_days:
        logging.warning(
            f"Retention age {retention_days} days outside the calibrated range "
            f"[0, {model.calibrated_retention_days}]"
        )
        retention_days = min(max(retention_days, 0.0), model.calibrated_retention_days)
    if mode is ProgramMode.ESP:
        if tesp_ratio < 1.0:
            logging.warning(f"ESP latency ratio {tesp_ratio} below 1.0, clamped")
            tesp_ratio = 1.0
        base = model.esp_curve(tesp_ratio)
    elif mode is ProgramMode.SLC:
        base = model.slc_randomized * (1.0 if randomized else model.slc_derandomized_factor)
    elif mode is ProgramMode.MLC:
        base = model.mlc_randomized * (1.0 if randomized else model.mlc_derandomized_factor)
    else:
        base = model.tlc_randomized * (1.0 if randomized else model.tlc_derandomized_factor)
    rate = base * model.wear_scale(pec, retention_days)
    if mode is ProgramMode.MLC:
        low, high = model.mlc_range
        rate = min(max(rate, low), high)
    return min(max(rate, 0.0), 1.0)


def flip_bits(data: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Returns a copy of ``data`` where each bit is flipped independently with probability ``rate``.

    Args:
        data: Boolean bit-vector.
        rate: Flip probability in [0, 1].
        rng: Random generator the flips are drawn from; no draw happens when ``rate`` is 0 or 1.

    Raises:
        ValueError: if ``rate`` is not a probability.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"Error rate {rate} is not a probability")
    if rate == 0.0:
        return data.copy()
    if rate == 1.0:
        return ~data
    return data ^ (rng.random(data.size) < rate)


def inject(data: np.ndarray, rate: float, rng_seed: int) -> np.ndarray:
    """Returns ``data`` with independent bit flips at ``rate``, deterministically for ``rng_seed``."""
    return flip_bits(data, rate, np.random.default_rng(rng_seed))


def esp_error_bound(bits_observed: float) -> float:
    """Returns the RBER upper bound implied by observing zero errors over ``bits_observed`` bits."""
    if bits_observed <= 0:
        raise ValueError("At least one bit must be observed")
    return 1.0 / bits_observed


def operand_success_probability(rate: float, operands: int) -> float:
    """Returns the probability that a result bit of an ``operands``-way operation sees no raw bit error."""
    return (1.0 - rate) ** operands
