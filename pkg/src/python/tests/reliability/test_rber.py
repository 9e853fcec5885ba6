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
"""Unit testing of :mod:`flashcosmos.reliability.rber` module.

Typical usage example::

    $ pytest test_rber.py

"""

from contextlib import nullcontext as does_not_raise
import logging
from typing import ContextManager

import numpy as np
import pytest
from pytest import raises

from flashcosmos.flash.chip import ChipState
from flashcosmos.flash.geometry import ChipGeometry, PageAddress
from flashcosmos.nand import ProgramMode
from flashcosmos.reliability.rber import (
    RberModel,
    esp_error_bound,
    flip_bits,
    inject,
    operand_success_probability,
    rber,
)


MODEL = RberModel()
REFERENCE = {"pec": 10_000, "retention_days": 365}


class TestRberModel:
    """Tests :class:`~flashcosmos.reliability.rber.RberModel`"""

    @pytest.mark.parametrize(
        "fields, expectation",
        [
            ({}, does_not_raise()),
            ({"slc_randomized": 1.5}, raises(ValueError, match="Base rates")),
            ({"esp_anchors": ()}, raises(ValueError, match="at least one anchor")),
            ({"esp_anchors": ((0.5, 1e-6), (1.9, 0.0))}, raises(ValueError, match="sorted")),
            (
                {"esp_anchors": ((1.0, 1e-7), (1.5, 1e-6), (1.9, 0.0))},
                raises(ValueError, match="non-increasing"),
            ),
            ({"esp_anchors": ((1.0, 1e-6), (1.9, 1e-8))}, raises(ValueError, match="zero error rate")),
        ],
    )
    def test_validation(self, fields: dict, expectation: ContextManager) -> None:
        """Tests the calibration checks.

        Args:
            fields: Fields overriding the defaults.
            expectation: Context manager for the expected exception.
        """
        with expectation:
            RberModel(**fields)

    def test_esp_curve_is_monotone(self) -> None:
        """Tests that a longer ESP program never increases the error rate and reaches zero."""
        ratios = np.linspace(1.0, 2.5, 61)
        rates = [MODEL.esp_curve(float(ratio)) for ratio in ratios]
        assert all(later <= earlier for earlier, later in zip(rates, rates[1:]))
        assert MODEL.esp_curve(1.0) == pytest.approx(1e-6)
        assert MODEL.esp_curve(1.9) == 0.0
        assert MODEL.esp_curve(2.0) == 0.0

    def test_wear_scale_reference(self) -> None:
        """Tests that the reference condition scales by exactly one."""
        assert MODEL.wear_scale(10_000, 365) == pytest.approx(1.0)


class TestRber:
    """Tests :func:`~flashcosmos.reliability.rber.rber`"""

    def test_reference_rates(self) -> None:
        """Tests the calibrated rates at the reference condition."""
        assert rber(MODEL, ProgramMode.SLC, True, **REFERENCE) == pytest.approx(1.0e-3)
        assert rber(MODEL, ProgramMode.SLC, False, **REFERENCE) == pytest.approx(1.91e-3)
        assert rber(MODEL, ProgramMode.MLC, False, **REFERENCE) == pytest.approx(1.6e-2)
        assert rber(MODEL, ProgramMode.ERASED, False, **REFERENCE) == 0.0
        assert rber(MODEL, ProgramMode.ESP, False, **REFERENCE) == 0.0

    def test_derandomization_multipliers(self) -> None:
        """Tests the SLC and MLC penalties of storing data without randomization."""
        for mode, factor in ((ProgramMode.SLC, 1.91), (ProgramMode.MLC, 4.92)):
            randomized = rber(MODEL, mode, True, **REFERENCE)
            derandomized = rber(MODEL, mode, False, **REFERENCE)
            assert derandomized / randomized == pytest.approx(factor)

    def test_mlc_range(self) -> None:
        """Tests that MLC rates stay within the characterized range at every condition."""
        low, high = MODEL.mlc_range
        for pec in (0, 1_000, 10_000, 20_000):
            for days in (0, 30, 365, 3650):
                for randomized in (True, False):
                    assert low <= rber(MODEL, ProgramMode.MLC, randomized, pec, days) <= high

    @pytest.mark.parametrize("mode", [ProgramMode.SLC, ProgramMode.MLC, ProgramMode.TLC])
    def test_monotone_in_wear(self, mode: ProgramMode) -> None:
        """Tests that more P/E cycles and longer retention never reduce the error rate.

        Args:
            mode: Programming mode.
        """
        by_pec = [rber(MODEL, mode, True, pec, 365) for pec in (0, 1_000, 5_000, 10_000, 20_000)]
        by_days = [rber(MODEL, mode, True, 10_000, days) for days in (0, 30, 365, 1_000)]
        assert by_pec == sorted(by_pec)
        assert by_days == sorted(by_days)

    def test_out_of_range_inputs_warn(self, caplog: pytest.LogCaptureFixture) -> None:
        """Tests that inputs outside the calibrated range are clamped with a warning."""
        caplog.set_level(logging.WARNING)
        clamped = rber(MODEL, ProgramMode.SLC, True, 50_000, 365)
        assert clamped == rber(MODEL, ProgramMode.SLC, True, 20_000, 365)
        assert "calibrated range" in caplog.text


class TestInjection:
    """Tests error injection helpers"""

    @pytest.mark.parametrize(
        "rate, expectation",
        [
            (0.0, does_not_raise()),
            (1.0, does_not_raise()),
            (-0.1, raises(ValueError)),
            (1.1, raises(ValueError)),
        ],
    )
    def test_flip_bits_rate(self, rate: float, expectation: ContextManager) -> None:
        """Tests :func:`flip_bits()` at the extremes and with invalid rates.

        Args:
            rate: Flip probability.
            expectation: Context manager for the expected exception.
        """
        data = np.array([True, False, True, False])
        with expectation:
            flipped = flip_bits(data, rate, np.random.default_rng(0))
            np.testing.assert_array_equal(flipped, data if rate == 0.0 else ~data)

    def test_inject_is_reproducible(self) -> None:
        """Tests that :func:`inject()` depends only on its seed."""
        data = np.zeros(10_000, dtype=bool)
        np.testing.assert_array_equal(inject(data, 0.01, 42), inject(data, 0.01, 42))
        assert not np.array_equal(inject(data, 0.01, 42), inject(data, 0.01, 43))

    def test_inject_statistics(self) -> None:
        """Tests that the observed flip fraction over ten million bits is within 5 % of the requested rate."""
        flips = np.count_nonzero(inject(np.zeros(10_000_000, dtype=bool), 1e-3, 7))
        # mean 10000, standard deviation about 100
        assert 9_500 < flips < 10_500

    def test_esp_is_error_free(self) -> None:
        """Tests that a billion bits drawn at the ESP rate of the longest program flip none."""
        rate = rber(MODEL, ProgramMode.ESP, False, pec=20_000, retention_days=3650, tesp_ratio=1.9)
        assert rate == 0.0
        rng = np.random.default_rng(11)
        chunk = rng.random(10_000_000) < 0.5
        flips = 0
        for seed in range(100):
            flips += np.count_nonzero(inject(chunk, rate, seed) != chunk)
        assert flips == 0

    def test_esp_pages_sense_without_errors(self) -> None:
        """Tests that worn ESP pages sensed for over a billion bits return exactly what was stored."""
        geometry = ChipGeometry(channels=1, dies_per_channel=1, planes_per_die=1, blocks_per_plane=4)
        chip = ChipState(geometry, rber_model=MODEL, seed=5, pe_cycles=20_000, retention_days=3650)
        rng = np.random.default_rng(5)
        pages = {PageAddress(0, 1, wordline): rng.random(chip.bitlines) < 0.5 for wordline in range(4)}
        for addr, data in pages.items():
            chip.program_page(addr, data, ProgramMode.ESP, tesp_ratio=1.9)
        sensings = -(-1_000_000_000 // chip.bitlines)
        errors = 0
        for index in range(sensings):
            addr = PageAddress(0, 1, index % 4)
            errors += np.count_nonzero(chip.sense_page(addr) != pages[addr])
        assert sensings * chip.bitlines >= 1_000_000_000
        assert errors == 0
        slc = PageAddress(0, 2, 0)
        chip.program_page(slc, pages[PageAddress(0, 1, 0)], ProgramMode.SLC)
        assert np.count_nonzero(chip.sense_page(slc) != pages[PageAddress(0, 1, 0)]) > 0

    def test_esp_error_bound(self) -> None:
        """Tests the zero-failure bound."""
        assert esp_error_bound(1e10) == pytest.approx(1e-10)
        with raises(ValueError):
            esp_error_bound(0)

    def test_operand_success_probability(self) -> None:
        """Tests that a 1095-operand result bit survives raw errors far less often than a 23-operand one."""
        rate = 1e-3
        assert operand_success_probability(rate, 1) == pytest.approx(0.999)
        assert operand_success_probability(rate, 1095) == pytest.approx(0.999**1095)
        assert operand_success_probability(rate, 1095) < 0.34 < operand_success_probability(rate, 23)
        assert operand_success_probability(0.0, 1095) == 1.0
