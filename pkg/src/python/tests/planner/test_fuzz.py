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
"""Unit testing of :mod:`flashcosmos.planner.fuzz` module.

Typical usage example::

    $ pytest test_fuzz.py

"""

import numpy as np
import pytest

from flashcosmos.planner.expr import variables
from flashcosmos.planner.fuzz import fuzz_compiler, random_expression
from flashcosmos.planner.plan import PlanStyle


def test_random_expression_is_seeded() -> None:
    """Tests that random expressions only use the pool and depend on the seed alone."""
    names = ["a", "b", "c"]
    first = [random_expression(np.random.default_rng(5), names) for _ in range(3)]
    second = [random_expression(np.random.default_rng(5), names) for _ in range(3)]
    assert first == second
    assert set(variables(first[0])) <= set(names)


@pytest.mark.parametrize(
    "style, seed",
    [(PlanStyle.FLASH_COSMOS, 7), (PlanStyle.FLASH_COSMOS, 8), (PlanStyle.PARABIT, 9)],
)
def test_fuzz_compiler(style: PlanStyle, seed: int) -> None:
    """Tests that compiled plans on ESP pages match direct evaluation for random expressions.

    Args:
        style: Compilation style.
        seed: Seed of the run.
    """
    report = fuzz_compiler(300, seed, style=style)
    assert report.cases == 300
    assert report.passed, report.failures
    assert report.sensings > 0


def test_ten_thousand_cases() -> None:
    """Tests ten thousand seeded random expressions on ESP pages without a single mismatch."""
    report = fuzz_compiler(10_000, 2024)
    assert report.cases == 10_000
    assert report.mismatches == 0
    assert report.passed, report.failures[:5]
