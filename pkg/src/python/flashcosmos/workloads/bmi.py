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
"""Bitmap-index (BMI) workload: how many users were active every day of the last ``m`` months.

Each day is a bit-vector over users. The query is the AND of all day vectors, followed by a host-side bit
count.
"""

__all__ = ["BmiSpec", "generate_bmi", "bmi_template"]

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from flashcosmos.planner.expr import Var, conjunction
from flashcosmos.workloads.base import GeneratedWorkload, Query, QueryTemplate


@dataclass(frozen=True)
class BmiSpec:
    """Bitmap-index workload parameters.

    Attributes:
        users: Length of every day vector.
        months: Look-back window; the query spans ``round(365 * months / 12)`` days.
        activity_probability: Probability that a user is active on a given day.
    """

    users: int = 800_000_000
    months: int = 1
    activity_probability: float = 0.5

    kind: ClassVar[str] = "bmi"

    def __post_init__(self) -> None:
        if self.users < 1 or self.months < 1:
            raise ValueError("BMI needs at least one user and one month")
        if not 0.0 <= self.activity_probability <= 1.0:
            raise ValueError(f"Activity probability {self.activity_probability} is not a probability")

    @property
    def days(self) -> int:
        return max(1, round(365 * self.months / 12))

    @property
    def param(self) -> int:
        return self.months


def _query(days: int) -> Query:
    return Query("active_users", conjunction([Var(f"day_{day}") for day in range(days)]), bitcount=True)


def bmi_template(spec: BmiSpec) -> QueryTemplate:
    return QueryTemplate(_query(spec.days), repeats=1, vector_bits=spec.users)


def generate_bmi(spec: BmiSpec, seed: int) -> GeneratedWorkload:
    """Returns random daily-activity vectors, the query and its oracle result."""
    rng = np.random.default_rng(seed)
    vectors = {f"day_{day}": rng.random(spec.users) < spec.activity_probability for day in range(spec.days)}
    expected = np.ones(spec.users, dtype=bool)
    for bits in vectors.values():
        expected &= bits
    query = _query(spec.days)
    return GeneratedWorkload(
        vectors, [query], {query.name: expected}, spec.users, counts={query.name: int(expected.sum())}
    )
