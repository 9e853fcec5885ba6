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
"""Types shared by the workload generators."""

__all__ = ["Query", "QueryTemplate", "GeneratedWorkload"]

from dataclasses import dataclass, field

import numpy as np

from flashcosmos.planner.expr import Expr, variables


@dataclass(frozen=True)
class Query:
    """One bitwise query over stored bit-vectors.

    Attributes:
        name: Identifier of the query (and of its expected result).
        expr: Expression to evaluate.
        bitcount: Whether the host counts the set bits of the result.
    """

    name: str
    expr: Expr
    bitcount: bool = False

    @property
    def operands(self) -> list[str]:
        return variables(self.expr)


@dataclass(frozen=True)
class QueryTemplate:
    """Shape of a workload's queries, enough for analytic estimation.

    Attributes:
        query: Representative query; every query of the workload has the same shape.
        repeats: Number of queries of that shape.
        vector_bits: Length of every operand.
    """

    query: Query
    repeats: int
    vector_bits: int


@dataclass
class GeneratedWorkload:
    """Operands, queries and oracle results of a workload instance."""

    vectors: dict[str, np.ndarray]
    queries: list[Query]
    expected: dict[str, np.ndarray]
    vector_bits: int
    counts: dict[str, int] = field(default_factory=dict)
