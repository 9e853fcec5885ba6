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
"""k-clique-star (KCS) workload: the vertices adjacent to every vertex of a k-clique, plus the clique itself.

Every vertex has an adjacency bit-vector and every clique a membership bit-vector. The star of a clique is the
AND of the adjacency vectors of its vertices ORed with its membership vector, which one inter-block sensing
computes when the clique vector lives in its own block.
"""

__all__ = ["KcsSpec", "generate_kcs", "kcs_template", "clique_star_oracle"]

from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np

from flashcosmos.planner.expr import Expr, Or, Var, conjunction
from flashcosmos.workloads.base import GeneratedWorkload, Query, QueryTemplate


@dataclass(frozen=True)
class KcsSpec:
    """k-clique-star workload parameters.

    Attributes:
        vertices: Number of graph vertices (length of every vector).
        cliques: Number of planted k-cliques, one query each.
        k: Clique size.
        edge_probability: Density of the random background graph.
    """

    vertices: int = 32 * 2**20
    cliques: int = 1024
    k: int = 8
    edge_probability: float = 0.05

    kind: ClassVar[str] = "kcs"

    def __post_init__(self) -> None:
        if self.k < 1 or self.k > self.vertices:
            raise ValueError(f"Clique size {self.k} must be in [1, {self.vertices}]")
        if self.cliques < 1:
            raise ValueError("KCS needs at least one clique")
        if not 0.0 <= self.edge_probability <= 1.0:
            raise ValueError(f"Edge probability {self.edge_probability} is not a probability")

    @property
    def param(self) -> int:
        return self.k


def _star(members: Sequence[int], clique: int) -> Expr:
    return Or((conjunction([Var(f"adj_{vertex}") for vertex in members]), Var(f"clique_{clique}")))


def kcs_template(spec: KcsSpec) -> QueryTemplate:
    query = Query("star_0", _star(range(spec.k), 0))
    return QueryTemplate(query, repeats=spec.cliques, vector_bits=spec.vertices)


def clique_star_oracle(neighbours: Sequence[set[int]], members: Sequence[int]) -> set[int]:
    """Returns the vertices adjacent to every member, together with the members."""
    common = set(neighbours[members[0]])
    for vertex in members[1:]:
        common &= neighbours[vertex]
    return common | set(members)


def generate_kcs(spec: KcsSpec, seed: int) -> GeneratedWorkload:
    """Returns adjacency and clique vectors of a random graph with planted cliques, one query per clique, and
    oracle results computed from neighbour sets."""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((spec.vertices, spec.vertices)) < spec.edge_probability, 1)
    adjacency = upper | upper.T
    cliques = [np.sort(rng.choice(spec.vertices, size=spec.k, replace=False)) for _ in range(spec.cliques)]
    for members in cliques:
        adjacency[np.ix_(members, members)] = True
    np.fill_diagonal(adjacency, False)
    neighbours = [set(np.flatnonzero(row).tolist()) for row in adjacency]
    vectors = {}
    expected = {}
    queries = []
    for index, members in enumerate(cliques):
        for vertex in members:
            vectors.setdefault(f"adj_{vertex}", adjacency[vertex].copy())
        membership = np.zeros(spec.vertices, dtype=bool)
        membership[members] = True
        vectors[f"clique_{index}"] = membership
        star = np.zeros(spec.vertices, dtype=bool)
        star[sorted(clique_star_oracle(neighbours, members.tolist()))] = True
        expected[f"star_{index}"] = star
        queries.append(Query(f"star_{index}", _star(members.tolist(), index)))
    return GeneratedWorkload(vectors, queries, expected, spec.vertices)
