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
"""Image-segmentation (IMS) workload: which pixels of a set of images belong to each color class.

A pixel belongs to a color class when its Y, U and V components each fall in the class's range. Per class and
component the device stores one bit-vector over all pixels; the query of a class is the AND of its three
vectors.
"""

__all__ = ["ImsSpec", "generate_ims", "ims_template", "color_ranges"]

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from flashcosmos.planner.expr import And, Var
from flashcosmos.workloads.base import GeneratedWorkload, Query, QueryTemplate


COMPONENTS = ("y", "u", "v")
DEFAULT_RANGES = (
    ((0, 127), (0, 127), (0, 127)),
    ((64, 191), (128, 255), (0, 127)),
    ((128, 255), (0, 127), (128, 255)),
    ((32, 223), (64, 191), (64, 191)),
)


@dataclass(frozen=True)
class ImsSpec:
    """Image-segmentation workload parameters."""

    images: int = 10_000
    width: int = 800
    height: int = 600
    colors: int = 4

    kind: ClassVar[str] = "ims"

    def __post_init__(self) -> None:
        if min(self.images, self.width, self.height, self.colors) < 1:
            raise ValueError("IMS sizes must be positive")

    @property
    def pixels(self) -> int:
        return self.images * self.width * self.height

    @property
    def result_bits(self) -> int:
        """Size of the segmentation result: one bit per pixel and color class."""
        return self.pixels * self.colors

    @property
    def param(self) -> int:
        return self.images


def color_ranges(colors: int) -> list[tuple[tuple[int, int], ...]]:
    """Returns the inclusive (Y, U, V) ranges of the first ``colors`` classes.

    Classes beyond the built-in four get ranges derived from their index.
    """
    ranges = list(DEFAULT_RANGES[:colors])
    rng = np.random.default_rng(colors)
    while len(ranges) < colors:
        lows = rng.integers(0, 128, size=3)
        ranges.append(tuple((int(low), int(low) + 127) for low in lows))
    return ranges


def _query(color: int) -> Query:
    return Query(f"color_{color}", And(tuple(Var(f"{component}_{color}") for component in COMPONENTS)))


def ims_template(spec: ImsSpec) -> QueryTemplate:
    return QueryTemplate(_query(0), repeats=spec.colors, vector_bits=spec.pixels)


def generate_ims(spec: ImsSpec, seed: int) -> GeneratedWorkload:
    """Returns per-class component vectors of random YUV images, one query per class and the oracle."""
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(spec.pixels, 3), dtype=np.uint8)
    vectors = {}
    expected = {}
    queries = []
    for color, bounds in enumerate(color_ranges(spec.colors)):
        for index, component in enumerate(COMPONENTS):
            low, high = bounds[index]
            vectors[f"{component}_{color}"] = (pixels[:, index] >= low) & (pixels[:, index] <= high)
        low_corner = np.array([low for low, _ in bounds])
        high_corner = np.array([high for _, high in bounds])
        expected[f"color_{color}"] = np.all((pixels >= low_corner) & (pixels <= high_corner), axis=1)
        queries.append(_query(color))
    return GeneratedWorkload(vectors, queries, expected, spec.pixels)
