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
"""Randomised oracle-equivalence runs of the compiler and the sensing engine.

Every case draws a random expression and random operands, places and stores them as ESP pages on a small
device, compiles and executes the plan, and compares the result bit-for-bit with direct evaluation.
"""

__all__ = ["FUZZ_GEOMETRY", "FuzzReport", "random_expression", "fuzz_compiler"]

from dataclasses import dataclass, field
import logging
from typing import Sequence

import numpy as np

from flashcosmos.flash.device import FlashDevice
from flashcosmos.flash.geometry import ChipGeometry
from flashcosmos.planner.compiler import compile_plan
from flashcosmos.planner.executor import execute, store_operands
from flashcosmos.planner.expr import And, Expr, Nand, Nor, Not, Or, Var, Xnor, Xor, evaluate, variables
from flashcosmos.planner.placement import place
from flashcosmos.planner.plan import PlanStyle, plan_stats
from flashcosmos.reliability.rber import RberModel


FUZZ_GEOMETRY = ChipGeometry(
    channels=1,
    dies_per_channel=1,
    planes_per_die=2,
    blocks_per_plane=128,
    wordlines_per_block=48,
    page_bytes=4,
)

_NARY = (And, Or, Nand, Nor)
_BINARY = (Xor, Xnor)


@dataclass
class FuzzReport:
    """Outcome of a fuzzing run."""

    cases: int = 0
    mismatches: int = 0
    host_fallbacks: int = 0
    sensings: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def random_expression(
    rng: np.random.Generator, names: Sequence[str], max_depth: int = 3, max_arity: int = 4
) -> Expr:
    """Returns a random expression over ``names`` with at most ``max_depth`` operator levels."""
    if max_depth == 0 or rng.random() < 0.25:
        leaf: Expr = Var(str(rng.choice(names)))
        return Not(leaf) if rng.random() < 0.2 else leaf
    kind = rng.integers(0, 10)
    if kind < 6:
        operator = _NARY[kind % len(_NARY)]
        arity = int(rng.integers(2, max_arity + 1))
        return operator(tuple(random_expression(rng, names, max_depth - 1, max_arity) for _ in range(arity)))
    if kind < 9:
        operator = _BINARY[kind % len(_BINARY)]
        return operator(
            random_expression(rng, names, max_depth - 1, max_arity),
            random_expression(rng, names, max_depth - 1, max_arity),
        )
    return Not(random_expression(rng, names, max_depth - 1, max_arity))


def fuzz_compiler(
    cases: int,
    seed: int,
    geometry: ChipGeometry = FUZZ_GEOMETRY,
    max_variables: int = 64,
    max_depth: int = 3,
    style: PlanStyle = PlanStyle.FLASH_COSMOS,
    vector_bits: int | None = None,
) -> FuzzReport:
    """Runs ``cases`` random compile-and-execute checks.

    Args:
        cases: Number of random expressions.
        seed: Seed of the whole run.
        geometry: Device geometry (one page per plane by default holds a stripe).
        max_variables: Largest operand pool of one case.
        max_depth: Largest operator depth of one expression.
        style: Compilation style.
        vector_bits: Operand length (default: one page in every plane of one die).
    """
    rng = np.random.default_rng(seed)
    if vector_bits is None:
        vector_bits = geometry.planes_per_die * geometry.bitlines_per_block
    report = FuzzReport()
    for case in range(cases):
        pool = [f"v{index}" for index in range(int(rng.integers(1, max_variables + 1)))]
        expr = random_expression(rng, pool, max_depth)
        names = variables(expr)
        vectors = {name: rng.random(vector_bits) < 0.5 for name in names}
        placement = place(names, [expr], geometry, vector_bits)
        device = FlashDevice(geometry, rber_model=RberModel(), seed=seed + case)
        store_operands(device, placement, vectors)
        plan = compile_plan(expr, placement, style)
        result = execute(plan, device, placement)
        report.cases += 1
        report.sensings += plan_stats(plan).sensings
        report.host_fallbacks += int(plan.host_fallback)
        if not np.array_equal(result, evaluate(expr, vectors)):
            report.mismatches += 1
            report.failures.append(str(expr))
            logging.error(f"Case {case}: plan result differs from the oracle for '{expr}'")
    logging.info(
        f"{report.cases} cases, {report.mismatches} mismatches, {report.host_fallbacks} with host fallback"
    )
    return report
