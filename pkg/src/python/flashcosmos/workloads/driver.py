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
"""Workload drivers: functional runs against the oracle, analytic estimates and system comparisons.

A functional run generates a desk-scale instance, stores its operands as ESP pages on a simulated device,
computes every query the way the system under test would (compiled plans for PB and FC, regular page reads
and host evaluation for OSP and ISP) and checks the result against the oracle. Its timing comes from the
pipeline model fed with the costs of the plans that actually ran. An estimate skips the functional part and
models a workload of any size from the shape of its queries.

Typical usage example::

    from flashcosmos.config import ExperimentConfig
    from flashcosmos.timing import SystemModel
    from flashcosmos.workloads import BmiSpec, compare, speedup

    results = compare(BmiSpec(months=36), ExperimentConfig())
    print(speedup(results, SystemModel.FC, SystemModel.OSP))

"""

__all__ = [
    "WorkloadSpec",
    "WorkloadResult",
    "SWEEP_FIELDS",
    "make_spec",
    "sweep",
    "specs_from_config",
    "generate",
    "template",
    "query_profile",
    "estimate",
    "run",
    "compare",
    "speedup",
    "energy_ratio",
    "geometric_mean",
    "mean_speedup",
    "mean_energy_ratio",
]

from dataclasses import dataclass, replace
import logging
from typing import Any, Callable, Mapping, Sequence, Union

import numpy as np

from flashcosmos.config import ExperimentConfig, WorkloadConfig
from flashcosmos.errors import ConfigError, OracleMismatch
from flashcosmos.flash.device import FlashDevice
from flashcosmos.planner.compiler import compile_plan
from flashcosmos.planner.executor import execute, host_read, store_operands
from flashcosmos.planner.expr import Expr
from flashcosmos.planner.placement import Placement, place
from flashcosmos.planner.plan import Plan, PlanStyle, in_flash_cost
from flashcosmos.timing.timeline import (
    InFlashCost,
    QueryProfile,
    SystemModel,
    TimelineResult,
    result_row,
    simulate_timeline,
)
from flashcosmos.workloads.base import GeneratedWorkload, QueryTemplate
from flashcosmos.workloads.bmi import BmiSpec, bmi_template, generate_bmi
from flashcosmos.workloads.ims import ImsSpec, generate_ims, ims_template
from flashcosmos.workloads.kcs import KcsSpec, generate_kcs, kcs_template


WorkloadSpec = Union[BmiSpec, ImsSpec, KcsSpec]

_SPEC_TYPES: dict[str, type] = {"bmi": BmiSpec, "ims": ImsSpec, "kcs": KcsSpec}
SWEEP_FIELDS = {"bmi": "months", "ims": "images", "kcs": "k"}
_TARGET_SWEEPS = {"bmi": (1, 12, 36), "ims": (10_000, 50_000, 100_000, 200_000), "kcs": (8, 16, 32, 64)}
_DESK_SWEEPS = {"bmi": (1, 12, 36), "ims": (1, 2, 4, 8), "kcs": (8, 16, 32, 64)}
_DESK_PARAMS: dict[str, dict[str, Any]] = {
    "bmi": {"users": 32_768},
    "ims": {"width": 80, "height": 60},
    "kcs": {"vertices": 4096, "cliques": 8},
}
_STYLES = {SystemModel.PB: PlanStyle.PARABIT, SystemModel.FC: PlanStyle.FLASH_COSMOS}


@dataclass(frozen=True)
class WorkloadResult:
    """Outcome of one workload point under one system.

    Attributes:
        kind: Workload kind (``bmi``, ``ims`` or ``kcs``).
        param: Value of the workload's swept parameter.
        system: System the point was evaluated under.
        timeline: Latency, stage occupancy and energy.
        correct: Whether every result matched the oracle; ``None`` for analytic estimates.
    """

    kind: str
    param: int
    system: SystemModel
    timeline: TimelineResult
    correct: bool | None = None

    def row(self) -> dict[str, Any]:
        """Returns the CSV row of this result."""
        return result_row(self.kind, self.param, self.timeline, self.correct)


def make_spec(kind: str, **params: Any) -> WorkloadSpec:
    """Returns the spec of workload ``kind`` built from ``params``.

    Raises:
        ConfigError: if ``kind`` is unknown or ``params`` are not valid for it.
    """
    try:
        spec_type = _SPEC_TYPES[kind]
    except KeyError as exc:
        raise ConfigError(f"Unknown workload kind '{kind}'") from exc
    try:
        return spec_type(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid {kind} parameters {params}: {exc}") from exc


def sweep(kind: str, desk: bool = False) -> list[WorkloadSpec]:
    """Returns the default sweep points of workload ``kind``.

    Args:
        kind: Workload kind.
        desk: Return points small enough for a functional run instead of the full-size evaluation points.
    """
    if kind not in _SPEC_TYPES:
        raise ConfigError(f"Unknown workload kind '{kind}'")
    values = _DESK_SWEEPS[kind] if desk else _TARGET_SWEEPS[kind]
    base = _DESK_PARAMS[kind] if desk else {}
    return [make_spec(kind, **{**base, SWEEP_FIELDS[kind]: value}) for value in values]


def specs_from_config(entry: WorkloadConfig) -> list[WorkloadSpec]:
    """Returns the workload points of a configuration entry, one per sweep value."""
    if entry.sweep is None:
        return [make_spec(entry.kind, **entry.params)]
    field_name = SWEEP_FIELDS[entry.kind]
    return [make_spec(entry.kind, **{**entry.params, field_name: value}) for value in entry.sweep]


def generate(spec: WorkloadSpec, seed: int) -> GeneratedWorkload:
    """Returns a random instance of ``spec`` with its oracle results."""
    if isinstance(spec, BmiSpec):
        return generate_bmi(spec, seed)
    if isinstance(spec, ImsSpec):
        return generate_ims(spec, seed)
    return generate_kcs(spec, seed)


def template(spec: WorkloadSpec) -> QueryTemplate:
    """Returns the query shape of ``spec``."""
    if isinstance(spec, BmiSpec):
        return bmi_template(spec)
    if isinstance(spec, ImsSpec):
        return ims_template(spec)
    return kcs_template(spec)


def _plan_cost(
    expr: Expr, placement: Placement, system: SystemModel, config: ExperimentConfig
) -> tuple[InFlashCost, Plan]:
    plan = compile_plan(expr, placement, _STYLES[system], config.max_mws_blocks, config.host_fallback)
    return in_flash_cost(plan, config.timing, config.power), plan


def query_profile(spec: WorkloadSpec, config: ExperimentConfig) -> QueryProfile:
    """Returns the analytic profile of ``spec`` on the target geometry.

    Plans are compiled for one page-sized stripe: their shape depends on the placement of the operands, not
    on the length of the vectors.

    Raises:
        CapacityExceeded: if the operands of one query do not fit in a plane of the target geometry.
    """
    shape = template(spec)
    placement = place(shape.query.operands, [shape.query.expr], config.target_geometry)
    pb_cost, _ = _plan_cost(shape.query.expr, placement, SystemModel.PB, config)
    fc_cost, _ = _plan_cost(shape.query.expr, placement, SystemModel.FC, config)
    return QueryProfile(
        operands=len(shape.query.operands),
        vector_bits=shape.vector_bits,
        repeats=shape.repeats,
        pb=pb_cost,
        fc=fc_cost,
    )


def estimate(
    spec: WorkloadSpec, system: SystemModel, config: ExperimentConfig, profile: QueryProfile | None = None
) -> WorkloadResult:
    """Returns the modelled latency and energy of ``spec`` under ``system`` on the target geometry.

    Args:
        spec: Workload point.
        system: System to model.
        config: Timing, power and geometry parameters.
        profile: Precomputed :func:`query_profile` of ``spec``.
    """
    if profile is None:
        profile = query_profile(spec, config)
    timeline = simulate_timeline(profile, system, config.target_geometry, config.timing, config.power)
    return WorkloadResult(spec.kind, spec.param, system, timeline)


def _mean_cost(costs: Sequence[InFlashCost]) -> InFlashCost:
    if not costs:
        return InFlashCost()
    return InFlashCost(
        sensing_us=float(np.mean([cost.sensing_us for cost in costs])),
        sensing_energy_j=float(np.mean([cost.sensing_energy_j for cost in costs])),
        readouts=int(np.ceil(np.mean([cost.readouts for cost in costs]))),
    )


def _check(name: str, result: np.ndarray, workload: GeneratedWorkload, bitcount: bool) -> None:
    expected = workload.expected[name]
    if not np.array_equal(result, expected):
        differing = int(np.count_nonzero(result != expected))
        raise OracleMismatch(
            f"Query '{name}': {differing} of {len(expected)} result bits differ from the oracle"
        )
    if bitcount and int(np.count_nonzero(result)) != workload.counts[name]:
        raise OracleMismatch(f"Query '{name}': bit count differs from the oracle ({workload.counts[name]})")


def run(spec: WorkloadSpec, system: SystemModel, config: ExperimentConfig, seed: int) -> WorkloadResult:
    """Runs ``spec`` functionally under ``system`` and checks every result against the oracle.

    Operands are stored as ESP pages on a device of ``config.geometry``. The reported timing is the pipeline
    model on ``config.target_geometry`` for the generated vector length, using the mean cost of the plans
    that ran.

    Raises:
        OracleMismatch: if any result differs from its oracle.
        CapacityExceeded: if the instance does not fit in the functional geometry.
    """
    workload = generate(spec, seed)
    hints = [query.expr for query in workload.queries]
    placement = place(list(workload.vectors), hints, config.geometry, workload.vector_bits)
    device = FlashDevice(
        config.geometry,
        rber_model=config.reliability,
        seed=seed,
        timing=config.timing,
        max_mws_blocks=config.max_mws_blocks,
        pe_cycles=config.pe_cycles,
        retention_days=config.retention_days,
    )
    store_operands(device, placement, workload.vectors)
    costs = []
    for query in workload.queries:
        if system.in_flash:
            cost, plan = _plan_cost(query.expr, placement, system, config)
            result = execute(plan, device, placement)
            costs.append(cost)
        else:
            result = host_read(query.expr, device, placement)
        _check(query.name, result, workload, query.bitcount)
    logging.info(f"{spec.kind} {spec.param} under {system.name}: {len(workload.queries)} queries match")
    cost = _mean_cost(costs)
    operands = round(float(np.mean([len(query.operands) for query in workload.queries])))
    profile = QueryProfile(operands, workload.vector_bits, len(workload.queries))
    if system.in_flash:
        profile = replace(profile, **{system.value: cost})
    timeline = simulate_timeline(profile, system, config.target_geometry, config.timing, config.power)
    return WorkloadResult(spec.kind, spec.param, system, timeline, correct=True)


def compare(
    spec: WorkloadSpec, config: ExperimentConfig, seed: int | None = None
) -> dict[SystemModel, WorkloadResult]:
    """Evaluates ``spec`` under every system.

    Args:
        spec: Workload point.
        config: Experiment configuration.
        seed: Run functionally with this seed; ``None`` returns analytic estimates.
    """
    if seed is not None:
        return {system: run(spec, system, config, seed) for system in SystemModel}
    profile = query_profile(spec, config)
    return {system: estimate(spec, system, config, profile) for system in SystemModel}


def speedup(
    results: Mapping[SystemModel, WorkloadResult], system: SystemModel, baseline: SystemModel
) -> float:
    """Returns how many times faster ``system`` is than ``baseline``."""
    return results[baseline].timeline.latency_us / results[system].timeline.latency_us


def energy_ratio(
    results: Mapping[SystemModel, WorkloadResult], system: SystemModel, baseline: SystemModel
) -> float:
    """Returns how many times less energy ``system`` uses than ``baseline``."""
    return results[baseline].timeline.energy.total_j / results[system].timeline.energy.total_j


def geometric_mean(values: Sequence[float]) -> float:
    """Returns the geometric mean of ``values``.

    Raises:
        ValueError: if ``values`` is empty or holds a non-positive value.
    """
    array = np.asarray(values, dtype=float)
    if array.size == 0 or np.any(array <= 0):
        raise ValueError("The geometric mean needs at least one value, all of them positive")
    return float(np.exp(np.mean(np.log(array))))


def _mean_over_kinds(
    points: Mapping[str, Sequence[Mapping[SystemModel, WorkloadResult]]],
    metric: Callable[[Mapping[SystemModel, WorkloadResult], SystemModel, SystemModel], float],
    system: SystemModel,
    baseline: SystemModel,
) -> float:
    per_kind = [
        geometric_mean([metric(results, system, baseline) for results in sweep_points])
        for sweep_points in points.values()
    ]
    return geometric_mean(per_kind)


def mean_speedup(
    points: Mapping[str, Sequence[Mapping[SystemModel, WorkloadResult]]],
    system: SystemModel,
    baseline: SystemModel,
) -> float:
    """Returns the geometric mean over workloads of the per-workload geometric-mean speedups.

    Args:
        points: Results of every sweep point, keyed by workload kind.
        system: System whose speedup is measured.
        baseline: Reference system.
    """
    return _mean_over_kinds(points, speedup, system, baseline)


def mean_energy_ratio(
    points: Mapping[str, Sequence[Mapping[SystemModel, WorkloadResult]]],
    system: SystemModel,
    baseline: SystemModel,
) -> float:
    """Returns the geometric mean over workloads of the per-workload geometric-mean energy savings."""
    return _mean_over_kinds(points, energy_ratio, system, baseline)
