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
"""Flash-Cosmos simulator command line interface.

Sub-commands:
    characterize: sample the latency, power, RBER and write-bandwidth curves of the device model as CSV.
    plan: compile the expressions of a file and print the plans, their encoded frames and statistics.
    run: compare OSP, ISP, PB and FC on the configured workloads, analytically or functionally with --seed.
    verify: randomised oracle-equivalence run of the compiler and the sensing engine.

Exit status is 0 on success, 1 when a result differs from its oracle and 2 on usage or input errors.
"""

__all__ = ["main", "read_expressions", "EXIT_OK", "EXIT_ORACLE", "EXIT_USAGE"]

from argparse import Namespace
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import asdict
from itertools import repeat
import json
import logging
from os import PathLike
from pathlib import Path
import sys
from typing import Any, Iterable, Sequence

from ensembl.utils.argparse import ArgumentParser
from ensembl.utils.database import DBConnection
from ensembl.utils.logging import init_logging_with_args

from flashcosmos.characterization import CHARACTERIZATION_COLUMNS, characterization_rows
from flashcosmos.config import ExperimentConfig, load_config
from flashcosmos.errors import ExpressionSyntaxError, FlashCosmosError, OracleMismatch
from flashcosmos.planner import (
    FUZZ_GEOMETRY,
    Expr,
    PlanStyle,
    compile_plan,
    fuzz_compiler,
    parse_expression,
    place,
    plan_stats,
    variables,
)
from flashcosmos.results.api.utils import ResultStore
from flashcosmos.results.models import Base
from flashcosmos.timing import CSV_COLUMNS, SystemModel
from flashcosmos.workloads import (
    WorkloadResult,
    compare,
    mean_energy_ratio,
    mean_speedup,
    specs_from_config,
    sweep,
)


EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_USAGE = 2

_KINDS = ("bmi", "ims", "kcs")


def read_expressions(path: PathLike | str) -> list[Expr]:
    """Returns the expressions of ``path``, one per non-empty line; ``#`` starts a comment.

    Raises:
        ExpressionSyntaxError: if a line is not a valid expression or the file holds none.
    """
    expressions = []
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            expressions.append(parse_expression(text))
        except ExpressionSyntaxError as exc:
            raise ExpressionSyntaxError(f"{path}:{number}: {exc}") from exc
    if not expressions:
        raise ExpressionSyntaxError(f"No expression found in '{path}'")
    return expressions


def _write_rows(rows: Iterable[dict[str, Any]], columns: Sequence[str], out: Path | None) -> None:
    if out is None:
        writer = csv.DictWriter(sys.stdout, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
        return
    with out.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    logging.info(f"Results written to '{out}'")


def cmd_characterize(args: Namespace, config: ExperimentConfig) -> int:
    """Writes the characterization curves of the configured device model."""
    _write_rows(characterization_rows(config), CHARACTERIZATION_COLUMNS, args.out)
    return EXIT_OK


def cmd_plan(args: Namespace, config: ExperimentConfig) -> int:
    """Prints the plan of every expression of ``args.expressions``; ``--out`` stores the frame stream and a
    JSON sidecar next to it."""
    expressions = read_expressions(args.expressions)
    names = list(dict.fromkeys(name for expr in expressions for name in variables(expr)))
    placement = place(names, expressions, config.geometry)
    style = PlanStyle(args.policy)
    plans = [
        compile_plan(expr, placement, style, config.max_mws_blocks, config.host_fallback)
        for expr in expressions
    ]
    for plan in plans:
        print(f"# {plan.expression}")
        for line in plan.describe():
            print(line)
        print(f"frames: {plan.to_bytes().hex()}")
        print(f"stats: {json.dumps(plan_stats(plan).as_dict(), sort_keys=True)}")
    if args.out is not None:
        args.out.write_bytes(b"".join(plan.to_bytes() for plan in plans))
        sidecar = args.out.with_name(args.out.name + ".json")
        sidecar.write_text(
            json.dumps(
                {"placement": placement.to_dict(), "plans": [plan.to_json_dict() for plan in plans]}, indent=2
            )
        )
        logging.info(f"Frame stream written to '{args.out}', plan metadata to '{sidecar}'")
    return EXIT_OK


def _summarise(outcomes: Sequence[dict[SystemModel, WorkloadResult]]) -> None:
    points: dict[str, list[dict[SystemModel, WorkloadResult]]] = {}
    for outcome in outcomes:
        points.setdefault(outcome[SystemModel.FC].kind, []).append(outcome)
    if not points:
        return
    for baseline in (SystemModel.OSP, SystemModel.ISP, SystemModel.PB):
        value = mean_speedup(points, SystemModel.FC, baseline)
        saving = mean_energy_ratio(points, SystemModel.FC, baseline)
        logging.info(f"Mean FC speedup over {baseline.name}: {value:.2f}x, energy saving: {saving:.2f}x")


def _store(db_url: Any, rows: list[dict[str, Any]], config: ExperimentConfig, seed: int | None) -> None:
    dbc = DBConnection(db_url, reflect=False)
    dbc.create_all_tables(Base.metadata)
    with dbc.session_scope() as session:
        run = ResultStore.record_run(
            session, "estimate" if seed is None else "functional", seed, config=asdict(config)
        )
        ResultStore.add_results(session, run, rows)
        logging.info(f"Stored {len(rows)} result(s) as run {run.run_id}")


def cmd_run(args: Namespace, config: ExperimentConfig) -> int:
    """Compares every system on the workload points of the configuration (or the default sweeps).

    Without ``--seed`` the points are estimated analytically at target scale; with it every point runs
    functionally at desk scale and every result is checked against its oracle.
    """
    kinds = set(args.workload or _KINDS)
    if config.workloads:
        entries = [entry for entry in config.workloads if entry.kind in kinds]
        specs = [spec for entry in entries for spec in specs_from_config(entry)]
    else:
        specs = [spec for kind in _KINDS if kind in kinds for spec in sweep(kind, desk=args.seed is not None)]
    logging.info(f"Running {len(specs)} workload point(s) with {args.jobs} job(s)")
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(compare, specs, repeat(config), repeat(args.seed)))
    else:
        outcomes = [compare(spec, config, args.seed) for spec in specs]
    rows = [result.row() for outcome in outcomes for result in outcome.values()]
    _write_rows(rows, CSV_COLUMNS, args.out)
    _summarise(outcomes)
    if args.db_url is not None:
        _store(args.db_url, rows, config, args.seed)
    return EXIT_OK


def cmd_verify(args: Namespace, config: ExperimentConfig) -> int:
    """Fuzzes the compiler against the oracle; fails if any case differs."""
    geometry = FUZZ_GEOMETRY if args.scale == "toy" else config.geometry
    report = fuzz_compiler(args.cases, args.seed, geometry, style=PlanStyle(args.policy))
    status = "PASS" if report.passed else "FAIL"
    print(
        f"{status}: {report.cases} cases, {report.mismatches} mismatches, "
        f"{report.host_fallbacks} host fallbacks, {report.sensings} sensings"
    )
    for failure in report.failures:
        print(f"mismatch: {failure}")
    if args.out is not None:
        args.out.write_text(json.dumps({"passed": report.passed, **asdict(report)}, indent=2))
    return EXIT_OK if report.passed else EXIT_ORACLE


_COMMANDS = {
    "characterize": cmd_characterize,
    "plan": cmd_plan,
    "run": cmd_run,
    "verify": cmd_verify,
}


def _add_common_arguments(parser: ArgumentParser, out_help: str) -> None:
    parser.add_argument_src_path("--config", help="JSON experiment configuration (default: built-in values)")
    parser.add_argument_dst_path("--out", help=out_help)
    parser.add_log_arguments(add_log_file=True)


def _parser() -> ArgumentParser:
    parser = ArgumentParser(description=__doc__)
    subparsers = parser.add_subparsers(dest="command", required=True)

    characterize = subparsers.add_parser("characterize", help="Sample the device model curves")
    _add_common_arguments(characterize, "CSV output file (default: standard output)")

    plan = subparsers.add_parser("plan", help="Compile expressions into command plans")
    plan.add_argument_src_path("expressions", help="File with one expression per line")
    plan.add_argument(
        "--policy", choices=[style.value for style in PlanStyle], default=PlanStyle.FLASH_COSMOS.value
    )
    _add_common_arguments(plan, "Binary frame stream output; a JSON sidecar is written next to it")

    run = subparsers.add_parser("run", help="Compare OSP, ISP, PB and FC on workloads")
    run.add_numeric_argument(
        "--seed", type=int, min_value=0, max_value=2**64 - 1, help="Run functionally at desk scale"
    )
    run.add_numeric_argument(
        "--jobs", type=int, min_value=1, default=1, help="Number of workload points run in parallel"
    )
    run.add_argument("--workload", choices=_KINDS, action="append", help="Restrict to this workload kind")
    run.add_argument_url("--db-url", help="Also store the results in this database")
    _add_common_arguments(run, "CSV output file (default: standard output)")

    verify = subparsers.add_parser("verify", help="Fuzz the compiler against the oracle")
    verify.add_numeric_argument("--seed", type=int, min_value=0, max_value=2**64 - 1, required=True)
    verify.add_numeric_argument("--cases", type=int, min_value=1, default=200, help="Number of random cases")
    verify.add_argument(
        "--scale", choices=["toy", "desk"], default="toy", help="Fuzz geometry (toy or desk)"
    )
    verify.add_argument(
        "--policy", choices=[style.value for style in PlanStyle], default=PlanStyle.FLASH_COSMOS.value
    )
    _add_common_arguments(verify, "JSON report output")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main script entry-point."""
    args = _parser().parse_args(argv)
    init_logging_with_args(args)
    try:
        config = load_config(args.config)
        return _COMMANDS[args.command](args, config)
    except OracleMismatch as exc:
        logging.error(f"Oracle check failed: {exc}")
        return EXIT_ORACLE
    except FlashCosmosError as exc:
        logging.error(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
