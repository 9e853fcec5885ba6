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
"""Experiment results API utils.

This module stores the CSV rows of workload comparisons in a results database and reads them back through a
main ``ResultStore`` class, given a results ORM compatible database session.

Typical usage example::

    from ensembl.utils.database import DBConnection
    from flashcosmos.results.api.utils import ResultStore
    from flashcosmos.results.models import Base

    dbc = DBConnection("sqlite:///results.db")
    dbc.create_all_tables(Base.metadata)
    with dbc.session_scope() as session:
        run = ResultStore.record_run(session, mode="estimate")
        ResultStore.add_results(session, run, rows)
        fc_vs_osp = ResultStore.speedups(session, run.run_id, "FC", "OSP")

"""

__all__ = ["ResultStore"]

import json
import logging
from typing import Any, Iterable, Mapping

from sqlalchemy.orm import Session
from sqlalchemy.orm.exc import NoResultFound

from flashcosmos.results.models import ExperimentRun, RunResult
from flashcosmos.timing.timeline import CSV_SCHEMA_VERSION


_FLOAT_COLUMNS = (
    "latency_us",
    "energy_uJ",
    "die_busy_us",
    "channel_busy_us",
    "external_busy_us",
    "flash_uJ",
    "channel_uJ",
    "external_uJ",
    "dram_uJ",
    "host_uJ",
    "accelerator_uJ",
)


class ResultStore:
    """Records and queries experiment runs over the results ORM."""

    @classmethod
    def record_run(
        cls, session: Session, mode: str, seed: int | None = None, config: Mapping[str, Any] | None = None
    ) -> ExperimentRun:
        """Creates and returns a new experiment run.

        Args:
            mode: ``estimate`` for analytic runs, ``functional`` for oracle-checked ones.
            seed: Seed of a functional run.
            config: Configuration the run used, stored as JSON.
        """
        run = ExperimentRun(
            mode=mode,
            seed=seed,
            schema_version=CSV_SCHEMA_VERSION,
            config=json.dumps(config, sort_keys=True, default=str) if config is not None else None,
        )
        session.add(run)
        session.flush()
        return run

    @classmethod
    def add_results(cls, session: Session, run: ExperimentRun, rows: Iterable[Mapping[str, Any]]) -> int:
        """Attaches CSV result rows to ``run`` and returns how many were added.

        Raises:
            ValueError: if a row was written with another CSV schema version.
        """
        added = 0
        for row in rows:
            version = int(row.get("schema_version", CSV_SCHEMA_VERSION))
            if version != CSV_SCHEMA_VERSION:
                raise ValueError(f"Row has schema version {version}, expected {CSV_SCHEMA_VERSION}")
            correct = row.get("correct", "")
            result = RunResult(
                workload=str(row["workload"]),
                param=int(row["param"]),
                system=str(row["system"]),
                correct=None if correct in ("", None) else bool(int(correct)),
                **{column.lower(): float(row.get(column, 0.0)) for column in _FLOAT_COLUMNS},
            )
            run.results.append(result)
            added += 1
        session.flush()
        logging.debug(f"Stored {added} result(s) in run {run.run_id}")
        return added

    @classmethod
    def fetch_run(cls, session: Session, run_id: int) -> ExperimentRun:
        """Returns the experiment run ``run_id``.

        Raises:
            sqlalchemy.orm.exc.NoResultFound: if ``run_id`` does not exist
        """
        run = session.query(ExperimentRun).filter(ExperimentRun.run_id == run_id).first()
        if not run:
            raise NoResultFound()
        return run

    @classmethod
    def fetch_results(
        cls, session: Session, run_id: int, workload: str | None = None, system: str | None = None
    ) -> list[RunResult]:
        """Returns the results of run ``run_id``, optionally restricted to one workload and/or system.

        Raises:
            sqlalchemy.orm.exc.NoResultFound: if nothing matches
        """
        query = session.query(RunResult).filter(RunResult.run_id == run_id)
        if workload is not None:
            query = query.filter(RunResult.workload == workload)
        if system is not None:
            query = query.filter(RunResult.system == system)
        results = query.order_by(RunResult.workload, RunResult.param, RunResult.system).all()
        if not results:
            raise NoResultFound()
        return results

    @classmethod
    def speedups(
        cls, session: Session, run_id: int, system: str, baseline: str
    ) -> dict[tuple[str, int], float]:
        """Returns the speedup of ``system`` over ``baseline`` for every workload point of run ``run_id``.

        Raises:
            sqlalchemy.orm.exc.NoResultFound: if the run holds no point measured under both systems
        """
        latency = {
            (result.workload, result.param, result.system): result.latency_us
            for result in cls.fetch_results(session, run_id)
        }
        speedups = {
            (workload, param): latency[(workload, param, baseline)] / value
            for (workload, param, name), value in latency.items()
            if name == system and (workload, param, baseline) in latency and value > 0
        }
        if not speedups:
            raise NoResultFound()
        return speedups
