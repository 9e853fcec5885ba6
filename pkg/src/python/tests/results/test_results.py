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
"""Unit testing of :mod:`flashcosmos.results` package.

Typical usage example::

    $ pytest test_results.py

"""

import json
from typing import Any, ContextManager

import pytest
from pytest import raises
from sqlalchemy.orm.exc import NoResultFound

from ensembl.utils.database import DBConnection
from flashcosmos.results.api.utils import ResultStore
from flashcosmos.results.models import Base, ExperimentRun
from flashcosmos.timing.timeline import CSV_SCHEMA_VERSION


def _row(workload: str, param: int, system: str, latency_us: float, correct: Any = "") -> dict[str, Any]:
    return {
        "schema_version": CSV_SCHEMA_VERSION,
        "workload": workload,
        "param": param,
        "system": system,
        "latency_us": latency_us,
        "energy_uJ": latency_us / 10,
        "flash_uJ": 1.5,
        "correct": correct,
    }


ROWS = [
    _row("bmi", 36, "OSP", 13_778_000.0),
    _row("bmi", 36, "FC", 56_963.0),
    _row("bmi", 1, "OSP", 377_500.0),
    _row("bmi", 1, "FC", 12_850.0),
    _row("kcs", 8, "OSP", 9_000.0),
    _row("kcs", 8, "PB", 1_600.0),
]


class TestResultStore:
    """Tests :class:`~flashcosmos.results.api.utils.ResultStore`"""

    dbc: DBConnection = None
    run_id: int = 0

    @pytest.fixture(scope="class", autouse=True)
    def setup(self, tmp_path_factory: pytest.TempPathFactory) -> None:
        """Creates a SQLite results database holding one estimate run.

        Args:
            tmp_path_factory: Session-scoped temporary directory factory (fixture).
        """
        db_path = tmp_path_factory.mktemp("results") / "results.db"
        dbc = DBConnection(f"sqlite:///{db_path}", reflect=False)
        dbc.create_all_tables(Base.metadata)
        with dbc.session_scope() as session:
            run = ResultStore.record_run(session, "estimate", config={"max_mws_blocks": 4})
            assert ResultStore.add_results(session, run, ROWS) == len(ROWS)
            type(self).run_id = run.run_id
        type(self).dbc = dbc

    def test_fetch_run(self) -> None:
        """Tests that the run keeps its mode, schema version, configuration and results."""
        with self.dbc.session_scope() as session:
            run = ResultStore.fetch_run(session, self.run_id)
            assert isinstance(run, ExperimentRun)
            assert (run.mode, run.seed, run.schema_version) == ("estimate", None, CSV_SCHEMA_VERSION)
            assert json.loads(run.config) == {"max_mws_blocks": 4}
            assert len(run.results) == len(ROWS)
            with raises(NoResultFound):
                ResultStore.fetch_run(session, self.run_id + 1)

    @pytest.mark.parametrize(
        "workload, system, expectation",
        [
            (
                None,
                None,
                [
                    ("bmi", 1, "FC"),
                    ("bmi", 1, "OSP"),
                    ("bmi", 36, "FC"),
                    ("bmi", 36, "OSP"),
                    ("kcs", 8, "OSP"),
                    ("kcs", 8, "PB"),
                ],
            ),
            ("bmi", "FC", [("bmi", 1, "FC"), ("bmi", 36, "FC")]),
            ("kcs", None, [("kcs", 8, "OSP"), ("kcs", 8, "PB")]),
            ("ims", None, raises(NoResultFound)),
            ("kcs", "ISP", raises(NoResultFound)),
        ],
    )
    def test_fetch_results(
        self, workload: str | None, system: str | None, expectation: list | ContextManager
    ) -> None:
        """Tests fetching the results of a run, optionally filtered.

        Args:
            workload: Workload filter.
            system: System filter.
            expectation: Expected ``(workload, param, system)`` keys, in order, or the expected exception.
        """
        with self.dbc.session_scope() as session:
            if isinstance(expectation, list):
                results = ResultStore.fetch_results(session, self.run_id, workload, system)
                assert [(result.workload, result.param, result.system) for result in results] == expectation
            else:
                with expectation:
                    ResultStore.fetch_results(session, self.run_id, workload, system)

    def test_stored_values(self) -> None:
        """Tests the column mapping of a stored row."""
        with self.dbc.session_scope() as session:
            (result,) = ResultStore.fetch_results(session, self.run_id, "kcs", "PB")
            assert result.latency_us == pytest.approx(1_600.0)
            assert result.energy_uj == pytest.approx(160.0)
            assert result.flash_uj == pytest.approx(1.5)
            assert result.dram_uj == 0.0
            assert result.correct is None

    def test_speedups(self) -> None:
        """Tests speedups computed from stored latencies."""
        with self.dbc.session_scope() as session:
            speedups = ResultStore.speedups(session, self.run_id, "FC", "OSP")
            assert set(speedups) == {("bmi", 1), ("bmi", 36)}
            assert speedups[("bmi", 36)] == pytest.approx(13_778_000.0 / 56_963.0)
            with raises(NoResultFound):
                ResultStore.speedups(session, self.run_id, "FC", "ISP")

    def test_functional_run(self) -> None:
        """Tests recording a seeded run with correctness flags."""
        with self.dbc.session_scope() as session:
            run = ResultStore.record_run(session, "functional", seed=7)
            ResultStore.add_results(session, run, [_row("ims", 2, "FC", 800.0, correct=1)])
            (result,) = ResultStore.fetch_results(session, run.run_id)
            assert result.correct is True
            assert run.seed == 7

    def test_schema_mismatch(self) -> None:
        """Tests that rows written with another CSV schema are rejected."""
        with self.dbc.session_scope() as session:
            run = ResultStore.record_run(session, "estimate")
            with raises(ValueError):
                ResultStore.add_results(session, run, [{**ROWS[0], "schema_version": CSV_SCHEMA_VERSION + 1}])
