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
"""Experiment results ORM."""
# Ignore some pylint and mypy checks due to the nature of SQLAlchemy ORMs
# pylint: disable=missing-class-docstring
# mypy: disable-error-code="misc, valid-type"

from sqlalchemy import (
    Boolean,
    Column,
    DateTime,
    Float,
    ForeignKey,
    Integer,
    String,
    Text,
    func,
)
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class ExperimentRun(Base):
    __tablename__ = "experiment_run"

    run_id = Column(Integer, primary_key=True, autoincrement=True)
    created = Column(DateTime, nullable=False, server_default=func.now())
    mode = Column(String(16), nullable=False)
    seed = Column(Integer)
    schema_version = Column(Integer, nullable=False)
    config = Column(Text)

    results = relationship("RunResult", back_populates="run", cascade="all, delete-orphan")


class RunResult(Base):
    __tablename__ = "run_result"

    result_id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("experiment_run.run_id"), nullable=False, index=True)
    workload = Column(String(8), nullable=False, index=True)
    param = Column(Integer, nullable=False)
    system = Column(String(4), nullable=False, index=True)
    latency_us = Column(Float, nullable=False)
    energy_uj = Column(Float, nullable=False)
    die_busy_us = Column(Float, nullable=False, default=0.0)
    channel_busy_us = Column(Float, nullable=False, default=0.0)
    external_busy_us = Column(Float, nullable=False, default=0.0)
    flash_uj = Column(Float, nullable=False, default=0.0)
    channel_uj = Column(Float, nullable=False, default=0.0)
    external_uj = Column(Float, nullable=False, default=0.0)
    dram_uj = Column(Float, nullable=False, default=0.0)
    host_uj = Column(Float, nullable=False, default=0.0)
    accelerator_uj = Column(Float, nullable=False, default=0.0)
    correct = Column(Boolean)

    run = relationship("ExperimentRun", back_populates="results")
