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
"""Unit testing of :mod:`flashcosmos.config` module.

Typical usage example::

    $ pytest test_config.py

"""

from contextlib import nullcontext as does_not_raise
import json
from pathlib import Path
from typing import Any, ContextManager

import pytest
from pytest import raises

from flashcosmos.config import DESK_GEOMETRY, ExperimentConfig, WorkloadConfig, load_config
from flashcosmos.errors import ConfigError
from flashcosmos.flash.geometry import ChipGeometry
from flashcosmos.timing.params import TimingParams


class TestExperimentConfig:
    """Tests :class:`~flashcosmos.config.ExperimentConfig`"""

    def test_defaults(self) -> None:
        """Tests that an empty document keeps every default."""
        config = ExperimentConfig.from_dict({})
        assert config == ExperimentConfig()
        assert config.geometry == DESK_GEOMETRY
        assert config.target_geometry == ChipGeometry()
        assert config.workloads == ()
        assert load_config(None) == config

    def test_sections(self) -> None:
        """Tests partial sections, list-to-tuple conversion and workload entries."""
        config = ExperimentConfig.from_dict(
            {
                "timing": {"tr_slc_us": 20.0, "intra_anchors": [[1, 1.0], [48, 1.05]]},
                "geometry": {"channels": 1, "dies_per_channel": 1, "page_bytes": 64},
                "workloads": [{"kind": "kcs", "params": {"vertices": 512, "cliques": 2}, "sweep": [8, 16]}],
                "max_mws_blocks": 2,
                "host_fallback": False,
                "pe_cycles": 1000,
                "retention_days": 30,
            }
        )
        assert config.timing == TimingParams(tr_slc_us=20.0, intra_anchors=((1, 1.0), (48, 1.05)))
        assert config.geometry == ChipGeometry(channels=1, dies_per_channel=1, page_bytes=64)
        assert config.workloads == (WorkloadConfig("kcs", {"vertices": 512, "cliques": 2}, (8, 16)),)
        assert config.max_mws_blocks == 2
        assert not config.host_fallback
        assert (config.pe_cycles, config.retention_days) == (1000, 30.0)

    @pytest.mark.parametrize(
        "raw, expectation",
        [
            ({"max_mws_blocks": 4}, does_not_raise()),
            ([], raises(ConfigError)),
            ({"seed": 3}, raises(ConfigError)),
            ({"timing": {"tr_us": 1.0}}, raises(ConfigError)),
            ({"timing": [1, 2]}, raises(ConfigError)),
            ({"timing": {"tr_slc_us": -1.0}}, raises(ConfigError)),
            ({"geometry": {"wordlines_per_block": 65}}, raises(ConfigError)),
            ({"workloads": {"kind": "bmi"}}, raises(ConfigError)),
            ({"workloads": [{"kind": "sort"}]}, raises(ConfigError)),
            ({"workloads": [{"params": {}}]}, raises(ConfigError)),
            ({"max_mws_blocks": 0}, raises(ConfigError)),
            ({"max_mws_blocks": 5}, raises(ConfigError)),
            ({"max_mws_blocks": "4"}, raises(ConfigError)),
            ({"host_fallback": 1}, raises(ConfigError)),
            ({"pe_cycles": 3000, "retention_days": 365}, does_not_raise()),
            ({"pe_cycles": -1}, raises(ConfigError, match="negative")),
            ({"pe_cycles": 1.5}, raises(ConfigError)),
            ({"pe_cycles": True}, raises(ConfigError)),
            ({"retention_days": -0.5}, raises(ConfigError, match="negative")),
            ({"retention_days": "1y"}, raises(ConfigError)),
        ],
    )
    def test_from_dict(self, raw: Any, expectation: ContextManager) -> None:
        """Tests the validation of configuration documents.

        Args:
            raw: Decoded JSON document.
            expectation: Context manager for the expected exception.
        """
        with expectation:
            ExperimentConfig.from_dict(raw)

    def test_from_file(self, tmp_path: Path) -> None:
        """Tests loading a configuration file and the file-level errors."""
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps({"power": {"read_power_w": 0.1}}))
        assert load_config(path).power.read_power_w == 0.1
        with raises(ConfigError):
            load_config(tmp_path / "missing.json")
        path.write_text("{not json")
        with raises(ConfigError):
            ExperimentConfig.from_file(path)
