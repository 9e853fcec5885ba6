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
"""Local directory-specific hook implementations.

Since this file is located at the root of all flash-cosmos-sim tests, every test in every subfolder will have
access to the plugins, hooks and fixtures defined here.

"""

import pytest

from flashcosmos.flash import ChipGeometry


pytest_plugins = ("ensembl.utils.plugin",)


@pytest.fixture(name="toy_geometry")
def fixture_toy_geometry() -> ChipGeometry:
    """Returns a one-die geometry with 64 bitlines and 48-wordline blocks."""
    return ChipGeometry(
        channels=1,
        dies_per_channel=1,
        planes_per_die=1,
        blocks_per_plane=64,
        wordlines_per_block=48,
        page_bytes=8,
    )
