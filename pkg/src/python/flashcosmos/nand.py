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
"""NAND vocabulary shared by the device, reliability and timing models."""

__all__ = ["ProgramMode", "BITS_PER_CELL"]

from enum import Enum


class ProgramMode(Enum):
    """Programming mode a page was written with.

    ``ESP`` pages are SLC pages followed by extra fine-grained program steps; the length of those steps is
    recorded on the page as a multiple of the SLC program latency.
    """

    ERASED = "erased"
    SLC = "slc"
    ESP = "esp"
    MLC = "mlc"
    TLC = "tlc"

    @classmethod
    def from_name(cls, name: str) -> "ProgramMode":
        """Returns the mode matching ``name`` (case insensitive).

        Raises:
            ValueError: if ``name`` is not a known mode.
        """
        try:
            return cls(name.lower())
        except ValueError as exc:
            raise ValueError(f"Unknown programming mode '{name}'") from exc


BITS_PER_CELL = {
    ProgramMode.SLC: 1,
    ProgramMode.ESP: 1,
    ProgramMode.MLC: 2,
    ProgramMode.TLC: 3,
}
