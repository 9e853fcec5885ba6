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
"""Exceptions raised across the simulator.

All of them derive from :class:`FlashCosmosError` so that callers (e.g. the command line interface) can
report any simulator failure uniformly.
"""

__all__ = [
    "FlashCosmosError",
    "AddressOutOfRange",
    "ProgramOnNonErasedPage",
    "InvalidTarget",
    "InverseWithoutInit",
    "MalformedFrame",
    "CapacityExceeded",
    "PlacementMissing",
    "UnsupportedShape",
    "ExpressionSyntaxError",
    "OracleMismatch",
    "ConfigError",
    "SnapshotFormatError",
]


class FlashCosmosError(Exception):
    """Base class of every simulator error."""


class AddressOutOfRange(FlashCosmosError, IndexError):
    """A plane, block, wordline or bitline address lies outside the chip geometry."""


class ProgramOnNonErasedPage(FlashCosmosError):
    """A program operation targeted a page that has not been erased since its last program."""


class InvalidTarget(FlashCosmosError, ValueError):
    """A multi-wordline sensing target violates its structural constraints."""


class InverseWithoutInit(FlashCosmosError, ValueError):
    """Inverse sensing was requested without initialising the sensing latch."""


class MalformedFrame(FlashCosmosError, ValueError):
    """A command frame cannot be encoded or a byte sequence cannot be decoded."""


class CapacityExceeded(FlashCosmosError):
    """The requested data does not fit in the configured geometry."""


class PlacementMissing(FlashCosmosError, KeyError):
    """An expression refers to a variable that has no placement."""


class UnsupportedShape(FlashCosmosError):
    """An expression cannot be computed in-latch and host fallback is disabled."""


class ExpressionSyntaxError(FlashCosmosError, ValueError):
    """The textual expression is not well formed."""


class OracleMismatch(FlashCosmosError):
    """A simulated result differs from its reference oracle."""


class ConfigError(FlashCosmosError, ValueError):
    """The experiment configuration is invalid."""


class SnapshotFormatError(FlashCosmosError, ValueError):
    """A chip snapshot has a bad magic number, an unknown version or a truncated payload."""
