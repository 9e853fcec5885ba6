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
"""Data placement: which block and wordline each operand occupies, and in which polarity.

Operands of one AND group share blocks and are stored as they are (negated operands inverted), so that
one intra-block sensing returns their AND. Operands of one OR group share blocks and are stored inverted, so
that one inverse intra-block sensing returns their OR. Remaining operands share blocks of their own. Every
bit-vector is striped over all planes of the device with the same per-stripe block layout.

Typical usage example::

    from flashcosmos.flash import ChipGeometry
    from flashcosmos.planner import parse_expression, place

    expr = parse_expression("a & b & c")
    placement = place(["a", "b", "c"], [expr], ChipGeometry(page_bytes=8), vector_bits=512)
    placement.location("b")  # VariableLocation(block=0, wordline=1, stored_inverted=False, ...)

"""

__all__ = ["VariableLocation", "Placement", "place"]

from dataclasses import dataclass, field
import logging
from typing import Any, Iterable, Iterator, Sequence

from flashcosmos.errors import CapacityExceeded, PlacementMissing
from flashcosmos.flash.geometry import ChipGeometry, StripeLocation
from flashcosmos.nand import ProgramMode
from flashcosmos.planner.expr import And, Expr, Or, is_literal, literal_of, to_nnf, variables


@dataclass(frozen=True)
class VariableLocation:
    """Where an operand lives inside every stripe.

    Attributes:
        block: Block index relative to the stripe's block offset.
        wordline: Wordline inside the block.
        stored_inverted: Whether the complement of the operand is stored.
        mode: Programming mode of the operand's pages.
    """

    block: int
    wordline: int
    stored_inverted: bool = False
    mode: ProgramMode = ProgramMode.ESP


@dataclass(frozen=True)
class Placement:
    """Placement of a set of equally long bit-vectors.

    Attributes:
        geometry: Device geometry the placement targets.
        vector_bits: Length of every operand.
        blocks_per_stripe: Blocks one stripe of the layout occupies in its plane.
        locations: Per-operand location inside a stripe.
        stripes: Page-sized stripes, in bit-vector order.
    """

    geometry: ChipGeometry
    vector_bits: int
    blocks_per_stripe: int
    locations: dict[str, VariableLocation] = field(default_factory=dict)
    stripes: tuple[StripeLocation, ...] = ()

    def location(self, name: str) -> VariableLocation:
        """Returns the location of ``name``.

        Raises:
            PlacementMissing: if ``name`` was not placed.
        """
        try:
            return self.locations[name]
        except KeyError as exc:
            raise PlacementMissing(f"No placement for operand '{name}'") from exc

    def stores_value(self, name: str, negated: bool) -> bool:
        """Returns whether the stored bits of ``name`` equal ``name`` (or ``!name`` when ``negated``)."""
        return self.location(name).stored_inverted == negated

    def blocks(self) -> list[int]:
        return sorted({loc.block for loc in self.locations.values()})

    def to_dict(self) -> dict[str, Any]:
        """Returns a JSON-serializable description of the placement."""
        return {
            "vector_bits": self.vector_bits,
            "blocks_per_stripe": self.blocks_per_stripe,
            "stripes": len(self.stripes),
            "locations": {
                name: {
                    "block": loc.block,
                    "wordline": loc.wordline,
                    "stored_inverted": loc.stored_inverted,
                    "mode": loc.mode.value,
                }
                for name, loc in self.locations.items()
            },
        }


def _preorder(expr: Expr) -> Iterator[Expr]:
    yield expr
    if isinstance(expr, (And, Or)):
        for operand in expr.operands:
            yield from _preorder(operand)


def _groups(hints: Iterable[Expr]) -> list[list[tuple[str, bool]]]:
    """Returns co-location groups of ``(name, stored_inverted)`` pairs; the first claim on an operand wins."""
    claimed: set[str] = set()
    groups = []
    for hint in hints:
        for node in _preorder(to_nnf(hint)):
            if not isinstance(node, (And, Or)):
                continue
            literals = [literal_of(operand) for operand in node.operands if is_literal(operand)]
            if isinstance(node, Or):
                if len(literals) < 2:
                    continue
                members = [(name, not negated) for name, negated in literals]
            else:
                members = literals
            fresh = []
            for name, inverted in members:
                if name not in claimed:
                    claimed.add(name)
                    fresh.append((name, inverted))
            if fresh:
                groups.append(fresh)
    return groups


def _chunks(items: Sequence, size: int) -> Iterator[Sequence]:
    for start in range(0, len(items), size):
        yield items[start : start + size]


def place(
    names: Sequence[str],
    hints: Sequence[Expr],
    geometry: ChipGeometry,
    vector_bits: int | None = None,
    mode: ProgramMode = ProgramMode.ESP,
) -> Placement:
    """Places operands so that the expressions in ``hints`` map onto few sensings.

    Groups are laid out in order of discovery (a pre-order walk of each hint's negation normal form), each
    starting on a fresh block and split every ``sensed_wordlines`` operands. Operands that belong to no
    group share the blocks after the last group.

    Args:
        names: Operands to place; operands of ``hints`` missing from it are placed as well.
        hints: Expressions the placement should favour.
        geometry: Target geometry.
        vector_bits: Length of every operand (default: one page).
        mode: Programming mode of every operand.

    Raises:
        CapacityExceeded: if the layout does not fit in a plane.
    """
    if vector_bits is None:
        vector_bits = geometry.bitlines_per_block
    groups = _groups(hints)
    grouped = {name for group in groups for name, _ in group}
    ordered = list(dict.fromkeys([*names, *(name for hint in hints for name in variables(hint))]))
    singles = [(name, False) for name in ordered if name not in grouped]
    locations = {}
    block = 0
    for group in [*groups, singles]:
        for chunk in _chunks(group, geometry.sensed_wordlines):
            for wordline, (name, inverted) in enumerate(chunk):
                locations[name] = VariableLocation(block, wordline, inverted, mode)
            block += 1
    stripes = geometry.stripe_map(vector_bits, max(block, 1))
    needed = (stripes[-1].block_offset if stripes else 0) + block
    if needed > geometry.blocks_per_plane:
        raise CapacityExceeded(
            f"{len(locations)} operands of {vector_bits} bits need {needed} blocks per plane, "
            f"only {geometry.blocks_per_plane} available"
        )
    logging.debug(f"Placed {len(locations)} operands in {block} blocks per stripe ({len(groups)} groups)")
    return Placement(geometry, vector_bits, block, locations, stripes)
