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
"""Compilation of boolean expressions into MWS command plans.

The latch bank computes ``C = G1 | G2 | ...`` where every group ``G`` is the AND of the sensings accumulated
in the sensing latch between two moves. A normal sensing returns an OR of per-block ANDs of stored pages; an
inverse sensing returns an AND of per-block ORs of complemented pages and can only open a group. The compiler
rewrites the expression in negation normal form and looks for such a cover, using the polarity each operand
is stored with. An XOR or XNOR at the top adds one group left in the sensing latch and an inter-latch XOR.
Whatever does not fit is split into parts that do, read out separately and combined on the host.

Typical usage example::

    from flashcosmos.planner import compile_plan, parse_expression, place, plan_stats

    expr = parse_expression("(A1 | B1 & B2) & (C1 | C3)")
    plan = compile_plan(expr, place(["A1", "B1", "B2", "C1", "C3"], [expr], geometry))
    plan_stats(plan).sensings

"""

__all__ = ["compile_plan"]

from dataclasses import dataclass
import logging
from typing import Sequence

from flashcosmos.commands.frames import MAX_ADDRESS_GROUPS, PBM_BYTES, MwsFrame, XorFrame
from flashcosmos.errors import UnsupportedShape
from flashcosmos.planner.expr import (
    And,
    Expr,
    Not,
    Or,
    Xnor,
    Xor,
    conjunction,
    disjunction,
    is_literal,
    literal_of,
    negate,
    to_nnf,
    variables,
)
from flashcosmos.planner.placement import Placement
from flashcosmos.planner.plan import HostCombine, HostOp, Plan, PlanStep, PlanStyle, Readout
from flashcosmos.sensing.engine import MwsFlags, pbm_from_wordlines


@dataclass(frozen=True)
class _Sensing:
    """One MWS: wordlines selected per block, and whether the result is complemented."""

    entries: tuple[tuple[int, frozenset[int]], ...]
    inverse: bool = False


_Group = list[_Sensing]
_BlockSet = tuple[int, frozenset[int]]


def _chunks(items: Sequence[int], size: int) -> list[frozenset[int]]:
    return [frozenset(items[start : start + size]) for start in range(0, len(items), size)]


def _strip_negations(expr: Expr) -> Expr:
    """Moves negations at the root into XOR/XNOR nodes so that the top-level operator is visible."""
    while isinstance(expr, Not):
        inner = expr.operand
        if isinstance(inner, Not):
            expr = inner.operand
        elif isinstance(inner, Xor):
            expr = Xnor(inner.left, inner.right)
        elif isinstance(inner, Xnor):
            expr = Xor(inner.left, inner.right)
        else:
            break
    return expr


class _Compiler:
    """Stateful helper building the steps of one plan."""

    def __init__(
        self, placement: Placement, max_blocks: int, max_wordlines: int, host_fallback: bool
    ) -> None:
        self.placement = placement
        self.max_blocks = max_blocks
        self.max_wordlines = max_wordlines
        self.host_fallback = host_fallback
        self.steps: list[PlanStep] = []
        self.registers = 0

    def _literal_set(self, operands: Sequence[Expr], matching: bool) -> _BlockSet | None:
        """Returns the (block, wordlines) of literals sharing one block and the requested polarity."""
        blocks = set()
        wordlines = set()
        for operand in operands:
            name, negated = literal_of(operand)
            if self.placement.stores_value(name, negated) != matching:
                return None
            loc = self.placement.location(name)
            blocks.add(loc.block)
            wordlines.add(loc.wordline)
        if len(blocks) != 1 or len(wordlines) > self.max_wordlines:
            return None
        return blocks.pop(), frozenset(wordlines)

    def block_term(self, expr: Expr) -> _BlockSet | None:
        """Matches an AND of directly stored literals of one block."""
        if is_literal(expr):
            return self._literal_set([expr], matching=True)
        if isinstance(expr, And) and all(is_literal(operand) for operand in expr.operands):
            return self._literal_set(expr.operands, matching=True)
        return None

    def clause(self, expr: Expr) -> _BlockSet | None:
        """Matches an OR of complement-stored literals of one block."""
        if is_literal(expr):
            return self._literal_set([expr], matching=False)
        if isinstance(expr, Or) and all(is_literal(operand) for operand in expr.operands):
            return self._literal_set(expr.operands, matching=False)
        return None

    def normal_sensing(self, expr: Expr) -> _Sensing | None:
        """Matches an OR of block terms on distinct blocks, i.e. one non-inverse sensing."""
        terms = expr.operands if isinstance(expr, Or) else (expr,)
        entries: dict[int, frozenset[int]] = {}
        for term in terms:
            found = self.block_term(term)
            if found is None or found[0] in entries:
                return None
            entries[found[0]] = found[1]
        if len(entries) > self.max_blocks:
            return None
        return _Sensing(tuple(sorted(entries.items())))

    def factorize(self, expr: Expr) -> _Group | None:
        """Returns the sensings whose AND equals ``expr`` (a single group), if there are any."""
        sensing = self.normal_sensing(expr)
        if sensing is not None:
            return [sensing]
        if not isinstance(expr, And):
            clause = self.clause(expr)
            if clause is None:
                return None
            return [_Sensing((clause,), inverse=True)]
        direct: dict[int, set[int]] = {}
        clauses: dict[int, frozenset[int]] = {}
        others: _Group = []
        for operand in expr.operands:
            term = self.block_term(operand) if is_literal(operand) else None
            if term is not None:
                direct.setdefault(term[0], set()).update(term[1])
                continue
            clause = self.clause(operand)
            if clause is not None:
                if clauses.get(clause[0], clause[1]) != clause[1]:
                    return None
                clauses[clause[0]] = clause[1]
                continue
            sensing = self.normal_sensing(operand)
            if sensing is None:
                return None
            others.append(sensing)
        group: _Group = []
        if clauses:
            if len(clauses) > self.max_blocks:
                return None
            group.append(_Sensing(tuple(sorted(clauses.items())), inverse=True))
        for block in sorted(direct):
            for chunk in _chunks(sorted(direct[block]), self.max_wordlines):
                group.append(_Sensing(((block, chunk),)))
        return group + others

    def cover_or(self, expr: Or) -> list[_Group] | None:
        """Returns groups whose OR equals ``expr``, one operand (or a packed set of block terms) per group."""
        packed: list[dict[int, frozenset[int]]] = []
        complemented: dict[int, set[int]] = {}
        groups: list[_Group] = []
        for operand in expr.operands:
            term = self.block_term(operand)
            if term is not None:
                block, wordlines = term
                for entries in packed:
                    if block not in entries and len(entries) < self.max_blocks:
                        entries[block] = wordlines
                        break
                else:
                    packed.append({block: wordlines})
                continue
            if is_literal(operand):
                name, _ = literal_of(operand)
                loc = self.placement.location(name)
                complemented.setdefault(loc.block, set()).add(loc.wordline)
                continue
            group = self.factorize(operand)
            if group is None:
                return None
            groups.append(group)
        cover = [[_Sensing(tuple(sorted(entries.items())))] for entries in packed]
        for block in sorted(complemented):
            for chunk in _chunks(sorted(complemented[block]), self.max_wordlines):
                cover.append([_Sensing(((block, chunk),), inverse=True)])
        return cover + groups

    def segment(self, nnf: Expr) -> list[_Group] | None:
        """Returns groups whose OR equals ``nnf``, if the latch bank can compute it."""
        group = self.factorize(nnf)
        if group is not None:
            return [group]
        if isinstance(nnf, Or):
            return self.cover_or(nnf)
        return None

    @staticmethod
    def _frame(sensing: _Sensing, flags: MwsFlags) -> MwsFrame:
        groups = tuple((block, pbm_from_wordlines(sorted(wordlines))) for block, wordlines in sensing.entries)
        return MwsFrame(flags, groups)

    def emit_cache(self, groups: list[_Group]) -> list[PlanStep]:
        """Frames accumulating the OR of ``groups`` in the cache latch."""
        frames: list[PlanStep] = []
        for group_index, group in enumerate(groups):
            for index, sensing in enumerate(group):
                flags = MwsFlags(
                    inverse=sensing.inverse,
                    init_s=index == 0,
                    init_c=group_index == 0 and index == 0,
                    move_s_to_c=index == len(group) - 1,
                )
                frames.append(self._frame(sensing, flags))
        return frames

    def emit_sensing_latch(self, group: _Group) -> list[PlanStep]:
        """Frames leaving the AND of ``group`` in the sensing latch, the cache latch untouched."""
        return [
            self._frame(sensing, MwsFlags(inverse=sensing.inverse, init_s=index == 0))
            for index, sensing in enumerate(group)
        ]

    def in_latch(self, expr: Expr) -> list[PlanStep] | None:
        """Returns frames leaving ``expr`` in the cache latch, or ``None`` if it needs the host."""
        expr = _strip_negations(expr)
        if isinstance(expr, (Xor, Xnor)):
            left, right = to_nnf(expr.left), to_nnf(expr.right)
            not_left, not_right = negate(left), negate(right)
            if isinstance(expr, Xor):
                pairs = [(left, right), (right, left), (not_left, not_right), (not_right, not_left)]
            else:
                pairs = [(left, not_right), (not_right, left), (not_left, right), (right, not_left)]
            for cache_part, sensing_part in pairs:
                groups = self.segment(cache_part)
                sensing_group = self.factorize(sensing_part)
                if groups is not None and sensing_group is not None:
                    return self.emit_cache(groups) + self.emit_sensing_latch(sensing_group) + [XorFrame()]
            return None
        groups = self.segment(to_nnf(expr))
        return None if groups is None else self.emit_cache(groups)

    def new_register(self) -> int:
        self.registers += 1
        return self.registers - 1

    def emit(self, expr: Expr) -> int:
        """Appends the steps computing ``expr`` and returns the register holding it.

        Raises:
            UnsupportedShape: if ``expr`` needs the host and host fallback is disabled.
        """
        frames = self.in_latch(expr)
        if frames is not None:
            self.steps.extend(frames)
            register = self.new_register()
            self.steps.append(Readout(register))
            return register
        if not self.host_fallback:
            raise UnsupportedShape(f"'{expr}' needs host-side combination and host fallback is disabled")
        expr = _strip_negations(expr)
        if isinstance(expr, (Xor, Xnor)):
            inputs = (self.emit(expr.left), self.emit(expr.right))
            output = self.new_register()
            self.steps.append(HostCombine(HostOp.XOR, inputs, output, negate=isinstance(expr, Xnor)))
            return output
        nnf = to_nnf(expr)
        if not isinstance(nnf, (And, Or)):
            raise UnsupportedShape(f"Cannot split '{expr}' into latch-computable parts")
        build = conjunction if isinstance(nnf, And) else disjunction
        parts: list[list[Expr]] = []
        current: list[Expr] = []
        for operand in nnf.operands:
            candidate = [*current, operand]
            if len(candidate) == 1 or self.in_latch(build(candidate)) is not None:
                current = candidate
            else:
                parts.append(current)
                current = [operand]
        parts.append(current)
        inputs = tuple(self.emit(build(part)) for part in parts)
        if len(inputs) == 1:
            return inputs[0]
        output = self.new_register()
        self.steps.append(HostCombine(HostOp.AND if isinstance(nnf, And) else HostOp.OR, inputs, output))
        return output


def compile_plan(
    expr: Expr,
    placement: Placement,
    style: PlanStyle = PlanStyle.FLASH_COSMOS,
    max_blocks: int = MAX_ADDRESS_GROUPS,
    host_fallback: bool = True,
) -> Plan:
    """Compiles ``expr`` into a plan over the operands of ``placement``.

    Args:
        expr: Expression to compute.
        placement: Placement of every operand of ``expr``.
        style: ``PARABIT`` restricts every sensing to one wordline of one block.
        max_blocks: Largest number of blocks one MWS frame may target.
        host_fallback: Allow splitting the expression and combining the parts on the host.

    Raises:
        PlacementMissing: if an operand of ``expr`` has no placement.
        UnsupportedShape: if ``expr`` needs the host and ``host_fallback`` is disabled.
        ValueError: if ``max_blocks`` is outside [1, 4].
    """
    if not 1 <= max_blocks <= MAX_ADDRESS_GROUPS:
        raise ValueError(f"An MWS frame targets 1 to {MAX_ADDRESS_GROUPS} blocks, got {max_blocks}")
    for name in variables(expr):
        placement.location(name)
    if style is PlanStyle.PARABIT:
        compiler = _Compiler(placement, 1, 1, host_fallback)
    else:
        compiler = _Compiler(
            placement, max_blocks, min(placement.geometry.wordlines_per_block, 8 * PBM_BYTES), host_fallback
        )
    result = compiler.emit(expr)
    plan = Plan(tuple(compiler.steps), result, style, str(expr))
    if plan.host_fallback:
        logging.info(f"Plan for '{expr}' combines {compiler.registers} partial results on the host")
    return plan
