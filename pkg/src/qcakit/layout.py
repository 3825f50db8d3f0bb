"""Placed-cell data model.

Cells sit on an integer grid (pitch in nm is a layout-level parameter) and
carry an orientation, a function (normal / fixed driver / input / output),
and a clock zone in {0,1,2,3}.  A Layout is an immutable value: mutating
operations return new Layouts, so instances are safe to share.

Polarization-to-bit convention used throughout the toolkit:
P = +1.0 means logic 1, P = -1.0 means logic 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

DEFAULT_PITCH_NM = 20.0
DEFAULT_CELL_SIZE_NM = 18.0
DEFAULT_DOT_OFFSET_NM = 4.5

CLOCK_ZONES = (0, 1, 2, 3)


class LayoutError(Exception):
    pass


class PositionOccupied(LayoutError):
    pass


class DuplicateLabel(LayoutError):
    pass


class DuplicateCellId(LayoutError):
    pass


class UnknownCell(LayoutError):
    pass


class CellOrientation(Enum):
    STANDARD = "standard"
    ROTATED = "rotated"


class CellFunction(Enum):
    NORMAL = "normal"
    FIXED = "fixed"
    INPUT = "input"
    OUTPUT = "output"


@dataclass(frozen=True, order=True)
class GridPosition:
    col: int
    row: int

    def translate(self, dcol: int, drow: int) -> "GridPosition":
        return GridPosition(self.col + dcol, self.row + drow)

    def chebyshev(self, other: "GridPosition") -> int:
        return max(abs(self.col - other.col), abs(self.row - other.row))

    def manhattan(self, other: "GridPosition") -> int:
        return abs(self.col - other.col) + abs(self.row - other.row)


@dataclass(frozen=True)
class Cell:
    """One placed cell.

    polarization is only meaningful for FIXED cells (exactly -1.0 or +1.0);
    label only for INPUT/OUTPUT cells.  FIXED cells ignore clocking.
    """

    id: str
    pos: GridPosition
    orientation: CellOrientation = CellOrientation.STANDARD
    function: CellFunction = CellFunction.NORMAL
    clock: int = 0
    polarization: Optional[float] = None
    label: Optional[str] = None

    def __post_init__(self):
        if self.clock not in CLOCK_ZONES:
            raise LayoutError("clock zone must be in {0,1,2,3}: %r" % (self.clock,))
        if self.function is CellFunction.FIXED:
            if self.polarization not in (-1.0, 1.0):
                raise LayoutError(
                    "FIXED cell %s needs polarization -1.0 or +1.0" % self.id
                )
        elif self.polarization is not None:
            raise LayoutError("only FIXED cells carry a polarization: %s" % self.id)
        if self.function in (CellFunction.INPUT, CellFunction.OUTPUT):
            if not self.label:
                raise LayoutError("%s cell %s needs a label" % (self.function.value, self.id))
        elif self.label is not None:
            raise LayoutError("only INPUT/OUTPUT cells carry a label: %s" % self.id)

    def moved(self, dcol: int, drow: int) -> "Cell":
        return replace(self, pos=self.pos.translate(dcol, drow))


@dataclass(frozen=True)
class Crossing:
    """Record of a wire crossing, kept for rule checks and metrics.

    kind is "coplanar" (rotated channel passing a standard wire) or
    "logical" (shared-zone hop with the two wires clocked 2 zones apart).
    through: ids of the cells the uninterrupted wire contributes.
    hop: ids of the two cells that jump across.
    """

    kind: str
    through: Tuple[str, ...]
    hop: Tuple[str, ...]

    def __post_init__(self):
        if self.kind not in ("coplanar", "logical"):
            raise LayoutError("unknown crossing kind %r" % (self.kind,))


@dataclass(frozen=True)
class Layout:
    cells: Tuple[Cell, ...] = ()
    pitch_nm: float = DEFAULT_PITCH_NM
    cell_size_nm: float = DEFAULT_CELL_SIZE_NM
    dot_offset_nm: float = DEFAULT_DOT_OFFSET_NM
    name: str = ""
    devices: FrozenSet[str] = frozenset()
    crossings: Tuple[Crossing, ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "cells", tuple(sorted(self.cells, key=lambda c: (c.pos.col, c.pos.row)))
        )
        seen_pos: Dict[GridPosition, str] = {}
        seen_id: Dict[str, Cell] = {}
        seen_label: Dict[str, str] = {}
        for c in self.cells:
            if c.pos in seen_pos:
                raise PositionOccupied(
                    "cells %s and %s share (%d,%d)" % (seen_pos[c.pos], c.id, c.pos.col, c.pos.row)
                )
            seen_pos[c.pos] = c.id
            if c.id in seen_id:
                raise DuplicateCellId(c.id)
            seen_id[c.id] = c
            if c.label is not None:
                key = c.function.value + ":" + c.label
                if key in seen_label:
                    raise DuplicateLabel("%s label %r appears twice" % (c.function.value, c.label))
                seen_label[key] = c.id
        for x in self.devices:
            if x not in seen_id:
                raise UnknownCell("device annotation for missing cell %r" % x)

    # -- lookups ------------------------------------------------------

    @cached_property
    def _by_id(self) -> Dict[str, Cell]:
        return {c.id: c for c in self.cells}

    @cached_property
    def _by_pos(self) -> Dict[GridPosition, Cell]:
        return {c.pos: c for c in self.cells}

    def __len__(self) -> int:
        return len(self.cells)

    def cell(self, id: str) -> Cell:
        try:
            return self._by_id[id]
        except KeyError:
            raise UnknownCell(id) from None

    def cell_at(self, pos: GridPosition) -> Optional[Cell]:
        return self._by_pos.get(pos)

    def inputs(self) -> List[Cell]:
        return [c for c in self.cells if c.function is CellFunction.INPUT]

    def outputs(self) -> List[Cell]:
        return [c for c in self.cells if c.function is CellFunction.OUTPUT]

    def labelled(self, label: str, function: CellFunction) -> Cell:
        for c in self.cells:
            if c.function is function and c.label == label:
                return c
        raise UnknownCell("no %s cell labelled %r" % (function.value, label))

    # -- edits --------------------------------------------------------

    def add_cell(self, cell: Cell) -> "Layout":
        if cell.pos in self._by_pos:
            raise PositionOccupied(
                "(%d,%d) already holds %s" % (cell.pos.col, cell.pos.row, self._by_pos[cell.pos].id)
            )
        return replace(self, cells=self.cells + (cell,))

    def add_cells(self, cells: Iterable[Cell]) -> "Layout":
        out = self
        for c in cells:
            out = out.add_cell(c)
        return out

    def remove_cell(self, id: str) -> "Layout":
        self.cell(id)
        return replace(
            self,
            cells=tuple(c for c in self.cells if c.id != id),
            devices=frozenset(x for x in self.devices if x != id),
        )

    def with_devices(self, ids: Iterable[str]) -> "Layout":
        return replace(self, devices=self.devices | frozenset(ids))

    def with_crossing(self, crossing: Crossing) -> "Layout":
        return replace(self, crossings=self.crossings + (crossing,))

    def translated(self, dcol: int, drow: int) -> "Layout":
        return replace(self, cells=tuple(c.moved(dcol, drow) for c in self.cells))

    # -- geometry -----------------------------------------------------

    def center_nm(self, id: str) -> Tuple[float, float]:
        c = self.cell(id)
        return (c.pos.col * self.pitch_nm, c.pos.row * self.pitch_nm)

    def distance_nm(self, a: str, b: str) -> float:
        xa, ya = self.center_nm(a)
        xb, yb = self.center_nm(b)
        return math.hypot(xa - xb, ya - yb)

    def neighbors(self, id: str, radius_nm: float) -> List[str]:
        """Ids of all cells with center distance <= radius_nm, nearest first.

        Ties broken by (col, row) so the order is reproducible.
        """
        if radius_nm <= 0:
            raise ValueError("radius_nm must be positive")
        me = self.cell(id)
        out = []
        for c in self.cells:
            if c.id == id:
                continue
            d = math.hypot(
                (c.pos.col - me.pos.col) * self.pitch_nm,
                (c.pos.row - me.pos.row) * self.pitch_nm,
            )
            if d <= radius_nm + 1e-9:
                out.append((d, c.pos.col, c.pos.row, c.id))
        return [t[3] for t in sorted(out)]

    def bounding_box(self) -> Tuple[int, int, int, int]:
        """(min_col, min_row, max_col, max_row); raises on empty layout."""
        if not self.cells:
            raise LayoutError("empty layout has no bounding box")
        cols = [c.pos.col for c in self.cells]
        rows = [c.pos.row for c in self.cells]
        return (min(cols), min(rows), max(cols), max(rows))
