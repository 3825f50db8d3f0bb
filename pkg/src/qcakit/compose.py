"""Assembling layouts from cell runs.

The Builder accumulates cells carrying *virtual* clock indices: unwrapped
zone counters that only become physical zones (mod 4) when the Layout is
built.  Virtual indices keep latency arithmetic linear while composing: a
signal entering a wire at virtual clock v reaches a cell at virtual clock
w after w - v zone steps, regardless of wrapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .layout import (
    DEFAULT_CELL_SIZE_NM,
    DEFAULT_DOT_OFFSET_NM,
    DEFAULT_PITCH_NM,
    Cell,
    CellFunction,
    CellOrientation,
    Crossing,
    GridPosition,
    Layout,
)

Point = Tuple[int, int]


class CompositionError(Exception):
    pass


class Collision(CompositionError):
    """Two build steps claimed the same grid position."""


def straight_path(a: Point, b: Point) -> List[Point]:
    """Grid points from a to b inclusive; the segment must be axis aligned."""
    (c0, r0), (c1, r1) = a, b
    if c0 != c1 and r0 != r1:
        raise CompositionError(
            "segment (%d,%d)-(%d,%d) is not axis aligned" % (c0, r0, c1, r1)
        )
    if c0 == c1:
        step = 1 if r1 >= r0 else -1
        return [(c0, r) for r in range(r0, r1 + step, step)]
    step = 1 if c1 >= c0 else -1
    return [(c, r0) for c in range(c0, c1 + step, step)]


def path_through(points: Sequence[Point]) -> List[Point]:
    """Rectilinear path visiting the waypoints in order, corners emitted once."""
    if not points:
        raise CompositionError("need at least one waypoint")
    out = [tuple(points[0])]
    for nxt in points[1:]:
        seg = straight_path(out[-1], nxt)
        out.extend(seg[1:])
    return out


def ramp_clocks(n: int, start: int, end: int) -> List[int]:
    """Virtual clock for each of n wire cells stepping from start to end.

    Every zone gets at least two cells so each run latches as a pair; spare
    cells pad the early zones round-robin.
    """
    if end < start:
        raise CompositionError("clock ramp must not decrease (%d..%d)" % (start, end))
    k = end - start + 1
    if n < 2 * k:
        raise CompositionError(
            "wire of %d cells cannot span %d zones (needs %d)" % (n, k, 2 * k)
        )
    counts = [2] * k
    extra = n - 2 * k
    i = 0
    while extra > 0:
        counts[i % k] += 1
        i += 1
        extra -= 1
    out: List[int] = []
    for z, c in zip(range(start, end + 1), counts):
        out.extend([z] * c)
    return out


@dataclass
class Builder:
    name: str = ""
    pitch_nm: float = DEFAULT_PITCH_NM
    cell_size_nm: float = DEFAULT_CELL_SIZE_NM
    dot_offset_nm: float = DEFAULT_DOT_OFFSET_NM
    _cells: List[Cell] = field(default_factory=list)
    _occ: Dict[GridPosition, str] = field(default_factory=dict)
    _virtual: Dict[str, int] = field(default_factory=dict)
    _devices: List[str] = field(default_factory=list)
    _crossings: List[Crossing] = field(default_factory=list)
    _seq: int = 0

    def _fresh(self, stem: str) -> str:
        while True:
            self._seq += 1
            cid = "%s%d" % (stem, self._seq)
            if cid not in self._virtual:
                return cid

    def occupied(self, col: int, row: int) -> bool:
        return GridPosition(col, row) in self._occ

    def id_at(self, col: int, row: int) -> Optional[str]:
        return self._occ.get(GridPosition(col, row))

    def virtual_clock(self, cell_id: str) -> int:
        return self._virtual[cell_id]

    def add(self, col: int, row: int, clock: int,
            orientation: CellOrientation = CellOrientation.STANDARD,
            function: CellFunction = CellFunction.NORMAL,
            label: Optional[str] = None,
            polarization: Optional[float] = None,
            device: bool = False,
            id: Optional[str] = None) -> str:
        pos = GridPosition(col, row)
        if pos in self._occ:
            raise Collision("(%d,%d) already holds %s" % (col, row, self._occ[pos]))
        cid = id if id is not None else self._fresh("d" if device else "c")
        if cid in self._virtual:
            raise CompositionError("duplicate cell id %r" % cid)
        cell = Cell(id=cid, pos=pos, orientation=orientation, function=function,
                    clock=clock % 4, polarization=polarization, label=label)
        self._cells.append(cell)
        self._occ[pos] = cid
        self._virtual[cid] = clock
        if device:
            self._devices.append(cid)
        return cid

    def fixed(self, col: int, row: int, polarization: float, id: Optional[str] = None) -> str:
        return self.add(col, row, 0, function=CellFunction.FIXED,
                        polarization=polarization, id=id)

    def run(self, positions: Sequence[Point], clocks: Sequence[int],
            orientation: CellOrientation = CellOrientation.STANDARD) -> List[str]:
        if len(positions) != len(clocks):
            raise CompositionError("positions and clocks differ in length")
        return [self.add(c, r, z, orientation=orientation)
                for (c, r), z in zip(positions, clocks)]

    def wire(self, waypoints: Sequence[Point], start_clock: int,
             end_clock: Optional[int] = None,
             orientation: CellOrientation = CellOrientation.STANDARD) -> List[str]:
        pts = path_through(waypoints)
        end = start_clock if end_clock is None else end_clock
        return self.run(pts, ramp_clocks(len(pts), start_clock, end), orientation)

    def remove(self, col: int, row: int) -> str:
        """Take a cell back out, e.g. to open the gap of a wire crossing."""
        pos = GridPosition(col, row)
        cid = self._occ.pop(pos, None)
        if cid is None:
            raise CompositionError("nothing to remove at (%d,%d)" % (col, row))
        for x in self._crossings:
            if cid in x.through or cid in x.hop:
                raise CompositionError("cell %s is part of a crossing" % cid)
        self._cells = [c for c in self._cells if c.id != cid]
        self._devices = [d for d in self._devices if d != cid]
        del self._virtual[cid]
        return cid

    def add_crossing(self, kind: str, through: Sequence[str], hop: Sequence[str]) -> None:
        for cid in tuple(through) + tuple(hop):
            if cid not in self._virtual:
                raise CompositionError("crossing references unknown cell %r" % cid)
        self._crossings.append(Crossing(kind, tuple(through), tuple(hop)))

    def build(self) -> Layout:
        return Layout(cells=tuple(self._cells), pitch_nm=self.pitch_nm,
                      cell_size_nm=self.cell_size_nm,
                      dot_offset_nm=self.dot_offset_nm, name=self.name,
                      devices=frozenset(self._devices),
                      crossings=tuple(self._crossings))

    def virtual_clocks(self) -> Dict[str, int]:
        return dict(self._virtual)
