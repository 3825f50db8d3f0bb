"""Design-rule checks and layout assessment metrics.

Rules enforced (ERROR severity unless noted):

R1  every wire segment (maximal orthogonally-connected run of same-zone,
    same-orientation cells) has at least two cells.  Fixed driver cells
    and device cells are not wire segments and are exempt.
R2  every live input of a device cell arrives in the zone directly
    before the device's zone.
R3  every device cell drives at least one neighbor in the zone directly
    after its own, and only one such neighbor (its output wire head).
R4  logical crossings have the two wires clocked exactly two zones apart
    at the intersection.

An optional maximum-run-length rule can be enabled with max_run_cells;
it reports WARN entries (the minimum is a hard rule, the maximum is
advisory).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .layout import Cell, CellFunction, CellOrientation, GridPosition, Layout


class MetricsError(Exception):
    pass


class NoPath(MetricsError):
    """An output has no coupled path back to any input."""


@dataclass(frozen=True)
class Violation:
    rule: str
    severity: str  # "ERROR" | "WARN"
    cells: Tuple[str, ...]
    message: str


@dataclass(frozen=True)
class DrcReport:
    violations: Tuple[Violation, ...]

    @property
    def clean(self) -> bool:
        return not self.violations

    def errors(self) -> List[Violation]:
        return [v for v in self.violations if v.severity == "ERROR"]

    def to_json(self) -> str:
        return json.dumps(
            {"clean": self.clean,
             "violations": [{"rule": v.rule, "severity": v.severity,
                             "cells": list(v.cells), "message": v.message}
                            for v in self.violations]},
            indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        if self.clean:
            return "DRC clean\n"
        lines = ["DRC: %d violation(s)" % len(self.violations)]
        for v in self.violations:
            lines.append("%s %-4s [%s] %s"
                         % (v.severity, v.rule, ",".join(v.cells), v.message))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Metrics:
    cell_count: int
    area_nm2: float
    latency_cycles: Fraction
    crossovers: Dict[str, int]

    def to_json(self) -> str:
        return json.dumps(
            {"cell_count": self.cell_count,
             "area_nm2": self.area_nm2,
             "latency_cycles": [self.latency_cycles.numerator,
                                self.latency_cycles.denominator],
             "latency_cycles_float": float(self.latency_cycles),
             "crossovers": dict(sorted(self.crossovers.items()))},
            indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        xo = ", ".join("%s %d" % kv for kv in sorted(self.crossovers.items()))
        return ("cells      %d\n"
                "area       %.0f nm^2\n"
                "latency    %s cycles (%.2f)\n"
                "crossovers %s\n"
                % (self.cell_count, self.area_nm2, self.latency_cycles,
                   float(self.latency_cycles), xo or "none"))


# -- geometry helpers -------------------------------------------------------

_STD_OFFS = ((0, 1), (0, -1), (1, 0), (-1, 0),
             (1, 1), (1, -1), (-1, 1), (-1, -1),
             (0, 2), (0, -2), (2, 0), (-2, 0))
_KNIGHT_OFFS = ((1, 2), (1, -2), (-1, 2), (-1, -2),
                (2, 1), (2, -1), (-2, 1), (-2, -1))
_ORTH_OFFS = ((0, 1), (0, -1), (1, 0), (-1, 0))


def coupled_neighbors(layout: Layout) -> Dict[str, List[str]]:
    """Ids of cells each cell exchanges signal with.

    Same-orientation pairs couple up to two pitches inline and one
    diagonally; mixed standard/rotated pairs couple only at the knight
    offset (the closer contacts cancel by symmetry).
    """
    by_pos = {c.pos: c for c in layout.cells}
    out: Dict[str, List[str]] = {c.id: [] for c in layout.cells}
    for c in layout.cells:
        for dc, dr in _STD_OFFS + _KNIGHT_OFFS:
            n = by_pos.get(GridPosition(c.pos.col + dc, c.pos.row + dr))
            if n is None:
                continue
            same = c.orientation is n.orientation
            knight = (dc, dr) in _KNIGHT_OFFS
            if (same and not knight) or (not same and knight):
                out[c.id].append(n.id)
    return out


def wire_runs(layout: Layout) -> List[List[Cell]]:
    """Maximal orth-connected same-zone, same-orientation cell runs.

    Fixed and device cells are excluded: they are drivers and logic,
    not wire.  A net that jumps a logical crossing stays one net, so
    same-zone runs joined by a crossing's hop cells are merged.
    """
    skip = set(layout.devices)
    cells = [c for c in layout.cells
             if c.function is not CellFunction.FIXED and c.id not in skip]
    by_pos = {c.pos: c for c in cells}
    seen: Set[str] = set()
    runs: List[List[Cell]] = []
    run_of: Dict[str, int] = {}
    for c in cells:
        if c.id in seen:
            continue
        group, todo = [], [c]
        seen.add(c.id)
        while todo:
            cur = todo.pop()
            group.append(cur)
            run_of[cur.id] = len(runs)
            for dc, dr in _ORTH_OFFS:
                n = by_pos.get(GridPosition(cur.pos.col + dc,
                                            cur.pos.row + dr))
                if (n is not None and n.id not in seen
                        and n.clock == cur.clock
                        and n.orientation is cur.orientation):
                    seen.add(n.id)
                    todo.append(n)
        runs.append(group)

    parent = list(range(len(runs)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for x in layout.crossings:
        hops = [layout.cell(i) for i in x.hop if i in run_of]
        for a in hops:
            for b in hops:
                if a.clock == b.clock:
                    parent[find(run_of[a.id])] = find(run_of[b.id])

    merged: Dict[int, List[Cell]] = {}
    for i, group in enumerate(runs):
        merged.setdefault(find(i), []).extend(group)
    out = []
    for group in merged.values():
        group.sort(key=lambda x: (x.pos.col, x.pos.row))
        out.append(group)
    out.sort(key=lambda g: (g[0].pos.col, g[0].pos.row))
    return out


# -- rule checks ------------------------------------------------------------

def check(layout: Layout, max_run_cells: Optional[int] = None) -> DrcReport:
    vs: List[Violation] = []
    by_pos = {c.pos: c for c in layout.cells}

    for run in wire_runs(layout):
        if len(run) < 2:
            c = run[0]
            vs.append(Violation(
                "R1", "ERROR", (c.id,),
                "zone %d segment at (%d,%d) has 1 cell; wire segments "
                "need at least 2" % (c.clock, c.pos.col, c.pos.row)))
        if max_run_cells is not None and len(run) > max_run_cells:
            ids = tuple(c.id for c in run)
            vs.append(Violation(
                "MAXRUN", "WARN", ids,
                "zone %d segment has %d cells (limit %d)"
                % (run[0].clock, len(run), max_run_cells)))

    for did in sorted(layout.devices):
        dev = layout.cell(did)
        before = (dev.clock - 1) % 4
        after = (dev.clock + 1) % 4
        outs = 0
        for dc, dr in _ORTH_OFFS:
            n = by_pos.get(GridPosition(dev.pos.col + dc, dev.pos.row + dr))
            if n is None or n.function is CellFunction.FIXED:
                continue
            if n.clock == after:
                outs += 1
            elif n.clock != before:
                vs.append(Violation(
                    "R2", "ERROR", (did, n.id),
                    "device %s (zone %d) input %s is at zone %d, not the "
                    "zone directly before (%d)"
                    % (did, dev.clock, n.id, n.clock, before)))
        if outs == 0:
            vs.append(Violation(
                "R3", "ERROR", (did,),
                "device %s (zone %d) drives no neighbor at zone %d"
                % (did, dev.clock, after)))
        elif outs > 1:
            vs.append(Violation(
                "R3", "ERROR", (did,),
                "device %s has %d outputs at zone %d; expected exactly 1"
                % (did, outs, after)))

    for x in layout.crossings:
        if x.kind != "logical":
            continue
        zt = {layout.cell(i).clock for i in x.through}
        zh = {layout.cell(i).clock for i in x.hop}
        bad = [(a, b) for a in zt for b in zh if (a - b) % 4 != 2]
        if bad:
            vs.append(Violation(
                "R4", "ERROR", tuple(sorted(x.through + x.hop)),
                "logical crossing zones %s vs %s are not two apart"
                % (sorted(zt), sorted(zh))))

    vs.sort(key=lambda v: (v.rule, v.cells))
    return DrcReport(tuple(vs))


# -- metrics ----------------------------------------------------------------

def metrics(layout: Layout) -> Metrics:
    if not layout.cells:
        return Metrics(0, 0.0, Fraction(0), {})
    c0, r0, c1, r1 = layout.bounding_box()
    area = ((c1 - c0 + 1) * layout.pitch_nm) * ((r1 - r0 + 1) * layout.pitch_nm)
    xo: Dict[str, int] = {}
    for x in layout.crossings:
        xo[x.kind] = xo.get(x.kind, 0) + 1
    return Metrics(len(layout.cells), area, _latency(layout), xo)


def _latency(layout: Layout) -> Fraction:
    """Distinct zones on the longest input-to-output signal path, over 4.

    Works on the condensation of wire runs plus device cells; an edge
    advances one zone.  Sequential layouts contain zone cycles, so the
    search is an explicit longest-simple-path walk; run counts stay small
    enough for that to be instant.
    """
    runs = wire_runs(layout)
    node_of: Dict[str, int] = {}
    for i, run in enumerate(runs):
        for c in run:
            node_of[c.id] = i
    n = len(runs)
    zone = [run[0].clock for run in runs]
    starts: Set[int] = set()
    ends: Set[int] = set()
    for i, run in enumerate(runs):
        for c in run:
            if c.function is CellFunction.INPUT:
                starts.add(i)
            elif c.function is CellFunction.OUTPUT:
                ends.add(i)
    for did in sorted(layout.devices):  # devices are 1-cell nodes
        node_of[did] = n
        zone.append(layout.cell(did).clock)
        n += 1
    if not starts or not ends:
        raise NoPath("layout needs labelled inputs and outputs")

    adj: List[Set[int]] = [set() for _ in range(n)]
    for cid, nbrs in coupled_neighbors(layout).items():
        if cid not in node_of:
            continue
        u = node_of[cid]
        for nid in nbrs:
            if nid not in node_of:
                continue
            v = node_of[nid]
            if u != v and zone[v] == (zone[u] + 1) % 4:
                adj[u].add(v)

    # crossing hops jump over the through wire without touching it
    best = -1
    on_path = [False] * n

    def walk(u: int, steps: int) -> None:
        nonlocal best
        if u in ends:
            best = max(best, steps)
        on_path[u] = True
        for v in sorted(adj[u]):
            if not on_path[v]:
                walk(v, steps + 1)
        on_path[u] = False

    for s in sorted(starts):
        walk(s, 0)
    if best < 0:
        raise NoPath("no zone-ordered path from any input to any output")
    return Fraction(best + 1, 4)  # a path over k edges visits k+1 zones
