"""Netlist-to-layout synthesis.

The pipeline mirrors how the gate templates were designed by hand: carve
the network into template-sized blocks (partition), pick a template per
block for the requested approach (plan), then drop sites into levelized
columns and route every net with a crossing-aware grid search
(place_and_route).

Routing runs on virtual (unwrapped) clock indices throughout; cells only
get their mod-4 zone when the layout is built.  A route from a driver
whose output run sits at virtual V into a pin expecting virtual A is cut
into exactly A-1-V runs at V+1 .. A-1, each 2..run_cap cells, so every
signal arrives in the zone directly before its consumer and monotonicity
holds by construction.  Feedback routes get 4 extra zone steps per cycle
of loop delay; the largest loop delay becomes the design's operation
period.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from . import library
from .compose import Builder
from .drc import DrcReport, check as drc_check
from .layout import CellFunction, CellOrientation, Layout
from .library import Template, inv, maj3, maj5, mux_ref, xor3_ref, xor_ref
from .network import (EmptyNetwork, LogicNetwork, MalformedNetwork, Node,
                      NodeKind, UnsupportedNode, network)

Pos = Tuple[int, int]


class SynthError(Exception):
    pass


class NoTemplateForApproach(SynthError):
    pass


class Unroutable(SynthError):
    pass


class DrcFailed(SynthError):
    def __init__(self, report: DrcReport):
        super().__init__("synthesized layout violates design rules:\n"
                         + report.to_text())
        self.report = report


class _NeedSlack(Exception):
    """Internal: an edge ran out of room; bump the sink's zone budget."""

    def __init__(self, site: str):
        self.site = site


class Approach(Enum):
    CONVENTIONAL = "conventional"
    INNOVATIVE = "innovative"
    CELL_LEVEL = "cell-level"

    @classmethod
    def coerce(cls, value) -> "Approach":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("_", "-"))
        except ValueError:
            raise NoTemplateForApproach("unknown approach %r" % (value,)) from None


@dataclass(frozen=True)
class Block:
    """A matched primary-level subnetwork, bound to template operands."""

    kind: NodeKind  # MUX, XOR2 or XOR3
    output: str
    nodes: Tuple[str, ...]
    inputs: Tuple[str, ...]  # nets in template port order


@dataclass(frozen=True)
class PriorityPartition:
    network: LogicNetwork
    primary_blocks: Tuple[Block, ...]
    secondary: Tuple[Node, ...]  # majority/inverter gates outside any block

    def boundary_nets(self) -> List[str]:
        nets: Set[str] = set()
        for b in self.primary_blocks:
            nets.add(b.output)
            nets.update(a for a in b.inputs if a not in ("0", "1"))
        return sorted(nets)


@dataclass(frozen=True)
class CompositionPlan:
    templates: Dict[str, str]  # block output -> template name
    crossing: str = "coplanar"
    approach: "Approach" = None  # type: ignore[assignment]


@dataclass(frozen=True)
class SynthConfig:
    run_cap: int = 12         # max cells in one route zone run
    sched_cap: int = 8        # cells per zone step assumed while scheduling
    sched_slack: int = 8      # distance padding assumed while scheduling
    row_gap: int = 10
    channel_base: int = 14
    window_margin: int = 48
    max_starts: int = 8       # route attempts per edge before giving up
    max_slack_retries: int = 12


@dataclass(frozen=True)
class Placement:
    site: str
    template: Optional[str]
    origin: Pos
    base: int  # virtual clock the site's input pins expect
    ports: Dict[str, str]  # port name -> cell id


@dataclass(frozen=True)
class Route:
    net: str
    sink: str
    pin: str
    cells: Tuple[str, ...]
    loop_delay: int = 0  # cycles, nonzero only for feedback routes


@dataclass(frozen=True)
class PlacedDesign:
    layout: Layout
    network: LogicNetwork
    partition: PriorityPartition
    plan: CompositionPlan
    placements: Dict[str, Placement]
    routes: Tuple[Route, ...]
    period_cycles: int
    output_virtual: Dict[str, int]

    def sample_cycle(self, label: str, op_index: int) -> int:
        """Trace cycle where operation op_index shows up on an output."""
        return op_index * self.period_cycles + self.output_virtual[label] // 4


# -- lowering -----------------------------------------------------------

_LOWERING = {
    NodeKind.AND2: (NodeKind.MAJ3, ("0",)),
    NodeKind.OR2: (NodeKind.MAJ3, ("1",)),
    NodeKind.AND3: (NodeKind.MAJ5, ("0", "0")),
    NodeKind.OR3: (NodeKind.MAJ5, ("1", "1")),
}


def lower_to_majority(net: LogicNetwork) -> LogicNetwork:
    """Rewrite AND/OR forms as majority votes over forced inputs."""
    out: List[Node] = []
    pads: Set[str] = set()
    changed = False
    for n in net.nodes:
        low = _LOWERING.get(n.kind)
        if low is None:
            out.append(n)
            continue
        kind, extra = low
        out.append(Node(n.name, kind, n.args + extra))
        pads.update(extra)
        changed = True
    if not changed:
        return net
    have = {n.name for n in out}
    consts = [Node(c, NodeKind.CONST0 if c == "0" else NodeKind.CONST1, ())
              for c in sorted(pads - have)]
    return network(consts + out, name=net.name)


# -- partition ----------------------------------------------------------

def _apply(kind: NodeKind, vals: Sequence[int]) -> int:
    if kind is NodeKind.MAJ3:
        return maj3(*vals)
    if kind is NodeKind.MAJ5:
        return maj5(*vals)
    if kind is NodeKind.INV:
        return inv(vals[0])
    if kind is NodeKind.MUX:
        return mux_ref(*vals)
    if kind is NodeKind.XOR2:
        return xor_ref(*vals)
    if kind is NodeKind.XOR3:
        return xor3_ref(*vals)
    if kind is NodeKind.CONST0:
        return 0
    if kind is NodeKind.CONST1:
        return 1
    if kind is NodeKind.AND2:
        return vals[0] & vals[1]
    if kind is NodeKind.OR2:
        return vals[0] | vals[1]
    if kind is NodeKind.AND3:
        return vals[0] & vals[1] & vals[2]
    if kind is NodeKind.OR3:
        return vals[0] | vals[1] | vals[2]
    raise UnsupportedNode("no evaluation for %r" % (kind,))


_CONE_KINDS = (NodeKind.MAJ3, NodeKind.MAJ5, NodeKind.INV)
_CONE_LIMIT = 8


def _grow_cone(net: LogicNetwork, users: Dict[str, Set[str]], root: Node,
               taken: Set[str]) -> Optional[Tuple[Set[str], Tuple[str, ...]]]:
    """Single-fanout majority/inverter cone under root, or None."""
    cone = {root.name}
    ins: List[str] = []
    frontier = [root]
    while frontier:
        node = frontier.pop(0)
        for a in node.args:
            if a in cone or a in ins:
                continue
            sub = net.node(a) if net.has(a) else None
            if sub is not None and sub.kind in (NodeKind.CONST0,
                                                NodeKind.CONST1):
                continue  # constants fold into the matched function
            if (sub is not None and sub.kind in _CONE_KINDS
                    and sub.name not in taken
                    and users.get(a, set()) == {node.name}):
                cone.add(a)
                frontier.append(sub)
                if len(cone) > _CONE_LIMIT:
                    return None
            else:
                ins.append(a)
    return cone, tuple(ins)


def _cone_table(net: LogicNetwork, root: str,
                ins: Tuple[str, ...]) -> Tuple[int, ...]:
    table = []
    for row in range(1 << len(ins)):
        memo = {nm: (row >> (len(ins) - 1 - i)) & 1
                for i, nm in enumerate(ins)}

        def ev(name: str) -> int:
            if name in memo:
                return memo[name]
            node = net.node(name)
            memo[name] = _apply(node.kind, [ev(a) for a in node.args])
            return memo[name]

        table.append(ev(root))
    return tuple(table)


def _bits(row: int, width: int) -> Tuple[int, ...]:
    return tuple((row >> (width - 1 - i)) & 1 for i in range(width))


def _match_cone(net: LogicNetwork, root: str,
                ins: Tuple[str, ...]) -> Optional[Tuple[NodeKind,
                                                        Tuple[str, ...]]]:
    table = _cone_table(net, root, ins)
    if len(ins) == 2:
        if table == tuple(xor_ref(*_bits(r, 2)) for r in range(4)):
            return NodeKind.XOR2, ins
        return None
    if len(ins) == 3:
        if table == tuple(xor3_ref(*_bits(r, 3)) for r in range(8)):
            return NodeKind.XOR3, ins
        for perm in sorted(itertools.permutations(range(3))):
            if all(table[r] == mux_ref(*(_bits(r, 3)[p] for p in perm))
                   for r in range(8)):
                return NodeKind.MUX, tuple(ins[p] for p in perm)
    return None


def partition(net: LogicNetwork) -> PriorityPartition:
    """Split into primary blocks (mux/xor shapes) and residual gates.

    Explicit mux/xor nodes are promoted directly.  Majority/inverter
    cones whose internal nets have a single consumer are matched against
    the mux and xor truth tables, largest cone first; whatever stays
    unmatched is left for plain gate templates.
    """
    net.validate()
    users: Dict[str, Set[str]] = {}
    for n in net.nodes:
        for a in set(n.args):
            users.setdefault(a, set()).add(n.name)
    topo = [n.name for n in net.topological()]
    order = {nm: i for i, nm in enumerate(topo)}

    taken: Set[str] = set()
    blocks: List[Block] = []
    for nm in topo:
        n = net.node(nm)
        if n.kind in (NodeKind.MUX, NodeKind.XOR2, NodeKind.XOR3):
            blocks.append(Block(n.kind, nm, (nm,), n.args))
            taken.add(nm)

    candidates = []
    for nm in topo:
        n = net.node(nm)
        if n.kind not in (NodeKind.MAJ3, NodeKind.MAJ5) or nm in taken:
            continue
        grown = _grow_cone(net, users, n, taken)
        if grown is None:
            continue
        cone, ins = grown
        if len(cone) < 2 or len(ins) not in (2, 3):
            continue
        match = _match_cone(net, nm, ins)
        if match is None:
            continue
        kind, bound = match
        blk = Block(kind, nm, tuple(sorted(cone, key=order.get)), bound)
        candidates.append((-len(cone), order[nm], blk))
    for _, _, blk in sorted(candidates, key=lambda c: c[:2]):
        if not set(blk.nodes) & taken:
            blocks.append(blk)
            taken.update(blk.nodes)

    blocks.sort(key=lambda b: order[b.output])
    secondary = tuple(n for n in net.nodes
                      if n.kind in _CONE_KINDS and n.name not in taken)
    return PriorityPartition(net, tuple(blocks), secondary)


# -- plan ---------------------------------------------------------------

_MUX_TEMPLATES = {
    Approach.CONVENTIONAL: "mux_a",
    Approach.INNOVATIVE: "mux_c",
    Approach.CELL_LEVEL: "mux_cell",
}


def plan(part: PriorityPartition, approach=Approach.INNOVATIVE, *,
         innovative_variant: str = "c", crossing: str = "coplanar",
         per_block: Optional[Dict[str, object]] = None) -> CompositionPlan:
    ap = Approach.coerce(approach)
    if innovative_variant not in ("b", "c"):
        raise NoTemplateForApproach("innovative mux variant must be 'b' "
                                    "or 'c', not %r" % (innovative_variant,))
    if crossing not in ("coplanar", "logical"):
        raise SynthError("crossing preference must be coplanar or logical")
    templates: Dict[str, str] = {}
    for blk in part.primary_blocks:
        bap = ap
        if per_block and blk.output in per_block:
            bap = Approach.coerce(per_block[blk.output])
        if blk.kind is NodeKind.MUX:
            name = _MUX_TEMPLATES[bap]
            if bap is Approach.INNOVATIVE and innovative_variant == "b":
                name = "mux_b"
        elif blk.kind is NodeKind.XOR2:
            name = "xor2"
        elif blk.kind is NodeKind.XOR3:
            name = "xor3"
        else:
            raise NoTemplateForApproach("no template for %r" % (blk.kind,))
        templates[blk.output] = name
    return CompositionPlan(templates=templates, crossing=crossing, approach=ap)


# -- placement scaffolding ----------------------------------------------

_SECONDARY_TEMPLATES = {NodeKind.MAJ3: "maj3", NodeKind.MAJ5: "maj5",
                        NodeKind.INV: "inverter"}
_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _manhattan(a: Pos, b: Pos) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def _cheb(a: Pos, b: Pos) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


@dataclass
class _Site:
    name: str
    kind: str  # input | output | gate | block
    template: Optional[Template] = None
    pin_nets: Dict[str, str] = field(default_factory=dict)
    level: int = 0
    origin: Pos = (0, 0)
    base: int = 0

    def pins(self) -> List[str]:
        if self.kind == "output":
            return ["in"]
        if self.template is None:
            return []
        return [p.name for p in self.template.inputs()]

    def port_pos(self, port: str) -> Pos:
        if self.template is None:
            # input site: pin cell then pad; output site: plain then pin
            if port == "out":
                return (self.origin[0] + 1, self.origin[1])
            return self.origin
        p = self.template.layout.cell(self.template.port(port).cell).pos
        return (p.col + self.origin[0], p.row + self.origin[1])

    def port_virtual(self, port: str) -> int:
        if self.template is None:
            return self.base
        return self.base + self.template.port(port).clock


@dataclass(frozen=True)
class _Edge:
    driver: str
    sink: str
    pin: str
    net: str
    loop: bool


# -- router -------------------------------------------------------------

@dataclass(frozen=True)
class _CellInfo:
    tag: Tuple[str, str]  # ("site", name) or ("net", name)
    plain: bool           # standard orientation, NORMAL, unpolarized
    virtual: int


@dataclass(frozen=True)
class _HopRec:
    """Same-plane crossing: my wire jumps a 2-pitch gap over a foreign run."""

    cells: Tuple[Pos, ...]     # m1 m2 m3 m4, standard cells in one run
    through: Tuple[Pos, ...]   # foreign q-p, q, q+p
    hop: Tuple[Pos, ...]       # m2, m3 (facing the gap)
    zone_mod: int              # (foreign virtual + 2) % 4


@dataclass(frozen=True)
class _SpliceRec:
    """Rotated-channel crossing: my wire dives through the foreign wire."""

    cells: Tuple[Pos, ...]     # e1 e2 c1..c6 x1 x2
    rot: Tuple[Pos, ...]       # c1..c6
    removed: Pos               # foreign cell opened into a gap
    hop: Tuple[Pos, ...]       # foreign cells left facing the gap
    foreign: Tuple[Pos, ...]   # crossed run cells, exempt from inflation


@dataclass
class _RoutePlan:
    cells: List[Tuple[Pos, int, CellOrientation]]
    crossings: List[Tuple[str, Tuple[Pos, ...], Tuple[Pos, ...]]]
    removals: List[Pos]
    loop_delay: int = 0


_HOP_COST = 4
_SPLICE_COST = 10
_CROSS_PENALTY = 24
_CROSS_PENALTY_OTHER = 36
_HEAT_PENALTY = 6


class _Router:
    """Crossing-aware grid search, one net edge at a time.

    Normal moves step onto free cells that keep Chebyshev distance 3
    from everything already placed (the spacing at which the coupling
    table says standard cells stop seeing each other), except inside the
    small attach corridors at the two ports.  Two compound moves cross
    an existing straight wire; which one is cheaper follows the
    requested preference.
    """

    def __init__(self, b: Builder, info: Dict[Pos, _CellInfo],
                 cfg: SynthConfig, preference: str,
                 heat: Optional[Dict[Pos, Set[str]]] = None):
        self.b = b
        self.info = info
        self.cfg = cfg
        self.pref = preference
        self.heat = heat or {}
        self.edge_seq = 0
        self._push = 0
        self._hug: Set[Pos] = set()

    # -- public entry ------------------------------------------------------

    def plan(self, starts: List[Tuple[Pos, int]], goals: List[Pos],
             src_pos: Pos, pin_pos: Pos, net: str, sink_site: str,
             pin_virtual: Optional[int] = None,
             loop: Optional[Tuple[int, int]] = None) -> _RoutePlan:
        """Plan one edge; loop=(k, delay) fixes the run count instead of
        deriving it from pin_virtual."""
        window = self._window()
        soft = self._soft_exempt(net, starts)
        hot = {pos for pos, nets in self.heat.items() if net not in nets}
        self._hug = {
            (src_pos[0] + dc, src_pos[1] + dr)
            for dc in (-1, 0, 1) for dr in (-1, 0, 1)
            if self.b.occupied(src_pos[0] + dc, src_pos[1] + dr)}
        self._hug.update(
            (pin_pos[0] + dc, pin_pos[1] + dr)
            for dc in (-1, 0, 1) for dr in (-1, 0, 1)
            if self.b.occupied(pin_pos[0] + dc, pin_pos[1] + dr))
        banned: Set[Pos] = set()
        banned_cross: Set[Pos] = set()
        for _ in range(self.cfg.max_starts):
            found = self._search(starts, goals, src_pos, pin_pos, window,
                                 soft, banned, banned_cross, hot)
            if found is None:
                raise _NeedSlack(sink_site)
            path, recs, base = found
            if loop is None:
                k = pin_virtual - 1 - base
                if k < 1:
                    banned.add(path[0])
                    continue
                delay = 0
            else:
                k, delay = loop
            composed = self._compose(path, recs, base, k, src_pos, pin_pos,
                                     window, soft)
            if composed is not None:
                composed.loop_delay = delay
                return composed
            if recs:
                # a crossing the zone arithmetic cannot satisfy; outlaw the
                # foreign run it sits on so the next search crosses elsewhere
                for rec in recs:
                    if isinstance(rec, _HopRec):
                        banned_cross.update(rec.through)
                    else:
                        banned_cross.update(rec.foreign)
            else:
                banned.add(path[0])
        raise _NeedSlack(sink_site)

    def materialize(self, plan_: _RoutePlan, net: str) -> List[str]:
        self.edge_seq += 1
        for pos in plan_.removals:
            self.b.remove(*pos)
            del self.info[pos]
        ids = []
        for i, (pos, virt, orient) in enumerate(plan_.cells):
            cid = self.b.add(pos[0], pos[1], virt, orientation=orient,
                             id="w%d_%d" % (self.edge_seq, i))
            ids.append(cid)
            self.info[pos] = _CellInfo(
                ("net", net), orient is CellOrientation.STANDARD, virt)
        for kind, through, hop in plan_.crossings:
            self.b.add_crossing(kind,
                                [self.b.id_at(*p) for p in through],
                                [self.b.id_at(*p) for p in hop])
        return ids

    # -- free-space test ----------------------------------------------------

    def _window(self) -> Tuple[int, int, int, int]:
        cols = [p.col for p in self.b._occ]
        rows = [p.row for p in self.b._occ]
        m = self.cfg.window_margin
        return (min(cols) - m, min(rows) - m, max(cols) + m, max(rows) + m)

    def _soft_exempt(self, net: str, starts) -> Set[Pos]:
        # existing cells of this net near an attach point may be hugged;
        # farther along, even own-net wires keep full clearance so that
        # runs carrying different operations never couple sideways
        out = set()
        for pos, cell in self.info.items():
            if cell.tag == ("net", net):
                if any(_cheb(pos, s) <= 3 for s, _ in starts):
                    out.add(pos)
        return out

    def _free(self, u: Pos, window, soft: Set[Pos], src_pos: Pos,
              pin_pos: Pos, exempt: Iterable[Pos] = ()) -> bool:
        if not (window[0] <= u[0] <= window[2]
                and window[1] <= u[1] <= window[3]):
            return False
        if self.b.occupied(*u):
            return False
        corridor = _cheb(u, src_pos) <= 2 or _cheb(u, pin_pos) <= 2
        for dc in (-2, -1, 0, 1, 2):
            for dr in (-2, -1, 0, 1, 2):
                v = (u[0] + dc, u[1] + dr)
                if not self.b.occupied(*v):
                    continue
                if v in soft or v in exempt:
                    continue
                if corridor:
                    # attaching means standing next to the port's own run,
                    # but full-strength contact with anything else two rows
                    # from a pin would splice nets together
                    if max(abs(dc), abs(dr)) == 2 or v in self._hug:
                        continue
                return False
        return True

    # -- search ---------------------------------------------------------------

    def _search(self, starts, goals, src_pos, pin_pos, window, soft, banned,
                banned_cross, hot):
        goalset = set(goals)
        dist: Dict[Pos, int] = {}
        came: Dict[Pos, Tuple[Optional[Pos], object, int]] = {}
        heap: List[Tuple[int, int, Pos]] = []

        def push(pos, cost, prev, rec, base):
            if pos in banned or (pos in dist and dist[pos] <= cost):
                return
            dist[pos] = cost
            came[pos] = (prev, rec, base)
            self._push += 1
            heapq.heappush(heap, (cost, self._push, pos))

        for pos, base in sorted(set(starts)):
            if self._free(pos, window, soft, src_pos, pin_pos):
                push(pos, 1 + (_HEAT_PENALTY if pos in hot else 0),
                     None, None, base)
        done: Set[Pos] = set()
        while heap:
            cost, _, u = heapq.heappop(heap)
            if u in done or dist.get(u) != cost:
                continue
            done.add(u)
            if u in goalset:
                return self._recover(u, came)
            for d in _DIRS:
                v = (u[0] + d[0], u[1] + d[1])
                if v not in done and self._free(v, window, soft, src_pos,
                                                pin_pos):
                    step = 1 + (_HEAT_PENALTY if v in hot else 0)
                    push(v, cost + step, u, "step", came[u][2])
            for exit_pos, rec, delta in self._crossing_moves(
                    u, window, soft, src_pos, pin_pos, banned_cross):
                if exit_pos not in done:
                    push(exit_pos, cost + delta, u, rec, came[u][2])
        return None

    def _recover(self, goal, came):
        cells: List[Pos] = []
        recs: List[object] = []
        u = goal
        base = 0
        while u is not None:
            prev, rec, base = came[u]
            if rec is None or rec == "step":
                cells.append(u)
            else:
                cells.extend(reversed(rec.cells))
                recs.append(rec)
            u = prev
        cells.reverse()
        recs.reverse()
        return cells, recs, base

    # -- crossing moves --------------------------------------------------------

    def _crossing_moves(self, u, window, soft, src_pos, pin_pos,
                        banned_cross):
        for d in _DIRS:
            p = (d[1], d[0])
            hop = self._try_hop(u, d, p, window, soft, src_pos, pin_pos,
                                banned_cross)
            if hop is not None:
                yield hop
            for side in (1, -1):
                n = (p[0] * side, p[1] * side)
                sp = self._try_splice(u, d, p, n, window, soft, src_pos,
                                      pin_pos, banned_cross)
                if sp is not None:
                    yield sp

    def _foreign_run(self, q: Pos, p: Pos, extent: int) -> Optional[int]:
        """Virtual of a straight plain run through q along p, or None."""
        base = self.info.get(q)
        if base is None or not base.plain:
            return None
        for t in range(-extent, extent + 1):
            c = self.info.get((q[0] + t * p[0], q[1] + t * p[1]))
            if c is None or not c.plain or c.virtual != base.virtual:
                return None
        return base.virtual

    def _near_driven_end(self, q: Pos, p: Pos, virt: int, limit=2) -> bool:
        """True when q sits within limit cells of the end of its straight
        run that is fed by the run one virtual step earlier.  Crossing any
        farther out loses the race against the crossing wire's released
        value and flips the victim's tail."""
        for sign in (1, -1):
            t = 0
            while True:
                c = self.info.get((q[0] + (t + 1) * p[0] * sign,
                                   q[1] + (t + 1) * p[1] * sign))
                if c is None or not c.plain or c.virtual != virt:
                    break
                t += 1
            if t > limit:
                continue
            end = (q[0] + t * p[0] * sign, q[1] + t * p[1] * sign)
            for d in _DIRS:
                c = self.info.get((end[0] + d[0], end[1] + d[1]))
                if c is not None and c.virtual == virt - 1:
                    return True
        return False

    def _try_hop(self, u, d, p, window, soft, src_pos, pin_pos,
                 banned_cross):
        q = (u[0] + 3 * d[0], u[1] + 3 * d[1])
        if q in banned_cross:
            return None
        virt = self._foreign_run(q, p, 1)
        if virt is None or not self._near_driven_end(q, p, virt):
            return None
        m = [(u[0] + t * d[0], u[1] + t * d[1]) for t in (1, 2, 4, 5)]
        exempt = {(q[0] + t * p[0], q[1] + t * p[1])
                  for t in (-2, -1, 0, 1, 2)}
        if not all(self._free(c, window, soft, src_pos, pin_pos, exempt)
                   for c in m):
            return None
        rec = _HopRec(cells=tuple(m),
                      through=((q[0] - p[0], q[1] - p[1]), q,
                               (q[0] + p[0], q[1] + p[1])),
                      hop=(m[1], m[2]),
                      zone_mod=(virt + 2) % 4)
        pen = _CROSS_PENALTY if self.pref == "logical" else _CROSS_PENALTY_OTHER
        return m[3], rec, _HOP_COST + pen

    def _try_splice(self, u, d, p, n, window, soft, src_pos, pin_pos,
                    banned_cross):
        gap = (u[0] + 7 * d[0] + n[0], u[1] + 7 * d[1] + n[1])
        if gap in banned_cross:
            return None
        virt = self._foreign_run(gap, p, 2)
        if virt is None or not self._near_driven_end(gap, p, virt):
            return None
        foreign = tuple((gap[0] + t * p[0], gap[1] + t * p[1])
                        for t in (-2, -1, 0, 1, 2))
        e = [(u[0] + t * d[0], u[1] + t * d[1]) for t in (1, 2)]
        chan = [(u[0] + t * d[0] + n[0], u[1] + t * d[1] + n[1])
                for t in (4, 5, 6, 7, 8, 9)]
        exits = [(u[0] + t * d[0], u[1] + t * d[1]) for t in (11, 12)]
        mine = e + [c for c in chan if c != gap] + exits
        if not all(self._free(c, window, soft, src_pos, pin_pos, foreign)
                   for c in mine):
            return None
        rec = _SpliceRec(cells=tuple(e + chan + exits),
                         rot=tuple(chan),
                         removed=gap,
                         hop=((gap[0] - p[0], gap[1] - p[1]),
                              (gap[0] + p[0], gap[1] + p[1])),
                         foreign=foreign)
        pen = _CROSS_PENALTY if self.pref == "coplanar" else _CROSS_PENALTY_OTHER
        return exits[1], rec, _SPLICE_COST + pen

    # -- exact-length composition -----------------------------------------------

    def _compose(self, path, recs, base, k, src_pos, pin_pos, window, soft):
        if k < 1:
            return None
        cap = self.cfg.run_cap
        rigid = set()
        for rec in recs:
            for a, b2 in zip(rec.cells, rec.cells[1:]):
                rigid.add((a, b2))

        lo = max(len(path), 2 * k)
        if (lo - len(path)) % 2:
            lo += 1
        if lo > cap * k:
            return None
        path = list(path)
        used = set(path)
        for target in range(lo, cap * k + 1, 2):
            while len(path) < target:
                if not self._bump(path, used, rigid, window, soft, src_pos,
                                  pin_pos, recs):
                    return None
            cut = self._segment(path, recs, base, k)
            if cut is not None:
                return self._emit(path, recs, cut, base)
        return None

    def _bump(self, path, used, rigid, window, soft, src_pos, pin_pos, recs):
        """Stretch the path by 2 cells with a sideways detour."""
        avoid = set()
        for rec in recs:
            if isinstance(rec, _HopRec):
                avoid.update(rec.through)
            else:
                avoid.update(rec.foreign)
        for i in range(len(path) - 1):
            a, b2 = path[i], path[i + 1]
            if (a, b2) in rigid:
                continue
            d = (b2[0] - a[0], b2[1] - a[1])
            if abs(d[0]) + abs(d[1]) != 1:
                continue
            for side in ((d[1], d[0]), (-d[1], -d[0])):
                a2 = (a[0] + side[0], a[1] + side[1])
                b3 = (b2[0] + side[0], b2[1] + side[1])
                if a2 in used or b3 in used or a2 in avoid or b3 in avoid:
                    continue
                if (self._free(a2, window, soft, src_pos, pin_pos)
                        and self._free(b3, window, soft, src_pos, pin_pos)):
                    path[i + 1:i + 1] = [a2, b3]
                    used.update((a2, b3))
                    return True
        return False

    def _segment(self, path, recs, base, k):
        """Cut path into k runs of 2..run_cap honoring crossing windows."""
        idx = {pos: i for i, pos in enumerate(path)}
        forced: Set[int] = set()
        forbidden: Set[int] = set()
        mods: List[Tuple[int, int]] = []  # (index, required zone mod)
        for rec in recs:
            ix = [idx[c] for c in rec.cells]
            if isinstance(rec, _HopRec):
                # The run carrying the hop must be exactly m1..m4.  The
                # segment past the gap is driven only by the weak inline
                # bridge; any longer and it orders from the through cell's
                # released charge before the bridge signal can win.
                forbidden.update(ix[1:])
                forced.update((ix[0], ix[3] + 1))
                mods.append((ix[0], rec.zone_mod))
            else:
                # e1 e2 | c1 c2 | c3 c4 c5 c6 | x1 x2
                forced.update((ix[2], ix[4], ix[8]))
                forbidden.update((ix[3], ix[5], ix[6], ix[7]))
        # A run may turn a corner only at its first or last cell.  Mid-run
        # the corner's diagonal anti-coupling outraces the relay through the
        # corner cell and nucleates an inverted domain; at a run boundary
        # both couplings come from held cells and the sum stays aligning.
        L = len(path)
        bends: Set[int] = set()
        for t in range(1, L - 1):
            d0 = (path[t][0] - path[t - 1][0], path[t][1] - path[t - 1][1])
            d1 = (path[t + 1][0] - path[t][0], path[t + 1][1] - path[t][1])
            if (abs(d0[0]) + abs(d0[1]) == 1 and abs(d1[0]) + abs(d1[1]) == 1
                    and d0 != d1):
                bends.add(t)
        reach = [[False] * (k + 1) for _ in range(L + 1)]
        par = [[0] * (k + 1) for _ in range(L + 1)]
        reach[0][0] = True
        for j in range(1, k + 1):
            for i in range(2 * j, L + 1):
                for ln in range(2, self.cfg.run_cap + 1):
                    s = i - ln
                    if s < 0 or not reach[s][j - 1]:
                        continue
                    if s in forbidden:
                        continue
                    if any(t in forced for t in range(s + 1, i)):
                        continue
                    if any(t in bends for t in range(s + 1, i - 1)):
                        continue
                    if any(s <= t < i and (base + j) % 4 != m
                           for t, m in mods):
                        continue
                    reach[i][j] = True
                    par[i][j] = s
                    break
        if not reach[L][k]:
            return None
        bounds = []
        i = L
        for j in range(k, 0, -1):
            bounds.append((par[i][j], i))
            i = par[i][j]
        bounds.reverse()
        return bounds

    def _emit(self, path, recs, bounds, base):
        rot = set()
        for rec in recs:
            if isinstance(rec, _SpliceRec):
                rot.update(rec.rot)
        cells = []
        for j, (s, e) in enumerate(bounds, start=1):
            for i in range(s, e):
                orient = (CellOrientation.ROTATED if path[i] in rot
                          else CellOrientation.STANDARD)
                cells.append((path[i], base + j, orient))
        crossings = []
        removals = []
        for rec in recs:
            if isinstance(rec, _HopRec):
                crossings.append(("logical", rec.through, rec.hop))
            else:
                crossings.append(("coplanar", (rec.removed,), rec.hop))
                removals.append(rec.removed)
        return _RoutePlan(cells=cells, crossings=crossings,
                          removals=removals)


# -- the placer -----------------------------------------------------------

def place_and_route(part: PriorityPartition, cp: CompositionPlan,
                    config: Optional[SynthConfig] = None) -> PlacedDesign:
    return _Placer(part, cp, config or SynthConfig()).run()


class _Placer:
    def __init__(self, part: PriorityPartition, cp: CompositionPlan,
                 cfg: SynthConfig):
        self.part = part
        self.net = part.network
        self.cp = cp
        self.cfg = cfg
        self.sites = self._build_sites()
        self.edges = self._build_edges()
        self._levelize()
        self._lay_out_columns()
        self._period_extra = 0

    # -- structure ---------------------------------------------------------

    def _build_sites(self) -> Dict[str, _Site]:
        sites: Dict[str, _Site] = {}
        in_block: Set[str] = set()
        for blk in self.part.primary_blocks:
            in_block.update(blk.nodes)
        for n in self.net.nodes:
            if n.kind is NodeKind.INPUT:
                sites[n.name] = _Site(n.name, "input")
            elif n.kind is NodeKind.OUTPUT:
                sites[n.name] = _Site(n.name, "output",
                                      pin_nets={"in": n.args[0]})
        for blk in self.part.primary_blocks:
            tpl = library.get(self.cp.templates[blk.output])
            pins = [p.name for p in tpl.inputs()]
            sites[blk.output] = _Site(blk.output, "block", tpl,
                                      dict(zip(pins, blk.inputs)))
        for n in self.part.secondary:
            if n.name in in_block:
                continue
            tpl = library.get(_SECONDARY_TEMPLATES[n.kind])
            pins = [p.name for p in tpl.inputs()]
            sites[n.name] = _Site(n.name, "gate", tpl,
                                  dict(zip(pins, n.args)))
        return sites

    def _driver_of(self, netname: str) -> Tuple[Optional[str], int]:
        """Site driving a net, looking through loops; counts loops seen."""
        loops = 0
        seen: Set[str] = set()
        while True:
            if netname in seen:
                raise MalformedNetwork("feedback references itself: %s"
                                       % netname)
            seen.add(netname)
            node = self.net.node(netname)
            if node.kind is NodeKind.DLOOP:
                loops += 1
                netname = node.args[0]
            elif node.kind is NodeKind.OUTPUT:
                netname = node.args[0]
            elif node.kind in (NodeKind.CONST0, NodeKind.CONST1):
                return None, loops
            else:
                return netname, loops

    def _const_behind(self, netname: str) -> Optional[int]:
        if netname in ("0", "1"):
            return int(netname)
        node = self.net.node(netname)
        while node.kind in (NodeKind.DLOOP, NodeKind.OUTPUT):
            node = self.net.node(node.args[0])
        if node.kind is NodeKind.CONST0:
            return 0
        if node.kind is NodeKind.CONST1:
            return 1
        return None

    def _build_edges(self) -> List[_Edge]:
        edges = []
        for name in sorted(self.sites):
            site = self.sites[name]
            for pin in site.pins():
                netname = site.pin_nets[pin]
                if netname in ("0", "1"):
                    continue
                drv, loops = self._driver_of(netname)
                if drv is None:
                    continue  # constant behind a loop, placed as a fix
                edges.append(_Edge(drv, name, pin, drv, loops > 0))
        return edges

    def _levelize(self):
        memo: Dict[str, int] = {}

        def level(name: str) -> int:
            if name in memo:
                return memo[name]
            memo[name] = 0
            ins = [e for e in self.edges if e.sink == name and not e.loop]
            lv = 0 if self.sites[name].kind == "input" else \
                1 + max((level(e.driver) for e in ins), default=-1)
            memo[name] = lv
            return lv

        deepest = 0
        for name, site in self.sites.items():
            site.level = level(name)
            if site.kind != "output":
                deepest = max(deepest, site.level)
        for site in self.sites.values():
            if site.kind == "output":
                site.level = deepest + 1

    def _lay_out_columns(self):
        by_level: Dict[int, List[_Site]] = {}
        for site in self.sites.values():
            by_level.setdefault(site.level, []).append(site)
        channel = self.cfg.channel_base + 2 * len(self.edges)
        x = 0
        for lv in sorted(by_level):
            width = 0
            y = 0
            for site in sorted(by_level[lv], key=lambda s: s.name):
                if site.template is None:
                    c0, r0, c1, r1 = 0, 0, 1, 0
                else:
                    c0, r0, c1, r1 = site.template.layout.bounding_box()
                site.origin = (x - c0, y - r0)
                y += (r1 - r0 + 1) + self.cfg.row_gap
                width = max(width, c1 - c0 + 1)
            x += width + channel

    # -- zone schedule --------------------------------------------------------

    def _schedule(self, bumps: Dict[str, int]):
        for site in sorted(self.sites.values(),
                           key=lambda s: (s.level, s.name)):
            if site.kind == "input":
                site.base = 0
                continue
            base = 1
            for e in self.edges:
                if e.sink != site.name or e.loop:
                    continue
                drv = self.sites[e.driver]
                out = self._out_port(drv)
                v_out = drv.port_virtual(out)
                dist = _manhattan(drv.port_pos(out), site.port_pos(e.pin))
                kmin = max(1, math.ceil((dist + self.cfg.sched_slack)
                                        / self.cfg.sched_cap))
                v_pin = 0 if site.template is None else \
                    site.template.port(e.pin).clock
                base = max(base, v_out + 1 + kmin - v_pin)
            site.base = base + bumps.get(site.name, 0)

    @staticmethod
    def _out_port(site: _Site) -> str:
        if site.template is None:
            return "out"
        return site.template.outputs()[0].name

    # -- assembly ---------------------------------------------------------------

    def run(self) -> PlacedDesign:
        bumps: Dict[str, int] = {}
        for _ in range(self.cfg.max_slack_retries):
            try:
                return self._attempt(bumps)
            except _NeedSlack as e:
                bumps[e.site] = bumps.get(e.site, 0) + 1
        raise Unroutable("no zone schedule satisfied every route")

    def _port_heat(self) -> Dict[Pos, Set[str]]:
        # tax foreign traffic near every port so attach corridors stay
        # open; without this a long route can wall in somebody's output
        heat: Dict[Pos, Set[str]] = {}
        for name, site in self.sites.items():
            ports = [(pin, site.pin_nets[pin]) for pin in site.pins()
                     if pin in site.pin_nets]
            if site.kind == "input":
                ports.append(("out", name))
            elif site.kind != "output":
                ports.extend((p.name, name)
                             for p in site.template.outputs())
            for port, netname in ports:
                px, py = site.port_pos(port)
                for dc in range(-4, 5):
                    for dr in range(-4, 5):
                        heat.setdefault((px + dc, py + dr),
                                        set()).add(netname)
        return heat

    def _attempt(self, bumps: Dict[str, int]) -> PlacedDesign:
        self._schedule(bumps)
        b = Builder(name=self.net.name or "design")
        info: Dict[Pos, _CellInfo] = {}
        placements: Dict[str, Placement] = {}
        output_virtual: Dict[str, int] = {}

        def note(tag_name: str, first: int):
            for c in b._cells[first:]:
                plain = (c.function is CellFunction.NORMAL
                         and c.orientation is CellOrientation.STANDARD
                         and c.polarization is None)
                info[(c.pos.col, c.pos.row)] = _CellInfo(
                    ("site", tag_name), plain, b._virtual[c.id])

        for name in sorted(self.sites,
                           key=lambda n: (self.sites[n].level, n)):
            site = self.sites[name]
            ox, oy = site.origin
            first = len(b._cells)
            if site.kind == "input":
                pin = b.add(ox, oy, 0, function=CellFunction.INPUT,
                            label=name, id=name + "__pin")
                pad = b.add(ox + 1, oy, 0, id=name + "__pad")
                ports = {"pin": pin, "out": pad}
            elif site.kind == "output":
                pre = b.add(ox, oy, site.base, id=name + "__pre")
                out = b.add(ox + 1, oy, site.base,
                            function=CellFunction.OUTPUT, label=name,
                            id=name + "__out")
                ports = {"in": pre, "out": out}
                output_virtual[name] = site.base
            else:
                ports = site.template.place(b, at=site.origin,
                                            clock=site.base,
                                            prefix=name + "__")
            note(name, first)
            placements[name] = Placement(
                name, site.template.name if site.template else None,
                site.origin, site.base, ports)

        self._place_const_fixes(b, info)

        router = _Router(b, info, self.cfg, self.cp.crossing,
                         heat=self._port_heat())
        routes: List[Route] = []
        net_cells: Dict[str, List[Tuple[Pos, int]]] = {}
        plain = sorted((e for e in self.edges if not e.loop),
                       key=lambda e: (self.sites[e.sink].level, e.sink,
                                      e.pin))
        loops = sorted((e for e in self.edges if e.loop),
                       key=lambda e: (e.sink, e.pin))

        for e in plain:
            routes.append(self._route_edge(b, router, net_cells, e, None))

        period = 1
        if loops:
            # every feedback path must take the same number of cycles or
            # the interleaved operations would cross-contaminate
            period = max(self._min_loop_delay(b, router, net_cells, e)
                         for e in loops) + self._period_extra
            try:
                for e in loops:
                    routes.append(self._route_edge(b, router, net_cells, e,
                                                   period))
            except _NeedSlack:
                self._period_extra += 1
                raise

        layout = b.build()
        return PlacedDesign(layout=layout, network=self.net,
                            partition=self.part, plan=self.cp,
                            placements=placements, routes=tuple(routes),
                            period_cycles=period,
                            output_virtual=output_virtual)

    def _place_const_fixes(self, b: Builder, info):
        for name in sorted(self.sites):
            site = self.sites[name]
            for pin in site.pins():
                val = self._const_behind(site.pin_nets[pin])
                if val is None:
                    continue
                px, py = site.port_pos(pin)
                for dc, dr in ((-1, 0), (0, -1), (0, 1), (1, 0)):
                    if not b.occupied(px + dc, py + dr):
                        cid = b.fixed(px + dc, py + dr,
                                      1.0 if val else -1.0,
                                      id="%s__fix_%s" % (name, pin))
                        info[(px + dc, py + dr)] = _CellInfo(
                            ("site", name), False, b._virtual[cid])
                        break
                else:
                    raise Unroutable("no room to pin a constant at %s.%s"
                                     % (name, pin))

    def _min_loop_delay(self, b, router, net_cells, e) -> int:
        for delay in range(1, 7):
            try:
                self._plan_edge(b, router, net_cells, e, delay)
                return delay
            except _NeedSlack:
                continue
        raise Unroutable("feedback into %s.%s will not close"
                         % (e.sink, e.pin))

    def _route_edge(self, b, router, net_cells, e,
                    loop_delay: Optional[int]) -> Route:
        plan_ = self._plan_edge(b, router, net_cells, e, loop_delay)
        ids = router.materialize(plan_, e.net)
        net_cells.setdefault(e.net, []).extend(
            (pos, virt) for pos, virt, orient in plan_.cells
            if orient is CellOrientation.STANDARD)
        return Route(net=e.net, sink=e.sink, pin=e.pin, cells=tuple(ids),
                     loop_delay=plan_.loop_delay)

    def _plan_edge(self, b, router, net_cells, e,
                   loop_delay: Optional[int]) -> _RoutePlan:
        drv = self.sites[e.driver]
        snk = self.sites[e.sink]
        out = self._out_port(drv)
        src_pos = drv.port_pos(out)
        src_virtual = drv.port_virtual(out)
        pin_pos = snk.port_pos(e.pin)
        pin_virtual = snk.base if snk.template is None else \
            snk.base + snk.template.port(e.pin).clock

        starts = [(p, src_virtual) for p in _free_orth(b, src_pos)]
        if loop_delay is None:
            for pos, virt in net_cells.get(e.net, []):
                if virt > pin_virtual - 2:
                    continue
                cell = router.info.get(pos)
                if cell is None or cell.tag != ("net", e.net):
                    continue  # spliced away since it was laid down
                starts.extend((p, virt) for p in _free_orth(b, pos))
        if not starts:
            raise Unroutable("output of %s is walled in" % e.driver)
        goals = _free_orth(b, pin_pos)
        if not goals:
            raise Unroutable("pin %s.%s is walled in" % (e.sink, e.pin))

        if loop_delay is not None:
            k = pin_virtual - 1 - src_virtual + 4 * loop_delay
            if k < 1:
                raise _NeedSlack(e.sink)
            return router.plan(starts, goals, src_pos, pin_pos, e.net,
                               e.sink, loop=(k, loop_delay))
        return router.plan(starts, goals, src_pos, pin_pos, e.net, e.sink,
                           pin_virtual=pin_virtual)


def _free_orth(b: Builder, pos: Pos) -> List[Pos]:
    return [(pos[0] + dc, pos[1] + dr) for dc, dr in _DIRS
            if not b.occupied(pos[0] + dc, pos[1] + dr)]


# -- top level ------------------------------------------------------------

def synthesize(net: LogicNetwork, approach="innovative", *,
               innovative_variant: str = "c", crossing: str = "coplanar",
               config: Optional[SynthConfig] = None,
               per_block: Optional[Dict[str, object]] = None) -> PlacedDesign:
    """Netlist in, verified layout out.

    Raises DrcFailed (with the report attached) if the placed design
    breaks a design rule, Unroutable if no geometry worked at all.
    """
    if not list(net.nodes):
        raise EmptyNetwork("nothing to synthesize")
    low = lower_to_majority(net)
    part = partition(low)
    cp = plan(part, approach, innovative_variant=innovative_variant,
              crossing=crossing, per_block=per_block)
    design = place_and_route(part, cp, config)
    report = drc_check(design.layout)
    if report.errors():
        raise DrcFailed(report)
    return design
