"""Verified gate and wire templates.

Every template is a self-contained layout whose INPUT/OUTPUT cells double
as pin sites when the template is stitched into a larger design (place()
demotes them to plain cells).  Clock indices inside a template are virtual
(unwrapped), so instances can be rebased to any starting zone.

Geometry here leans on a few measured facts about the cell model:

* orthogonal standard neighbours couple strongly and align (weight 1.0);
* diagonal standard neighbours invert at -0.217, which gives a one-step
  inverter and the device-corner interactions;
* two-pitch inline standard cells couple at +0.030, enough to hop a gap;
* standard and rotated cells at orthogonal or diagonal offsets do not
  couple at all (exact symmetry cancellation); the knight offset (2,1)
  couples at +-0.018 and is the only standard/rotated handoff;
* orthogonal rotated neighbours couple at -1.47, so a rotated run flips
  value every cell and parity must be balanced.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Tuple

from .compose import Builder
from .layout import Cell, CellFunction, CellOrientation, GridPosition, Layout

ROT = CellOrientation.ROTATED


class LibraryError(Exception):
    pass


class UnknownTemplate(LibraryError):
    pass


# -- reference logic ----------------------------------------------------

def maj3(a: int, b: int, c: int) -> int:
    return 1 if a + b + c >= 2 else 0


def maj5(a: int, b: int, c: int, d: int, e: int) -> int:
    return 1 if a + b + c + d + e >= 3 else 0


def inv(a: int) -> int:
    return 1 - a


def mux_ref(a: int, b: int, s: int) -> int:
    """Two-way select: a when s=0, b when s=1."""
    return b if s else a


def xor_ref(a: int, b: int) -> int:
    return a ^ b


def xor3_ref(a: int, b: int, c: int) -> int:
    return a ^ b ^ c


def sram_step(state: int, e: int, wr: int, d: int) -> Tuple[int, int]:
    """One stored-bit update: returns (next_state, out).

    e=1, wr=1 writes d; e=1, wr=0 reads (out follows state); e=0 holds
    with the output forced low.
    """
    sel = e & wr
    nxt = mux_ref(state, d, sel)
    out = nxt & e & inv(wr)
    return nxt, out


# -- template machinery -------------------------------------------------

@dataclass(frozen=True)
class Port:
    name: str
    cell: str
    kind: str  # "in" | "out"
    clock: int  # virtual clock of the port cell

    def __post_init__(self):
        if self.kind not in ("in", "out"):
            raise LibraryError("port kind must be in/out: %r" % (self.kind,))


@dataclass(frozen=True)
class Template:
    name: str
    summary: str
    layout: Layout
    ports: Tuple[Port, ...]
    virtual: Dict[str, int]
    logic: Optional[Callable[[Dict[str, int]], Dict[str, int]]] = None

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise UnknownTemplate("template %s has no port %r" % (self.name, name))

    def inputs(self) -> List[Port]:
        return [p for p in self.ports if p.kind == "in"]

    def outputs(self) -> List[Port]:
        return [p for p in self.ports if p.kind == "out"]

    @property
    def latency(self) -> int:
        """Zone steps from the earliest input port to the latest output."""
        return (max(p.clock for p in self.outputs())
                - min(p.clock for p in self.inputs()))

    def port_pos(self, name: str) -> GridPosition:
        return self.layout.cell(self.port(name).cell).pos

    def place(self, builder: Builder, at: Tuple[int, int] = (0, 0),
              clock: int = 0, prefix: str = "",
              keep: Optional[Dict[str, str]] = None) -> Dict[str, str]:
        """Copy this template into builder as a component.

        Port cells become plain cells unless named in keep, which maps
        port name -> label to keep them as pins.  Returns port name ->
        placed cell id.
        """
        keep = keep or {}
        dc, dr = at
        id_map: Dict[str, str] = {}
        keep_cells = {self.port(n).cell: (self.port(n).kind, lbl)
                      for n, lbl in keep.items()}
        port_cells = {p.cell for p in self.ports}
        for cell in self.layout.cells:
            fn = cell.function
            label = cell.label
            if cell.id in keep_cells:
                kind, lbl = keep_cells[cell.id]
                fn = CellFunction.INPUT if kind == "in" else CellFunction.OUTPUT
                label = lbl
            elif cell.id in port_cells:
                fn = CellFunction.NORMAL
                label = None
            nid = builder.add(cell.pos.col + dc, cell.pos.row + dr,
                              self.virtual[cell.id] + clock,
                              orientation=cell.orientation, function=fn,
                              label=label, polarization=cell.polarization,
                              device=cell.id in self.layout.devices,
                              id=prefix + cell.id)
            id_map[cell.id] = nid
        for x in self.layout.crossings:
            builder.add_crossing(x.kind,
                                 tuple(id_map[i] for i in x.through),
                                 tuple(id_map[i] for i in x.hop))
        return {p.name: id_map[p.cell] for p in self.ports}


def instantiate(template: Template, origin: GridPosition,
                base_zone: int = 0) -> List[Cell]:
    """Template cells translated to origin, zones rebased by base_zone.

    Pure transform; use Template.place to stitch into a Builder instead.
    """
    return [replace(c,
                    pos=c.pos.translate(origin.col, origin.row),
                    clock=(template.virtual[c.id] + base_zone) % 4)
            for c in template.layout.cells]


def _finish(b: Builder, name: str, summary: str,
            ports: List[Tuple[str, str, str]],
            logic: Optional[Callable[[Dict[str, int]], Dict[str, int]]]) -> Template:
    virtual = b.virtual_clocks()
    return Template(name=name, summary=summary, layout=b.build(),
                    ports=tuple(Port(n, cid, kind, virtual[cid])
                                for n, cid, kind in ports),
                    virtual=virtual, logic=logic)


def _pin(b: Builder, col: int, row: int, clock: int, label: str,
         orientation: CellOrientation = CellOrientation.STANDARD) -> str:
    return b.add(col, row, clock, orientation=orientation,
                 function=CellFunction.INPUT, label=label)


def _tap(b: Builder, col: int, row: int, clock: int, label: str,
         orientation: CellOrientation = CellOrientation.STANDARD) -> str:
    return b.add(col, row, clock, orientation=orientation,
                 function=CellFunction.OUTPUT, label=label)


# -- wires and plumbing --------------------------------------------------

def _wire() -> Template:
    b = Builder(name="wire")
    a = _pin(b, 0, 0, 0, "a")
    b.add(1, 0, 0)
    b.wire([(2, 0), (5, 0)], 1, 2)
    b.add(6, 0, 3)
    out = _tap(b, 7, 0, 3, "out")
    return _finish(b, "wire", "straight standard wire, one full clock cycle",
                   [("a", a, "in"), ("out", out, "out")],
                   lambda v: {"out": v["a"]})


def _wire_rotated() -> Template:
    """Rotated-body wire with standard ends.

    Standard-to-rotated handoff only couples at the knight offset: the
    (+2,+1) entry keeps sign, the (+2,-1) exit flips, and the three
    inverting links inside the rotated run make the total flip count even.
    """
    b = Builder(name="wire_rotated")
    a = _pin(b, 0, 0, 0, "a")
    b.add(1, 0, 0)
    b.run([(3, 1), (4, 1)], [1, 1], orientation=ROT)
    b.run([(5, 1), (6, 1)], [2, 2], orientation=ROT)
    b.add(8, 0, 3)
    out = _tap(b, 9, 0, 3, "out")
    return _finish(b, "wire_rotated", "wire with a rotated middle section",
                   [("a", a, "in"), ("out", out, "out")],
                   lambda v: {"out": v["a"]})


def _corner() -> Template:
    b = Builder(name="corner")
    a = _pin(b, 0, 0, 0, "a")
    b.add(1, 0, 0)
    b.run([(2, 0), (2, 1)], [1, 1])
    b.add(2, 2, 2)
    out = _tap(b, 2, 3, 2, "out")
    return _finish(b, "corner", "right-angle turn",
                   [("a", a, "in"), ("out", out, "out")],
                   lambda v: {"out": v["a"]})


def _fanout() -> Template:
    b = Builder(name="fanout")
    a = _pin(b, -2, 0, 0, "a")
    b.add(-1, 0, 0)
    b.run([(0, -1), (0, 0), (0, 1)], [1, 1, 1])
    b.add(0, -2, 2)
    p = _tap(b, 0, -3, 2, "out0")
    b.add(0, 2, 2)
    q = _tap(b, 0, 3, 2, "out1")
    return _finish(b, "fanout", "one input split to two branches",
                   [("a", a, "in"), ("out0", p, "out"), ("out1", q, "out")],
                   lambda v: {"out0": v["a"], "out1": v["a"]})


def _inverter() -> Template:
    """Diagonal-step inverter: the -0.217 diagonal link flips the value."""
    b = Builder(name="inverter")
    a = _pin(b, 0, 0, 0, "a")
    b.add(1, 0, 0)
    b.add(2, 1, 1)
    out = _tap(b, 3, 1, 1, "out")
    return _finish(b, "inverter", "single-step inverter on a diagonal jog",
                   [("a", a, "in"), ("out", out, "out")],
                   lambda v: {"out": inv(v["a"])})


# -- majority gates ------------------------------------------------------

def _maj3() -> Template:
    b = Builder(name="maj3")
    a = _pin(b, -2, 0, 0, "a")
    b.add(-1, 0, 0)
    bb = _pin(b, 0, -2, 0, "b")
    b.add(0, -1, 0)
    c = _pin(b, 0, 2, 0, "c")
    b.add(0, 1, 0)
    b.add(0, 0, 1, device=True, id="dev")
    b.add(1, 0, 2)
    out = _tap(b, 2, 0, 2, "out")
    return _finish(b, "maj3", "three-input majority device",
                   [("a", a, "in"), ("b", bb, "in"), ("c", c, "in"),
                    ("out", out, "out")],
                   lambda v: {"out": maj3(v["a"], v["b"], v["c"])})


def _maj5() -> Template:
    """Five-input majority from four three-input devices.

    maj5(a..e) = maj3(e, g2, g3) with g1 = maj3(a,b,c), g2 = maj3(a,b,d),
    g3 = maj3(c,d,g1).  The g2 output cannot reach the final device
    without crossing the d feed, so it hops it with a logical crossing
    (through-run z2, hop z0 mod 4).
    """
    m = TEMPLATES["maj3"]
    b = Builder(name="maj5")

    m.place(b, at=(-4, -4), clock=1, prefix="g1_")
    m.place(b, at=(-4, 4), clock=1, prefix="g2_")
    m.place(b, at=(0, 0), clock=3, prefix="g3_")
    m.place(b, at=(7, 4), clock=5, prefix="f_")

    # a forks to g1 south arm and g2 north arm along two inner rails.
    a = _pin(b, -13, 0, 0, "a")
    b.wire([(-13, -1), (-13, -2), (-5, -2)], 0)
    b.wire([(-13, 1), (-13, 2), (-5, 2)], 0)
    # b forks around the outside to both west arms.
    bp = _pin(b, -16, 0, 0, "b")
    b.wire([(-16, -1), (-16, -4), (-7, -4)], 0)
    b.wire([(-16, 1), (-16, 4), (-7, 4)], 0)
    # c: north port, straight into g1, branch east then down to g3 north.
    c = _pin(b, -4, -8, 0, "c")
    b.add(-4, -7, 0)
    b.wire([(-3, -8), (0, -8), (0, -3)], 0, 2)
    # d: south-west port; short branch up to g2, long branch east that
    # carries the crossing through-run on its way to g3 south.
    d = _pin(b, -9, 9, 0, "d")
    b.add(-8, 9, 0)
    b.wire([(-8, 8), (-8, 7), (-4, 7)], 0)
    b.run([(-7, 9), (-6, 9), (-5, 9), (-4, 9)], [0] * 4)
    b.run([(-3, 9), (-2, 9), (-1, 9), (0, 9), (1, 9), (2, 9),
           (2, 8), (2, 7), (2, 6)], [1] * 9)
    thr = b.run([(2, 5), (2, 4), (2, 3)], [2] * 3)
    b.run([(2, 2), (1, 2)], [2] * 2)
    # e: straight feed into the final south arm.
    e = _pin(b, 7, 18, 0, "e")
    b.add(7, 17, 0)
    b.wire([(7, 16), (7, 7)], 0, 4)
    # g1 output wraps down into g3 west.
    b.wire([(-2, -3), (-2, -1)], 3)
    # g2 output crosses the d feed (hop pair around the gap at (2,4)).
    pre = b.run([(-1, 4), (0, 4), (1, 4)], [4] * 3)
    post = b.run([(3, 4), (4, 4)], [4] * 2)
    b.add_crossing("logical", tuple(thr), (pre[-1], post[0]))
    # g3 output runs east and up into the final north arm.
    b.wire([(3, 0), (7, 0), (7, 1)], 5)
    out = _tap(b, 10, 4, 7, "out")
    return _finish(b, "maj5", "five-input majority, four-device network",
                   [("a", a, "in"), ("b", bp, "in"), ("c", c, "in"),
                    ("d", d, "in"), ("e", e, "in"), ("out", out, "out")],
                   lambda v: {"out": maj5(v["a"], v["b"], v["c"], v["d"], v["e"])})


# -- crossings ------------------------------------------------------------

def _crossing_coplanar() -> Template:
    """Rotated channel through a standard wire.

    The rotated run is invisible to the standard wire (exact zero
    coupling), so the standard channel simply hops the shared position on
    its own two-pitch link with no clocking constraint.
    """
    b = Builder(name="crossing_coplanar")
    a = _pin(b, -6, -1, 0, "a")
    b.add(-5, -1, 0)
    b.run([(-3, 0), (-2, 0)], [1, 1], orientation=ROT)
    rot = b.run([(-1, 0), (0, 0), (1, 0), (2, 0)], [2] * 4, orientation=ROT)
    b.add(4, -1, 3)
    aout = _tap(b, 5, -1, 3, "a_out")
    bv = _pin(b, 0, -4, 0, "b")
    b.add(0, -3, 0)
    hop1 = b.run([(0, -2), (0, -1)], [1, 1])
    hop2 = b.run([(0, 1), (0, 2)], [1, 1])
    b.add(0, 3, 2)
    bout = _tap(b, 0, 4, 2, "b_out")
    b.add_crossing("coplanar", (rot[1],), (hop1[-1], hop2[0]))
    return _finish(b, "crossing_coplanar",
                   "rotated channel crossing a standard wire",
                   [("a", a, "in"), ("b", bv, "in"),
                    ("a_out", aout, "out"), ("b_out", bout, "out")],
                   lambda v: {"a_out": v["a"], "b_out": v["b"]})


def _crossing_logical() -> Template:
    """Shared-zone crossing: the through run sits two zones ahead of the
    hop pair, so it is released (erased) while the hop switches across the
    gap on the two-pitch link."""
    b = Builder(name="crossing_logical")
    a = _pin(b, -3, 0, 1, "a")
    b.add(-2, 0, 1)
    b.run([(-1, 0), (0, 0)], [2, 2])
    thr = b.run([(1, 0), (2, 0), (3, 0)], [3, 3, 3])
    b.add(4, 0, 4)
    aout = _tap(b, 5, 0, 4, "a_out")
    bv = _pin(b, 2, -4, 0, "b")
    b.add(2, -3, 0)
    hop1 = b.run([(2, -2), (2, -1)], [1, 1])
    hop2 = b.run([(2, 1), (2, 2)], [1, 1])
    b.add(2, 3, 2)
    bout = _tap(b, 2, 4, 2, "b_out")
    b.add_crossing("logical", tuple(thr), (hop1[-1], hop2[0]))
    return _finish(b, "crossing_logical",
                   "standard-cell crossing clocked two zones apart",
                   [("a", a, "in"), ("b", bv, "in"),
                    ("a_out", aout, "out"), ("b_out", bout, "out")],
                   lambda v: {"a_out": v["a"], "b_out": v["b"]})


# -- multiplexers ----------------------------------------------------------

def _mux_logic(v: Dict[str, int]) -> Dict[str, int]:
    return {"out": mux_ref(v["a"], v["b"], v["s"])}


def _mux_core(b: Builder) -> str:
    """Shared three-device spine: and1 at (0,0) picks the NOT-s arm coming
    down column 0, and2 at (6,0) the plain-s arm down column 6, the middle
    device ORs them through its +1 bias.  Both select arms and both operand
    arms must arrive as zone-2 runs."""
    b.add(0, 0, 3, device=True, id="and1")
    b.fixed(0, 1, -1.0)
    b.add(6, 0, 3, device=True, id="and2")
    b.fixed(6, 1, -1.0)
    b.run([(1, 0), (2, 0)], [4, 4])
    b.run([(5, 0), (4, 0)], [4, 4])
    b.add(3, 0, 5, device=True, id="orr")
    b.fixed(3, -1, 1.0)
    b.add(3, 1, 6)
    return _tap(b, 3, 2, 6, "out")


def _mux_cell() -> Template:
    """Cell-level two-way select: single-cell operand pads and the
    inversion fused into the select branch as a diagonal jog.

    NOT s rides the jog straight off the select pin onto a buffer pair
    that touches nothing else; the weak jog is the pair's only field, so
    the inverted value latches before the arm zone runs with it."""
    b = Builder(name="mux_cell")
    a = _pin(b, -5, 0, 0, "a")
    b.add(-6, 0, 0)
    b.run([(-4, 0), (-3, 0)], [1, 1])
    b.run([(-2, 0), (-1, 0)], [2, 2])
    bp = _pin(b, 11, 0, 0, "b")
    b.add(12, 0, 0)
    b.run([(10, 0), (9, 0)], [1, 1])
    b.run([(8, 0), (7, 0)], [2, 2])
    s = _pin(b, 1, -5, 0, "s")
    b.run([(0, -4), (0, -3)], [1, 1])  # fed only by the jog from (1,-5)
    b.run([(0, -2), (0, -1)], [2, 2])
    b.wire([(2, -5), (6, -5)], 0)
    b.run([(6, -4), (6, -3)], [1, 1])
    b.run([(6, -2), (6, -1)], [2, 2])
    out = _mux_core(b)
    return _finish(b, "mux_cell", "two-way select, cell-level build",
                   [("a", a, "in"), ("b", bp, "in"), ("s", s, "in"),
                    ("out", out, "out")], _mux_logic)


def _mux_a() -> Template:
    """Textbook AND-OR select: a fanout junction distributes the select,
    the west branch is inverted on a jog, and three spaced majority
    devices compute or(and(a, not s), and(b, s)).  Slowest and largest
    of the select templates."""
    b = Builder(name="mux_a")
    a = _pin(b, -13, 0, 0, "a")
    b.add(-12, 0, 0)
    b.wire([(-11, 0), (-4, 0)], 1, 4)
    bp = _pin(b, 19, 0, 0, "b")
    b.add(18, 0, 0)
    b.wire([(17, 0), (10, 0)], 1, 4)
    s = _pin(b, 3, -9, 0, "s")
    b.add(3, -8, 0)
    b.run([(2, -7), (3, -7), (4, -7)], [1, 1, 1])
    b.run([(1, -7), (0, -7), (-1, -7), (-2, -7)], [2] * 4)
    b.run([(-3, -6), (-3, -5)], [3, 3])  # fed only by the jog from (-2,-7)
    b.run([(-3, -4), (-3, -3), (-3, -2), (-3, -1)], [4] * 4)
    b.run([(5, -7), (6, -7)], [2, 2])
    b.wire([(7, -7), (9, -7), (9, -1)], 3, 4)
    b.add(-3, 0, 5, device=True, id="and1")
    b.fixed(-3, 1, -1.0)
    b.add(9, 0, 5, device=True, id="and2")
    b.fixed(9, 1, -1.0)
    b.wire([(-2, 0), (2, 0)], 6)
    b.wire([(8, 0), (4, 0)], 6)
    b.add(3, 0, 7, device=True, id="orr")
    b.fixed(3, -1, 1.0)
    b.add(3, 1, 8)
    out = _tap(b, 3, 2, 8, "out")
    return _finish(b, "mux_a", "two-way select, spaced AND-OR gates",
                   [("a", a, "in"), ("b", bp, "in"), ("s", s, "in"),
                    ("out", out, "out")], _mux_logic)


def _mux_b() -> Template:
    """Select with the inverted select pushed to the output gate:
    maj3(or(a,s), and(b,s), not s).

    The final device takes three live inputs, so its north face carries
    the NOT-s arm instead of a bias cell and the select tree fans three
    ways.  One gate stage cheaper than the AND-OR build.
    """
    b = Builder(name="mux_b")
    # operand feeds, west (a) and east (b)
    a = _pin(b, -8, 0, 0, "a")
    b.add(-7, 0, 0)
    b.run([(-6, 0), (-5, 0)], [1, 1])
    b.run([(-4, 0), (-3, 0)], [2, 2])
    b.run([(-2, 0), (-1, 0)], [3, 3])
    bp = _pin(b, 14, 0, 0, "b")
    b.add(13, 0, 0)
    b.run([(12, 0), (11, 0)], [1, 1])
    b.run([(10, 0), (9, 0)], [2, 2])
    b.run([(8, 0), (7, 0)], [3, 3])
    # select trunk comes up from the south and forks three ways
    s = _pin(b, 3, 10, 0, "s")
    b.add(3, 9, 0)
    b.run([(2, 8), (3, 8), (4, 8)], [1, 1, 1])
    b.run([(1, 8), (0, 8), (0, 7), (0, 6), (0, 5)], [2] * 5)
    b.run([(0, 4), (0, 3), (0, 2), (0, 1)], [3] * 4)
    b.run([(5, 8), (6, 8), (6, 7), (6, 6), (6, 5)], [2] * 5)
    b.run([(6, 4), (6, 3), (6, 2), (6, 1)], [3] * 4)
    # middle fork: NOT s on a jog-fed pair, piped up to the output gate
    b.run([(3, 7), (3, 6)], [2, 2])
    b.run([(2, 5), (2, 4)], [3, 3])  # fed only by the jog from (3,6)
    b.run([(2, 3), (2, 2)], [4, 4])
    b.run([(3, 2), (3, 1)], [5, 5])
    # devices: or west, and east, the select gate in the middle
    b.add(0, 0, 4, device=True, id="or1")
    b.fixed(0, -1, 1.0)
    b.add(6, 0, 4, device=True, id="and1")
    b.fixed(6, -1, -1.0)
    b.run([(1, 0), (2, 0)], [5, 5])
    b.run([(5, 0), (4, 0)], [5, 5])
    b.add(3, 0, 6, device=True, id="sel")
    b.run([(3, -1), (3, -2)], [7, 7])
    out = _tap(b, 3, -3, 7, "out")
    return _finish(b, "mux_b", "two-way select, live third input at the "
                   "output gate",
                   [("a", a, "in"), ("b", bp, "in"), ("s", s, "in"),
                    ("out", out, "out")], _mux_logic)


def _mux_c() -> Template:
    """Select as one guard gate plus a five-input vote.

    out = maj5(g, g, b, s, 1) with g = and(a, not s).  The doubled g and
    the constant collapse two of the five-vote's internal gates to plain
    wires, leaving g's gate, the three-live-input core maj3(b, s, g) and
    an OR stage; g fans out to feed both.
    """
    b = Builder(name="mux_c")
    # a feed and the guard gate
    a = _pin(b, -6, 0, 0, "a")
    b.add(-5, 0, 0)
    b.run([(-4, 0), (-3, 0)], [1, 1])
    b.run([(-2, 0), (-1, 0)], [2, 2])
    b.add(0, 0, 3, device=True, id="g")
    b.fixed(0, -1, -1.0)
    # select trunk: jog-fed NOT-s pair into g, live branch to the core
    s = _pin(b, 1, 8, 0, "s")
    b.add(1, 7, 0)
    b.run([(0, 6), (0, 5)], [1, 1])  # fed only by the jog from (1,7)
    b.run([(0, 4), (0, 3), (0, 2), (0, 1)], [2] * 4)
    b.run([(2, 7), (3, 7)], [1, 1])
    b.run([(4, 7), (5, 7)], [2, 2])
    b.run([(5, 6), (5, 5)], [3, 3])
    b.run([(5, 4), (5, 3)], [4, 4])
    b.run([(5, 2), (5, 1)], [5, 5])
    # g output forks: east into the core, north toward the OR stage
    b.run([(1, 0), (2, 0)], [4, 4])
    b.run([(3, 0), (4, 0)], [5, 5])
    b.run([(2, -1), (2, -2)], [5, 5])
    b.run([(2, -3), (2, -4)], [6, 6])
    b.run([(2, -5), (3, -5), (4, -5), (5, -5), (6, -5), (7, -5), (7, -4)],
          [7] * 7)
    # core and its output run up to the OR stage
    b.add(5, 0, 6, device=True, id="core")
    b.run([(5, -1), (5, -2), (5, -3), (6, -3)], [7] * 4)
    bp = _pin(b, 17, 0, 0, "b")
    b.add(16, 0, 0)
    b.run([(15, 0), (14, 0)], [1, 1])
    b.run([(13, 0), (12, 0)], [2, 2])
    b.run([(11, 0), (10, 0)], [3, 3])
    b.run([(9, 0), (8, 0)], [4, 4])
    b.run([(7, 0), (6, 0)], [5, 5])
    b.add(7, -3, 8, device=True, id="or1")
    b.fixed(7, -2, 1.0)
    b.add(8, -3, 9)
    out = _tap(b, 9, -3, 9, "out")
    return _finish(b, "mux_c", "two-way select, guard gate plus "
                   "collapsed five-vote",
                   [("a", a, "in"), ("b", bp, "in"), ("s", s, "in"),
                    ("out", out, "out")], _mux_logic)


# -- memory ----------------------------------------------------------------

def _sram() -> Template:
    """One stored bit with enable/write steering.

    sel = and(en, wr) picks the steering leg: a write routes d into the
    loop, anything else refreshes the loop from itself.  The stored bit
    circulates a single-zone snake from the or device back around to the
    keep leg's west arm; with the legs one zone after the snake, the
    snake is holding last cycle's bit exactly when the legs sample it,
    which is the whole memory.  The read path ands the fresh bit with en
    and NOT wr, so a read needs en=1, wr=0, a write cycle reports 0, and
    idle cycles (en=0) report 0 while the bit keeps circulating.  en and
    wr ride long padded detours to the read gates so every gate sees the
    same cycle.
    """
    b = Builder(name="sram")
    en = _pin(b, 0, -10, 0, "en")
    b.add(0, -9, 0)
    wr = _pin(b, 2, -11, 0, "wr")
    b.add(2, -10, 0)
    d = _pin(b, 8, -8, 0, "d")
    b.add(8, -7, 0)
    # select gate: and(en, wr), output south, then a jogged NOT-sel into
    # the keep leg and a live branch across to the load leg
    b.run([(0, -8), (0, -7), (1, -7)], [1] * 3)
    b.run([(2, -9), (2, -8)], [1, 1])
    b.add(2, -7, 2, device=True, id="selg")
    b.fixed(3, -7, -1.0)
    b.run([(2, -6), (2, -5), (2, -4), (2, -3), (1, -3)], [3] * 5)
    b.run([(0, -2), (0, -1)], [4, 4])  # fed only by the jog from (1,-3)
    b.run([(3, -4), (4, -4), (5, -4), (6, -4), (6, -3), (6, -2), (6, -1)],
          [4] * 7)
    # d feed, straight down the east column into the load leg
    b.run([(8, -6), (8, -5)], [1, 1])
    b.run([(8, -4), (8, -3)], [2, 2])
    b.run([(8, -2), (8, -1)], [3, 3])
    b.run([(8, 0), (7, 0)], [4, 4])
    # steering legs and the merge
    b.add(0, 0, 5, device=True, id="keep")
    b.fixed(0, 1, -1.0)
    b.add(6, 0, 5, device=True, id="load")
    b.fixed(6, 1, -1.0)
    b.run([(1, 0), (2, 0)], [6, 6])
    b.run([(5, 0), (4, 0)], [6, 6])
    b.add(3, 0, 7, device=True, id="orr")
    b.fixed(3, -1, 1.0)
    # the stored-bit snake plus the branch east to the read path
    b.run([(3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (0, 3), (-1, 3),
           (-2, 3)], [8] * 8)
    mloop = _tap(b, -3, 3, 8, "mloop")
    b.run([(-3, 2), (-3, 1), (-3, 0), (-2, 0), (-1, 0)], [8] * 5)
    b.run([(4, 3), (5, 3), (6, 3), (7, 3)], [8] * 4)
    # en detour: over the top, down the far east lane, back along the
    # south face.  Row 7, not row 6: row 6 would put the lane two cells
    # inline from the read gate's fixed bias, and that little constant
    # nucleates a wrong domain in the middle of the run long before the
    # real wave can get there.
    b.add(-1, -8, 1)
    b.run([(-1, -9), (-1, -10)], [2, 2])
    b.run([(-1, -11), (-1, -12), (-1, -13)], [3] * 3)
    b.run([(0, -13), (1, -13), (2, -13), (3, -13), (4, -13), (5, -13)],
          [4] * 6)
    b.run([(6, -13), (7, -13), (8, -13), (9, -13), (10, -13), (11, -13),
           (12, -13), (13, -13), (14, -13), (15, -13), (15, -12),
           (15, -11), (15, -10)], [5] * 13)
    b.run([(15, -9), (15, -8), (15, -7), (15, -6), (15, -5), (15, -4),
           (15, -3), (15, -2), (15, -1), (15, 0), (15, 1), (15, 2)],
          [6] * 12)
    b.run([(15, 3), (15, 4), (15, 5), (15, 6), (15, 7), (14, 7), (13, 7),
           (12, 7), (11, 7), (10, 7), (9, 7), (8, 7), (8, 6)], [7] * 13)
    b.run([(8, 5), (8, 4)], [8, 8])
    # wr crosses the top, flips through the jogged inverter at the end
    # of its row, and NOT wr rides column 11 down to the second read
    # gate.  Inverting up here keeps the jog-fed pair away from every
    # other live run; next to the read gate it would share its switch
    # phase with the gate's west arm one diagonal over, and a jog seed
    # cannot outvote that.
    b.run([(3, -10), (4, -10)], [1, 1])
    b.run([(5, -10), (6, -10)], [2, 2])
    b.run([(7, -10), (8, -10)], [3, 3])
    b.run([(9, -10), (10, -10)], [4, 4])
    b.run([(11, -9), (11, -8)], [5, 5])  # fed only by the jog from (10,-10)
    b.run([(11, -7), (11, -6)], [6, 6])
    b.run([(11, -5), (11, -4)], [7, 7])
    b.run([(11, -3), (11, -2)], [8, 8])
    b.run([(11, -1), (11, 0)], [9, 9])
    b.run([(11, 1), (11, 2)], [10, 10])
    # read path: and with en, then with NOT wr
    b.add(8, 3, 9, device=True, id="outa")
    b.fixed(8, 2, -1.0)
    b.run([(9, 3), (10, 3)], [10, 10])
    b.add(11, 3, 11, device=True, id="outb")
    b.fixed(11, 4, -1.0)
    b.add(12, 3, 12)
    out = _tap(b, 13, 3, 12, "out")
    return _finish(b, "sram", "one stored bit with enable/write steering",
                   [("en", en, "in"), ("wr", wr, "in"), ("d", d, "in"),
                    ("mloop", mloop, "out"), ("out", out, "out")],
                   None)


# -- exclusive-or ----------------------------------------------------------

def _xor2() -> Template:
    """a XOR b as (a AND NOT b) OR (NOT a AND b).

    Each complement forks off its operand's input pad, loops around the
    outside of the cascade and comes back in over a diagonal jog.  The
    jog lands on a buffer pair that touches nothing but the jog itself,
    keeping the inverted wires clear of diagonal crosstalk from the loop.
    """
    b = Builder(name="xor2")
    a = _pin(b, -6, 0, 0, "a")
    b.add(-5, 0, 0)
    b.run([(-4, 0), (-3, 0)], [1, 1])
    b.run([(-2, 0), (-1, 0)], [2, 2])
    bp = _pin(b, 12, 0, 0, "b")
    b.add(11, 0, 0)
    b.run([(10, 0), (9, 0)], [1, 1])
    b.run([(8, 0), (7, 0)], [2, 2])
    b.wire([(-6, -1), (-6, -5), (5, -5)], 0)  # NOT-a loop, jog at (5,-5)
    b.run([(6, -4), (6, -3)], [1, 1])
    b.run([(6, -2), (6, -1)], [2, 2])
    b.wire([(12, 1), (12, 5), (1, 5)], 0)  # NOT-b loop, jog at (1,5)
    b.run([(0, 4), (0, 3)], [1, 1])
    b.run([(0, 2), (0, 1)], [2, 2])
    b.add(0, 0, 3, device=True, id="and1")
    b.fixed(0, -1, -1.0)
    b.add(6, 0, 3, device=True, id="and2")
    b.fixed(6, 1, -1.0)
    b.run([(1, 0), (2, 0)], [4, 4])
    b.run([(5, 0), (4, 0)], [4, 4])
    b.add(3, 0, 5, device=True, id="orr")
    b.fixed(3, -1, 1.0)
    b.add(3, 1, 6)
    out = _tap(b, 3, 2, 6, "out")
    return _finish(b, "xor2", "two-input exclusive-or",
                   [("a", a, "in"), ("b", bp, "in"), ("out", out, "out")],
                   lambda v: {"out": xor_ref(v["a"], v["b"])})


def _xor3() -> Template:
    """Parity of three inputs from two xor2 blocks.

    The first block's output leaves south, turns east, and crosses that
    block's NOT-b loop on the column right beside the b pin.  The
    crossing has to sit next to the loop's driver: a releasing hop pair
    starts a switch at full strength, and a through segment whose own
    wave arrives many cells later can lock onto that residue instead.
    Two cells from a pinned input the legitimate signal is always there
    first.
    """
    x = TEMPLATES["xor2"]
    b = Builder(name="xor3")
    x.place(b, at=(0, 0), clock=0, prefix="x1_", keep={"a": "a", "b": "b"})
    # Two cells per zone: a longer run beside the released loop tail
    # drifts into the tail's residue faster than its own wave can cross.
    b.run([(3, 3), (4, 3)], [6, 6])
    b.run([(5, 3), (6, 3)], [7, 7])
    b.run([(7, 3), (8, 3)], [8, 8])
    b.run([(9, 3), (10, 3)], [9, 9])
    hop_w = b.add(11, 3, 10)
    hop_e = b.run([(13, 3), (14, 3)], [10, 10])
    thr = (b.id_at(12, 2), b.id_at(12, 3), b.id_at(12, 4))
    b.add_crossing("logical", thr, (hop_w, hop_e[0]))
    x.place(b, at=(21, 3), clock=11, prefix="x2_",
            keep={"b": "c", "out": "out"})
    return _finish(b, "xor3", "three-input parity from two xor2 blocks",
                   [("a", b.id_at(-6, 0), "in"), ("b", b.id_at(12, 0), "in"),
                    ("c", b.id_at(33, 3), "in"),
                    ("out", b.id_at(24, 5), "out")],
                   lambda v: {"out": xor3_ref(v["a"], v["b"], v["c"])})


TEMPLATES: Dict[str, Template] = {}
for _fn in (_wire, _wire_rotated, _corner, _fanout, _inverter, _maj3,
            _maj5, _crossing_coplanar, _crossing_logical, _mux_a, _mux_b,
            _mux_c, _mux_cell, _xor2, _xor3, _sram):
    _t = _fn()
    TEMPLATES[_t.name] = _t


def get(name: str) -> Template:
    try:
        return TEMPLATES[name]
    except KeyError:
        raise UnknownTemplate(name) from None


def names() -> List[str]:
    return sorted(TEMPLATES)
