"""Text file formats: layouts, netlists, waveforms, truth tables, traces.

Everything is line-oriented UTF-8 with # comments and a versioned header
so golden files diff cleanly.  Serializers are deterministic; parsers
report errors with 1-based line numbers.

Layout (.qcl):
    qca-layout 1 [name]
    pitch 20
    <col> <row> <standard|rotated> <normal|fixed|input|output|device> <zone> [extra]
    crossing <coplanar|logical> through <col,row> ... hop <col,row> ...
The extra column carries the label for input/output cells and the +1/-1
polarization for fixed cells.  Cell ids are per-file (c0, c1, ... in
line order), so round-tripping preserves structure, not id strings.

Netlist (.net):
    input <name>
    <name> = maj3(a,b,c) | maj5(a,b,c,d,e) | mux(a,b,s) | xor(a,b)
             | inv(a) | loop(<name>)
    output <name> = <name>
Arguments may be net names or the constants 0/1.

Waveform (.qcw):
    qca-waveform 1
    <input name> <bit> <bit> ...

Truth table (.tt):
    qca-table 1
    inputs <names...>
    outputs <names...>
    <in bits> | <out bits>
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .layout import (Cell, CellFunction, CellOrientation, Crossing,
                     GridPosition, Layout, DEFAULT_PITCH_NM,
                     DEFAULT_CELL_SIZE_NM, DEFAULT_DOT_OFFSET_NM)
from .network import LogicNetwork, Node, NodeKind, network
from .physics import DEFAULT_PARAMS, PhysicalParams
from .simulate import InputWaveform, SimTrace


class ParseError(Exception):
    def __init__(self, lineno: int, message: str):
        super().__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _content_lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line


# -- layouts ----------------------------------------------------------------

_FN_TOKEN = {CellFunction.NORMAL: "normal", CellFunction.FIXED: "fixed",
             CellFunction.INPUT: "input", CellFunction.OUTPUT: "output"}
_TOKEN_FN = {v: k for k, v in _FN_TOKEN.items()}


def _num(x: float) -> str:
    return ("%g" % x)


def serialize_layout(layout: Layout) -> str:
    out = ["qca-layout 1" + (" " + layout.name if layout.name else "")]
    out.append("pitch %s" % _num(layout.pitch_nm))
    if layout.cell_size_nm != DEFAULT_CELL_SIZE_NM:
        out.append("cellsize %s" % _num(layout.cell_size_nm))
    if layout.dot_offset_nm != DEFAULT_DOT_OFFSET_NM:
        out.append("dotoffset %s" % _num(layout.dot_offset_nm))
    for c in layout.cells:  # Layout keeps cells position-sorted
        fn = "device" if c.id in layout.devices else _FN_TOKEN[c.function]
        line = "%d %d %s %s %d" % (c.pos.col, c.pos.row,
                                   c.orientation.value, fn, c.clock)
        if c.function in (CellFunction.INPUT, CellFunction.OUTPUT):
            line += " " + c.label
        elif c.function is CellFunction.FIXED:
            line += " %+d" % int(c.polarization)
        out.append(line)
    pos = {c.id: c.pos for c in layout.cells}

    def key(ids):
        return tuple(sorted((pos[i].col, pos[i].row) for i in ids))

    for x in sorted(layout.crossings, key=lambda x: (x.kind, key(x.through))):
        out.append("crossing %s through %s hop %s" % (
            x.kind,
            " ".join("%d,%d" % p for p in key(x.through)),
            " ".join("%d,%d" % p for p in key(x.hop))))
    return "\n".join(out) + "\n"


def parse_layout(text: str) -> Layout:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty layout file")
    lineno, header = lines[0]
    parts = header.split(None, 2)
    if len(parts) < 2 or parts[0] != "qca-layout":
        raise ParseError(lineno, "expected 'qca-layout <version>' header")
    if parts[1] != "1":
        raise ParseError(lineno, "unsupported layout version %r" % parts[1])
    name = parts[2] if len(parts) > 2 else ""

    pitch, csize, doff = DEFAULT_PITCH_NM, DEFAULT_CELL_SIZE_NM, DEFAULT_DOT_OFFSET_NM
    cells: List[Cell] = []
    devices: List[str] = []
    crossings: List[Tuple[int, str, List[Tuple[int, int]], List[Tuple[int, int]]]] = []
    nxt = 0

    for lineno, line in lines[1:]:
        toks = line.split()
        if toks[0] in ("pitch", "cellsize", "dotoffset"):
            if len(toks) != 2:
                raise ParseError(lineno, "%s takes one value" % toks[0])
            try:
                val = float(toks[1])
            except ValueError:
                raise ParseError(lineno, "bad number %r" % toks[1]) from None
            if toks[0] == "pitch":
                pitch = val
            elif toks[0] == "cellsize":
                csize = val
            else:
                doff = val
            continue
        if toks[0] == "crossing":
            try:
                kind = toks[1]
                ti = toks.index("through")
                hi = toks.index("hop")
                through = [_coord(t, lineno) for t in toks[ti + 1:hi]]
                hop = [_coord(t, lineno) for t in toks[hi + 1:]]
            except (IndexError, ValueError):
                raise ParseError(lineno, "malformed crossing line") from None
            if kind not in ("coplanar", "logical") or not through or not hop:
                raise ParseError(lineno, "malformed crossing line")
            crossings.append((lineno, kind, through, hop))
            continue

        if len(toks) not in (5, 6):
            raise ParseError(lineno, "expected 'col row orientation function"
                                     " zone [extra]', got %r" % line)
        try:
            col, row = int(toks[0]), int(toks[1])
            zone = int(toks[4])
        except ValueError:
            raise ParseError(lineno, "bad integer in cell line") from None
        try:
            orient = CellOrientation(toks[2])
        except ValueError:
            raise ParseError(lineno, "unknown orientation %r" % toks[2]) from None
        if toks[3] == "device":
            fn, is_dev = CellFunction.NORMAL, True
        elif toks[3] in _TOKEN_FN:
            fn, is_dev = _TOKEN_FN[toks[3]], False
        else:
            raise ParseError(lineno, "unknown function %r" % toks[3])
        if zone not in (0, 1, 2, 3):
            raise ParseError(lineno, "zone must be 0..3, got %d" % zone)
        label, pol = None, None
        if fn in (CellFunction.INPUT, CellFunction.OUTPUT):
            if len(toks) != 6:
                raise ParseError(lineno, "%s cell needs a label" % toks[3])
            label = toks[5]
        elif fn is CellFunction.FIXED:
            if len(toks) != 6 or toks[5] not in ("+1", "-1", "1"):
                raise ParseError(lineno, "fixed cell needs +1 or -1")
            pol = 1.0 if toks[5] in ("+1", "1") else -1.0
        elif len(toks) == 6:
            raise ParseError(lineno, "unexpected trailing field %r" % toks[5])
        cid = "c%d" % nxt
        nxt += 1
        cells.append(Cell(id=cid, pos=GridPosition(col, row), orientation=orient,
                          function=fn, clock=zone, polarization=pol, label=label))
        if is_dev:
            devices.append(cid)

    by_pos = {(c.pos.col, c.pos.row): c.id for c in cells}
    xs = []
    for lineno, kind, through, hop in crossings:
        try:
            xs.append(Crossing(kind=kind,
                               through=tuple(by_pos[p] for p in through),
                               hop=tuple(by_pos[p] for p in hop)))
        except KeyError as e:
            raise ParseError(lineno, "crossing names empty position %s" % (e.args[0],)) from None
    return Layout(cells=tuple(cells), pitch_nm=pitch, cell_size_nm=csize,
                  dot_offset_nm=doff, name=name, devices=frozenset(devices),
                  crossings=tuple(xs))


def _coord(tok: str, lineno: int) -> Tuple[int, int]:
    a, _, b = tok.partition(",")
    return (int(a), int(b))


# -- netlists ---------------------------------------------------------------

_OPS = {"maj3": (NodeKind.MAJ3, 3), "maj5": (NodeKind.MAJ5, 5),
        "mux": (NodeKind.MUX, 3), "xor": (NodeKind.XOR2, 2),
        "inv": (NodeKind.INV, 1), "loop": (NodeKind.DLOOP, 1)}
_KIND_OP = {k: op for op, (k, _) in _OPS.items()}
_CONSTS = {"0": NodeKind.CONST0, "1": NodeKind.CONST1}


def parse_netlist(text: str, name: str = "") -> LogicNetwork:
    nodes: List[Node] = []
    have = set()

    def const(tok: str) -> None:
        if tok in _CONSTS and tok not in have:
            nodes.append(Node(tok, _CONSTS[tok], ()))
            have.add(tok)

    for lineno, line in _content_lines(text):
        m = re.match(r"input\s+(\S+)\Z", line)
        if m:
            nm = _ident(m.group(1), lineno)
            nodes.append(Node(nm, NodeKind.INPUT, ()))
            have.add(nm)
            continue
        m = re.match(r"output\s+(\S+)\s*=\s*(\S+)\Z", line)
        if m:
            nm = _ident(m.group(1), lineno)
            src = m.group(2)
            if src not in _CONSTS:
                src = _ident(src, lineno)
            const(src)
            nodes.append(Node(nm, NodeKind.OUTPUT, (src,)))
            have.add(nm)
            continue
        m = re.match(r"(\S+)\s*=\s*([a-z0-9]+)\s*\(([^()]*)\)\Z", line)
        if m:
            nm = _ident(m.group(1), lineno)
            op = m.group(2)
            if op not in _OPS:
                raise ParseError(lineno, "unknown operation %r" % op)
            kind, arity = _OPS[op]
            args = [a.strip() for a in m.group(3).split(",")] if m.group(3).strip() else []
            if len(args) != arity:
                raise ParseError(lineno, "%s takes %d arguments, got %d"
                                         % (op, arity, len(args)))
            for a in args:
                if a in _CONSTS:
                    const(a)
                else:
                    _ident(a, lineno)
            nodes.append(Node(nm, kind, tuple(args)))
            have.add(nm)
            continue
        raise ParseError(lineno, "cannot parse %r" % line)
    if not nodes:
        raise ParseError(1, "empty netlist")
    try:
        return network(nodes, name=name)
    except Exception as e:
        raise ParseError(len(text.splitlines()) or 1, str(e)) from e


def _ident(tok: str, lineno: int) -> str:
    if not _NAME.match(tok):
        raise ParseError(lineno, "bad name %r" % tok)
    return tok


def serialize_netlist(net: LogicNetwork) -> str:
    out = []
    for n in net.nodes:
        if n.kind in (NodeKind.CONST0, NodeKind.CONST1):
            continue  # constants appear inline as 0/1
        if n.kind is NodeKind.INPUT:
            out.append("input %s" % n.name)
        elif n.kind is NodeKind.OUTPUT:
            out.append("output %s = %s" % (n.name, n.args[0]))
        elif n.kind in _KIND_OP:
            out.append("%s = %s(%s)" % (n.name, _KIND_OP[n.kind],
                                        ", ".join(n.args)))
        else:
            # AND/OR forms only exist in code; spell them as majority votes
            low = {NodeKind.AND2: ("maj3", n.args + ("0",)),
                   NodeKind.OR2: ("maj3", n.args + ("1",)),
                   NodeKind.AND3: ("maj5", n.args + ("0", "0")),
                   NodeKind.OR3: ("maj5", n.args + ("1", "1"))}
            op, args = low[n.kind]
            out.append("%s = %s(%s)" % (n.name, op, ", ".join(args)))
    return "\n".join(out) + "\n"


# -- waveforms --------------------------------------------------------------

def serialize_waveform(wf: InputWaveform) -> str:
    out = ["qca-waveform 1"]
    width = max(len(k) for k in wf.values)
    for nm in sorted(wf.values):
        out.append("%-*s %s" % (width, nm, " ".join(str(b) for b in wf.values[nm])))
    return "\n".join(out) + "\n"


def parse_waveform(text: str) -> InputWaveform:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, "empty waveform file")
    lineno, header = lines[0]
    if header.split() != ["qca-waveform", "1"]:
        raise ParseError(lineno, "expected 'qca-waveform 1' header")
    values: Dict[str, Tuple[int, ...]] = {}
    for lineno, line in lines[1:]:
        toks = line.split()
        nm = _ident(toks[0], lineno)
        if nm in values:
            raise ParseError(lineno, "duplicate input %r" % nm)
        try:
            bits = tuple(int(t) for t in toks[1:])
        except ValueError:
            raise ParseError(lineno, "bits must be 0/1") from None
        if not bits or any(b not in (0, 1) for b in bits):
            raise ParseError(lineno, "bits must be 0/1")
        values[nm] = bits
    if not values:
        raise ParseError(lines[-1][0], "waveform lists no inputs")
    if len({len(v) for v in values.values()}) != 1:
        raise ParseError(lines[-1][0], "inputs disagree on cycle count")
    return InputWaveform(values)


# -- truth tables -----------------------------------------------------------

@dataclass(frozen=True)
class TruthTable:
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    rows: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]


def serialize_table(table: TruthTable) -> str:
    out = ["qca-table 1",
           "inputs " + " ".join(table.inputs),
           "outputs " + " ".join(table.outputs)]
    for ins, outs in table.rows:
        out.append("%s | %s" % (" ".join(str(b) for b in ins),
                                " ".join(str(b) for b in outs)))
    return "\n".join(out) + "\n"


def parse_table(text: str) -> TruthTable:
    lines = list(_content_lines(text))
    if len(lines) < 3:
        raise ParseError(1, "truncated table file")
    if lines[0][1].split() != ["qca-table", "1"]:
        raise ParseError(lines[0][0], "expected 'qca-table 1' header")
    for idx, kw in ((1, "inputs"), (2, "outputs")):
        if not lines[idx][1].startswith(kw + " "):
            raise ParseError(lines[idx][0], "expected '%s ...'" % kw)
    ins = tuple(lines[1][1].split()[1:])
    outs = tuple(lines[2][1].split()[1:])
    if not ins or not outs:
        raise ParseError(lines[1][0], "table needs inputs and outputs")
    rows = []
    for lineno, line in lines[3:]:
        left, bar, right = line.partition("|")
        if not bar:
            raise ParseError(lineno, "row needs 'in bits | out bits'")
        try:
            iv = tuple(int(t) for t in left.split())
            ov = tuple(int(t) for t in right.split())
        except ValueError:
            raise ParseError(lineno, "bits must be integers") from None
        if len(iv) != len(ins) or len(ov) != len(outs):
            raise ParseError(lineno, "row width does not match declarations")
        rows.append((iv, ov))
    return TruthTable(ins, outs, tuple(rows))


# -- traces -----------------------------------------------------------------

def serialize_trace(trace: SimTrace, waveform: InputWaveform) -> str:
    """Sampled output bits per cycle next to the bits that were driven.

    A dash marks a cycle whose sample never latched (pipeline still
    filling, or the run ended first).
    """
    ins = sorted(waveform.values)
    outs = sorted(trace.samples)
    out = ["qca-trace 1  engine=%s" % trace.engine,
           "cycle %s | %s" % (" ".join(ins), " ".join(outs))]
    for cyc in range(waveform.cycles):
        iv = [str(waveform.values[n][cyc]) for n in ins]
        ov = [str(trace.samples[n][cyc]) if cyc in trace.samples[n] else "-"
              for n in outs]
        out.append("%d %s | %s" % (cyc, " ".join(iv), " ".join(ov)))
    return "\n".join(out) + "\n"


# -- physical parameter overrides -------------------------------------------

def parse_params(text: str, base: Optional[PhysicalParams] = None) -> PhysicalParams:
    """key=value lines overriding the stock physical constants."""
    params = base or DEFAULT_PARAMS
    fields = {f for f in params.__dataclass_fields__}
    overrides = {}
    for lineno, line in _content_lines(text):
        key, eq, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not eq or not key or not val:
            raise ParseError(lineno, "expected key=value")
        if key not in fields:
            raise ParseError(lineno, "unknown parameter %r" % key)
        try:
            overrides[key] = float(val)
        except ValueError:
            raise ParseError(lineno, "bad number %r" % val) from None
    return replace(params, **overrides)
