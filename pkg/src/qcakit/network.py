"""Gate-level logic networks: the synthesis frontend's data model.

A network is a set of named nodes; each non-input node lists the names of
the nodes feeding it, in pin order.  Combinational networks are DAGs; a
DLOOP node breaks a cycle by delivering its argument's value from the
previous clock cycle (one bit of state per DLOOP).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple


class NetworkError(Exception):
    pass


class MalformedNetwork(NetworkError):
    pass


class EmptyNetwork(NetworkError):
    pass


class UnsupportedNode(NetworkError):
    pass


class NodeKind(Enum):
    INPUT = "input"
    OUTPUT = "output"
    CONST0 = "const0"
    CONST1 = "const1"
    INV = "inv"
    MAJ3 = "maj3"
    MAJ5 = "maj5"
    MUX = "mux"  # pins (a, b, s): a when s=0, b when s=1
    XOR2 = "xor2"
    XOR3 = "xor3"
    DLOOP = "dloop"  # delivers args[0] from the previous cycle
    # frontend conveniences, removed by lower_to_majority
    AND2 = "and2"
    OR2 = "or2"
    AND3 = "and3"
    OR3 = "or3"


ARITY = {
    NodeKind.INPUT: 0,
    NodeKind.OUTPUT: 1,
    NodeKind.CONST0: 0,
    NodeKind.CONST1: 0,
    NodeKind.INV: 1,
    NodeKind.MAJ3: 3,
    NodeKind.MAJ5: 5,
    NodeKind.MUX: 3,
    NodeKind.XOR2: 2,
    NodeKind.XOR3: 3,
    NodeKind.DLOOP: 1,
    NodeKind.AND2: 2,
    NodeKind.OR2: 2,
    NodeKind.AND3: 3,
    NodeKind.OR3: 3,
}

# kinds allowed after lowering
CANONICAL = frozenset(k for k in NodeKind
                      if k not in (NodeKind.AND2, NodeKind.OR2,
                                   NodeKind.AND3, NodeKind.OR3))


@dataclass(frozen=True)
class Node:
    name: str
    kind: NodeKind
    args: Tuple[str, ...] = ()


def _maj(bits: Sequence[int]) -> int:
    return 1 if sum(bits) * 2 > len(bits) else 0


_EVAL = {
    NodeKind.CONST0: lambda a: 0,
    NodeKind.CONST1: lambda a: 1,
    NodeKind.INV: lambda a: 1 - a[0],
    NodeKind.MAJ3: _maj,
    NodeKind.MAJ5: _maj,
    NodeKind.MUX: lambda a: a[1] if a[2] else a[0],
    NodeKind.XOR2: lambda a: a[0] ^ a[1],
    NodeKind.XOR3: lambda a: a[0] ^ a[1] ^ a[2],
    NodeKind.AND2: lambda a: a[0] & a[1],
    NodeKind.OR2: lambda a: a[0] | a[1],
    NodeKind.AND3: lambda a: a[0] & a[1] & a[2],
    NodeKind.OR3: lambda a: a[0] | a[1] | a[2],
}


@dataclass(frozen=True)
class LogicNetwork:
    """Immutable named-node network.  Use validate() after construction."""

    nodes: Tuple[Node, ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "_by_name",
                           {n.name: n for n in self.nodes})

    def node(self, name: str) -> Node:
        try:
            return self._by_name[name]
        except KeyError:
            raise MalformedNetwork("no node named %r" % (name,))

    def has(self, name: str) -> bool:
        return name in self._by_name

    def inputs(self) -> List[Node]:
        return [n for n in self.nodes if n.kind is NodeKind.INPUT]

    def outputs(self) -> List[Node]:
        return [n for n in self.nodes if n.kind is NodeKind.OUTPUT]

    def dloops(self) -> List[Node]:
        return [n for n in self.nodes if n.kind is NodeKind.DLOOP]

    @property
    def is_sequential(self) -> bool:
        return any(n.kind is NodeKind.DLOOP for n in self.nodes)

    def validate(self) -> "LogicNetwork":
        if not self.nodes:
            raise EmptyNetwork("network has no nodes")
        seen = set()
        for n in self.nodes:
            if n.name in seen:
                raise MalformedNetwork("node %r assigned twice" % (n.name,))
            seen.add(n.name)
            if n.kind not in ARITY:
                raise MalformedNetwork("unknown kind %r" % (n.kind,))
            if len(n.args) != ARITY[n.kind]:
                raise MalformedNetwork(
                    "%s %r takes %d inputs, got %d"
                    % (n.kind.value, n.name, ARITY[n.kind], len(n.args)))
            for a in n.args:
                if a not in self._by_name:
                    raise MalformedNetwork(
                        "node %r references undefined %r" % (n.name, a))
        if not self.outputs():
            raise MalformedNetwork("network has no outputs")
        self.topological()  # raises on combinational cycles
        return self

    def topological(self) -> List[Node]:
        """Evaluation order; DLOOP nodes come first (they hold state)."""
        order: List[Node] = []
        mark: Dict[str, int] = {}  # 1 = visiting, 2 = done

        def visit(name: str, stack: List[str]) -> None:
            state = mark.get(name)
            if state == 2:
                return
            if state == 1:
                cyc = stack[stack.index(name):] + [name]
                raise MalformedNetwork(
                    "combinational cycle: %s" % " -> ".join(cyc))
            mark[name] = 1
            node = self.node(name)
            if node.kind is not NodeKind.DLOOP:  # loop edges carry old state
                for a in node.args:
                    visit(a, stack + [name])
            mark[name] = 2
            order.append(node)

        for n in self.nodes:
            visit(n.name, [])
        return order

    # -- evaluation -----------------------------------------------------

    def step(self, inputs: Mapping[str, int],
             state: Optional[Mapping[str, int]] = None
             ) -> Tuple[Dict[str, int], Dict[str, int]]:
        """One cycle: returns (outputs, next_state).

        state maps DLOOP node name -> stored bit (missing entries read 0).
        """
        state = dict(state or {})
        values: Dict[str, int] = {}
        for node in self.topological():
            if node.kind is NodeKind.INPUT:
                try:
                    values[node.name] = 1 if inputs[node.name] else 0
                except KeyError:
                    raise MalformedNetwork("no value for input %r"
                                           % (node.name,))
            elif node.kind is NodeKind.DLOOP:
                values[node.name] = state.get(node.name, 0)
            elif node.kind is NodeKind.OUTPUT:
                values[node.name] = values[node.args[0]]
            else:
                values[node.name] = _EVAL[node.kind](
                    [values[a] for a in node.args])
        nxt = {d.name: values[d.args[0]] for d in self.dloops()}
        outs = {o.name: values[o.name] for o in self.outputs()}
        return outs, nxt

    def evaluate(self, inputs: Mapping[str, int]) -> Dict[str, int]:
        """Combinational evaluation; rejects sequential networks."""
        if self.is_sequential:
            raise MalformedNetwork("sequential network needs step(), "
                                   "not evaluate()")
        outs, _ = self.step(inputs)
        return outs

    def run(self, script: Sequence[Mapping[str, int]],
            state: Optional[Mapping[str, int]] = None
            ) -> List[Dict[str, int]]:
        """Feed a cycle-by-cycle input script; returns outputs per cycle."""
        st = dict(state or {})
        outs = []
        for row in script:
            o, st = self.step(row, st)
            outs.append(o)
        return outs


def network(nodes: Iterable[Node], name: str = "") -> LogicNetwork:
    return LogicNetwork(tuple(nodes), name=name).validate()
