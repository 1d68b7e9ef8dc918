"""Circuit intermediate representation shared by every stage of the pipeline.

Qubits are dense integers ``0..num_qubits-1``. A circuit is an immutable,
ordered tuple of :class:`Gate` records; generators, the cut finder, the
simulator and the resource estimator all consume this one type.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class CircuitError(ValueError):
    """Raised for malformed gates or circuits."""


# name -> (arity, number of angle parameters)
GATE_SPECS: dict[str, tuple[int, int]] = {
    "h": (1, 0),
    "s": (1, 0),
    "sdg": (1, 0),
    "t": (1, 0),
    "tdg": (1, 0),
    "x": (1, 0),
    "y": (1, 0),
    "z": (1, 0),
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "cx": (2, 0),
    "cz": (2, 0),
    "cs": (2, 0),
    "csx": (2, 0),
    "ch": (2, 0),
    "swap": (2, 0),
    "iswap": (2, 0),
    "rxx": (2, 1),
    "ryy": (2, 1),
    "rzz": (2, 1),
    "rzx": (2, 1),
    "crx": (2, 1),
    "cry": (2, 1),
    "crz": (2, 1),
    "cp": (2, 1),
    # mid-circuit Z measurement; the outcome enters estimators as an eigenvalue +-1
    "measure": (1, 0),
    # reset into the +1 eigenstate of Z, X or Y
    "prep_z": (1, 0),
    "prep_x": (1, 0),
    "prep_y": (1, 0),
}

ONE_QUBIT_KINDS = frozenset(k for k, (a, _) in GATE_SPECS.items() if a == 1)
TWO_QUBIT_KINDS = frozenset(k for k, (a, _) in GATE_SPECS.items() if a == 2)
PARAMETRIC_KINDS = frozenset(k for k, (_, p) in GATE_SPECS.items() if p > 0)
NONUNITARY_KINDS = frozenset({"measure", "prep_z", "prep_x", "prep_y"})


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in GATE_SPECS:
            raise CircuitError(f"unsupported gate kind {self.kind!r}")
        arity, nparams = GATE_SPECS[self.kind]
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.qubits) != arity:
            raise CircuitError(f"{self.kind} takes {arity} qubit(s), got {len(self.qubits)}")
        if len(self.params) != nparams:
            raise CircuitError(f"{self.kind} takes {nparams} parameter(s), got {len(self.params)}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {self}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise CircuitError(f"{self.kind} on repeated qubit {self.qubits[0]}")
        if not all(math.isfinite(p) for p in self.params):
            raise CircuitError(f"non-finite angle in {self.kind}")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def remap(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.params)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "qubits": list(self.qubits), "params": list(self.params)}


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    name: str = "circuit"

    def __post_init__(self):
        if self.num_qubits < 0:
            raise CircuitError("num_qubits must be non-negative")
        gates = tuple(g if isinstance(g, Gate) else Gate(*g) for g in self.gates)
        for g in gates:
            if max(g.qubits) >= self.num_qubits:
                raise CircuitError(f"{g.kind} on qubit {max(g.qubits)} >= num_qubits={self.num_qubits}")
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def two_qubit_positions(self) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.arity == 2]

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def kind_counts(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for g in self.gates:
            out[g.kind] += 1
        return dict(out)

    def gates_on(self, qubit: int) -> list[int]:
        """Positions of gates touching ``qubit``, in program order."""
        return [i for i, g in enumerate(self.gates) if qubit in g.qubits]

    def with_gates(self, gates: Iterable[Gate], name: str | None = None) -> "Circuit":
        return Circuit(self.num_qubits, tuple(gates), name or self.name)

    def depth(self) -> int:
        level = [0] * self.num_qubits
        for g in self.gates:
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "num_qubits": self.num_qubits,
            "gates": [g.to_dict() for g in self.gates],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        gates = tuple(Gate(d["kind"], tuple(d["qubits"]), tuple(d.get("params", ()))) for d in data["gates"])
        return cls(int(data["num_qubits"]), gates, data.get("name", "circuit"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def circuit(num_qubits: int, ops: Sequence, name: str = "circuit") -> Circuit:
    """Build a circuit from ``(kind, qubits[, params])`` tuples.

    >>> circuit(2, [("h", (0,)), ("cx", (0, 1))]).count("cx")
    1
    """
    gates = []
    for op in ops:
        if isinstance(op, Gate):
            gates.append(op)
        else:
            kind, qubits, *rest = op
            gates.append(Gate(kind, tuple(qubits), tuple(rest[0]) if rest else ()))
    return Circuit(num_qubits, tuple(gates), name)


@dataclass(frozen=True)
class InteractionGraph:
    """Qubits plus, for every interacting pair, the positions of its two-qubit gates."""

    nodes: tuple[int, ...]
    edges: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)

    def multiplicity(self, a: int, b: int) -> int:
        return len(self.edges.get((min(a, b), max(a, b)), ()))

    def total_multiplicity(self) -> int:
        return sum(len(v) for v in self.edges.values())

    def neighbors(self, q: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == q:
                out.append(b)
            elif b == q:
                out.append(a)
        return sorted(out)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        for (a, b), pos in self.edges.items():
            g.add_edge(a, b, multiplicity=len(pos), positions=pos)
        return g


def interaction_graph(c: Circuit) -> InteractionGraph:
    edges: dict[tuple[int, int], list[int]] = defaultdict(list)
    for i, g in enumerate(c.gates):
        if g.arity == 2:
            a, b = g.qubits
            edges[(min(a, b), max(a, b))].append(i)
    return InteractionGraph(tuple(range(c.num_qubits)), {k: tuple(v) for k, v in sorted(edges.items())})
