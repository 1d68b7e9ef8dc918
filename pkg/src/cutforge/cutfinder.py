"""Width-constrained circuit partitioning into gate and wire cuts.

The search runs in three deterministic phases:

1. best-first (Dijkstra) search over prefix assignments of qubits to
   blocks, qubits taken in BFS order of the interaction graph and blocks
   labelled canonically; the path cost is the summed ``log gamma^2`` of the
   two-qubit gates forced across blocks. A bounded frontier and expansion
   budget make it fail soft: the deepest cheapest prefix is completed greedily.
2. single-qubit moves and pairwise swaps between blocks while they lower the cost.
3. optional wire-cut refinement: a qubit's timeline may be split at a
   two-qubit-gate boundary and its head or tail moved to a block with spare
   width, paying ``log 16`` per wire cut.
"""

from __future__ import annotations

import bisect
import heapq
import json
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .circuit import Circuit, Gate, interaction_graph
from .qpd import WIRE, basis_for, expected_gamma

log = logging.getLogger(__name__)

WIRE_WEIGHT = math.log(16.0)
# keeps zero-overhead gates (gamma = 1) from being cut for free
_TIE = 1e-9


class PlanError(ValueError):
    pass


class InfeasibleCutError(PlanError):
    pass


class SearchBudgetExhausted(RuntimeError):
    def __init__(self, plan: "CutPlan"):
        super().__init__("cut search budget exhausted; best plan attached")
        self.plan = plan


@dataclass(frozen=True)
class WireCut:
    qubit: int
    position: int  # first gate of the tail
    label: int  # block receiving the tail


@dataclass(frozen=True)
class CutPlan:
    m: int
    num_qubits: int
    partition: dict[int, int]
    gate_cuts: tuple[int, ...] = ()
    wire_cuts: tuple[WireCut, ...] = ()
    # (kind, params) per cut in canonical order: gate cuts by position, then wire cuts
    cut_channels: tuple[tuple[str, tuple[float, ...]], ...] = ()
    complete: bool = True

    @property
    def n_gate(self) -> int:
        return len(self.gate_cuts)

    @property
    def n_wire(self) -> int:
        return len(self.wire_cuts)

    @property
    def n_cuts(self) -> int:
        return self.n_gate + self.n_wire

    def cut_ids(self) -> tuple[dict[int, int], dict[tuple[int, int], int]]:
        gate = {p: i for i, p in enumerate(self.gate_cuts)}
        wire = {(w.qubit, w.position): self.n_gate + i for i, w in enumerate(self.wire_cuts)}
        return gate, wire

    def widths(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for lab in self.partition.values():
            out[lab] = out.get(lab, 0) + 1
        for w in self.wire_cuts:
            out[w.label] = out.get(w.label, 0) + 1
        return dict(sorted(out.items()))

    def bind(self, c: Circuit) -> "CutPlan":
        chans = [(c.gates[p].kind, c.gates[p].params) for p in self.gate_cuts]
        chans += [(WIRE, ())] * self.n_wire
        return replace(self, cut_channels=tuple(chans))

    def segments(self, c: Circuit) -> dict[int, list[tuple[int, int]]]:
        """Per qubit, ``[(start position, label), ...]``; the head starts at -1."""
        segs = {q: [(-1, self.partition[q])] for q in range(self.num_qubits)}
        for w in sorted(self.wire_cuts, key=lambda w: (w.qubit, w.position)):
            segs[w.qubit].append((w.position, w.label))
        return segs

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "num_qubits": self.num_qubits,
            "partition": {str(q): lab for q, lab in sorted(self.partition.items())},
            "gate_cuts": list(self.gate_cuts),
            "wire_cuts": [[w.qubit, w.position, w.label] for w in self.wire_cuts],
            "n_gate": self.n_gate,
            "n_wire": self.n_wire,
            "complete": self.complete,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict, circuit: Circuit | None = None) -> "CutPlan":
        plan = cls(
            int(d["m"]),
            int(d["num_qubits"]),
            {int(q): int(lab) for q, lab in d["partition"].items()},
            tuple(int(p) for p in d["gate_cuts"]),
            tuple(WireCut(int(q), int(p), int(lab)) for q, p, lab in d["wire_cuts"]),
            complete=bool(d.get("complete", True)),
        )
        return plan.bind(circuit) if circuit is not None else plan


def _label_at(segs: list[tuple[int, int]], pos: int) -> int:
    starts = [s for s, _ in segs]
    return segs[bisect.bisect_right(starts, pos) - 1][1]


def validate_plan(c: Circuit, plan: CutPlan) -> None:
    if set(plan.partition) != set(range(c.num_qubits)):
        raise PlanError("partition must assign every qubit")
    for lab, w in plan.widths().items():
        if w > plan.m:
            raise PlanError(f"block {lab} has width {w} > m={plan.m}")
    for w in plan.wire_cuts:
        on_q = c.gates_on(w.qubit)
        if w.position not in on_q or w.position == on_q[0]:
            raise PlanError(f"wire cut on qubit {w.qubit} at {w.position} is not an inner gate boundary")
    segs = plan.segments(c)
    for q, s in segs.items():
        if any(a[1] == b[1] for a, b in zip(s, s[1:])):
            raise PlanError(f"redundant wire cut on qubit {q}")
    cut = set(plan.gate_cuts)
    if len(cut) != plan.n_gate:
        raise PlanError("duplicate gate cut")
    for i, g in enumerate(c.gates):
        if g.arity != 2:
            if i in cut:
                raise PlanError(f"gate {i} is not a two-qubit gate")
            continue
        crossing = _label_at(segs[g.qubits[0]], i) != _label_at(segs[g.qubits[1]], i)
        if crossing and i not in cut:
            raise PlanError(f"gate {i} crosses blocks but is not cut")
        if not crossing and i in cut:
            raise PlanError(f"gate {i} is listed as cut but lies within one block")


# ---------------------------------------------------------------- search


@dataclass(frozen=True)
class FinderConfig:
    frontier_cap: int = 100_000
    max_expansions: int = 20_000
    improve: bool = True
    strict: bool = False


def _gate_weight(g: Gate) -> float:
    return math.log(basis_for(g.kind, g.params).overhead) + _TIE


def _bfs_order(c: Circuit) -> list[int]:
    ig = interaction_graph(c)
    nbrs = {q: ig.neighbors(q) for q in range(c.num_qubits)}
    seen: set[int] = set()
    order: list[int] = []
    for root in range(c.num_qubits):
        if root in seen:
            continue
        seen.add(root)
        dq = deque([root])
        while dq:
            q = dq.popleft()
            order.append(q)
            for r in nbrs[q]:
                if r not in seen:
                    seen.add(r)
                    dq.append(r)
    return order


def _weights(c: Circuit) -> np.ndarray:
    w = np.zeros((c.num_qubits, c.num_qubits))
    for g in c.gates:
        if g.arity == 2:
            a, b = g.qubits
            x = _gate_weight(g)
            w[a, b] += x
            w[b, a] += x
    return w


def _cost(w: np.ndarray, labels: np.ndarray) -> float:
    diff = labels[:, None] != labels[None, :]
    return float((w * diff).sum() / 2)


def _greedy_complete(w: np.ndarray, order: list[int], labels: dict[int, int], m: int) -> dict[int, int]:
    """Fill blocks one at a time with the unassigned qubit most connected to the open block."""
    labels = dict(labels)
    sizes: dict[int, int] = {}
    for lab in labels.values():
        sizes[lab] = sizes.get(lab, 0) + 1
    rest = [q for q in order if q not in labels]
    while rest:
        # best existing block with room for the most connected remaining qubit
        best = None
        for q in rest:
            for lab, s in sizes.items():
                if s >= m:
                    continue
                conn = sum(w[q, r] for r, l2 in labels.items() if l2 == lab)
                if conn > 0 and (best is None or conn > best[0]):
                    best = (conn, q, lab)
        if best is None:
            q, lab = rest[0], len(sizes)
            if sizes and min(sizes.values()) < m and not any(w[q, r] for r in labels):
                lab = min(l for l, s in sizes.items() if s < m)
        else:
            _, q, lab = best
        labels[q] = lab
        sizes[lab] = sizes.get(lab, 0) + 1
        rest.remove(q)
    return labels


def _dijkstra(w: np.ndarray, order: list[int], m: int, cfg: FinderConfig) -> tuple[dict[int, int], bool]:
    n = len(order)
    heap: list = [(0.0, 0, ())]
    counter = 1
    expansions = 0
    deepest: tuple = (0, 0.0, ())
    while heap:
        cost, _, labs = heapq.heappop(heap)
        k = len(labs)
        if k == n:
            return {order[i]: labs[i] for i in range(n)}, True
        if (k, -cost) > (deepest[0], -deepest[1]):
            deepest = (k, cost, labs)
        expansions += 1
        if expansions > cfg.max_expansions:
            break
        q = order[k]
        nblocks = max(labs, default=-1) + 1
        row = [w[q, order[j]] for j in range(k)]
        total = sum(row)
        per = [0.0] * (nblocks + 1)
        size = [0] * (nblocks + 1)
        for j, lab in enumerate(labs):
            per[lab] += row[j]
            size[lab] += 1
        for lab in range(nblocks + 1):
            if size[lab] >= m:
                continue
            heapq.heappush(heap, (cost + total - per[lab], counter, labs + (lab,)))
            counter += 1
        if len(heap) > 2 * cfg.frontier_cap:
            heap = heapq.nsmallest(cfg.frontier_cap, heap)
            heapq.heapify(heap)
    _, _, labs = deepest
    log.info("cut search budget exhausted after %d expansions at depth %d/%d", expansions, len(labs), n)
    return {order[i]: labs[i] for i in range(len(labs))}, False


def _improve(w: np.ndarray, labels: dict[int, int], m: int) -> dict[int, int]:
    n = w.shape[0]
    lab = np.array([labels[q] for q in range(n)])
    improved = True
    while improved:
        improved = False
        for q in range(n):
            sizes = np.bincount(lab)
            conn = np.bincount(lab, weights=w[q], minlength=len(sizes))
            for b in range(len(sizes)):
                if b != lab[q] and sizes[b] < m and conn[b] - conn[lab[q]] > 1e-12:
                    lab[q] = b
                    improved = True
                    break
        for q in range(n):
            for r in range(q + 1, n):
                a, b = lab[q], lab[r]
                if a == b:
                    continue
                cq = np.bincount(lab, weights=w[q], minlength=max(a, b) + 1)
                cr = np.bincount(lab, weights=w[r], minlength=max(a, b) + 1)
                gain = (cq[b] - cq[a]) + (cr[a] - cr[b]) - 2 * w[q, r]
                if gain > 1e-12:
                    lab[q], lab[r] = b, a
                    improved = True
    # relabel canonically in qubit order, dropping empty blocks
    remap: dict[int, int] = {}
    for q in range(n):
        remap.setdefault(int(lab[q]), len(remap))
    return {q: remap[int(lab[q])] for q in range(n)}


# ---------------------------------------------------------------- wire refinement


class _Timeline:
    """Mutable per-qubit segment labels used by the wire-cut phase."""

    def __init__(self, c: Circuit, labels: dict[int, int], m: int, gate_penalty: float | None):
        self.c = c
        self.m = m
        self.segs = {q: [(-1, labels[q])] for q in range(c.num_qubits)}
        self.twoq = {q: [i for i in c.gates_on(q) if c.gates[i].arity == 2] for q in range(c.num_qubits)}
        self.weight = {i: (_gate_weight(g) if gate_penalty is None else gate_penalty) for i, g in enumerate(c.gates) if g.arity == 2}

    def label(self, q: int, pos: int) -> int:
        return _label_at(self.segs[q], pos)

    def widths(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.segs.values():
            for _, lab in s:
                out[lab] = out.get(lab, 0) + 1
        return out

    def _relabel(self, q: int, lo: int, hi: int, lab: int) -> list[tuple[int, int]]:
        """Segments of ``q`` after assigning gate positions in ``[lo, hi)`` to ``lab``."""
        gates = self.c.gates_on(q)
        old = [self.label(q, i) for i in gates]
        new = [lab if lo <= i < hi else l for i, l in zip(gates, old)]
        segs = [(-1, new[0])] if gates else list(self.segs[q])
        for i, l in zip(gates[1:], new[1:]):
            if l != segs[-1][1]:
                segs.append((i, l))
        return segs

    def _gate_cost(self, q: int, segs) -> float:
        tot = 0.0
        for i in self.twoq[q]:
            a, b = self.c.gates[i].qubits
            other = b if a == q else a
            if _label_at(segs, i) != self.label(other, i):
                tot += self.weight[i]
        return tot

    def refine(self, allow_middle: bool) -> None:
        improved = True
        while improved:
            improved = False
            for q in range(self.c.num_qubits):
                tq = self.twoq[q]
                if len(tq) < 2 and not allow_middle:
                    continue
                cur = self._gate_cost(q, self.segs[q]) + WIRE_WEIGHT * (len(self.segs[q]) - 1)
                widths = self.widths()
                # cut points sit at two-qubit gates of q; single-qubit gates ride with the head
                bounds = [-1] + tq[1:] + [len(self.c.gates)]
                ranges = []
                for x in range(len(bounds)):
                    for y in range(x + 1, len(bounds)):
                        if allow_middle or x == 0 or y == len(bounds) - 1:
                            ranges.append((bounds[x], bounds[y]))
                best = None
                labels = sorted(widths)
                for lo, hi in ranges:
                    for lab in labels:
                        segs = self._relabel(q, lo, hi, lab)
                        if segs == self.segs[q]:
                            continue
                        trial = dict(widths)
                        for _, l in self.segs[q]:
                            trial[l] -= 1
                        for _, l in segs:
                            trial[l] = trial.get(l, 0) + 1
                        if max(trial.values()) > self.m:
                            continue
                        c = self._gate_cost(q, segs) + WIRE_WEIGHT * (len(segs) - 1)
                        if c < cur - 1e-9 and (best is None or c < best[0] - 1e-12):
                            best = (c, segs)
                if best is not None:
                    self.segs[q] = best[1]
                    improved = True

    def plan(self, m: int, complete: bool) -> CutPlan:
        partition = {q: s[0][1] for q, s in self.segs.items()}
        wires = tuple(
            sorted(
                (WireCut(q, pos, lab) for q, s in self.segs.items() for pos, lab in s[1:]),
                key=lambda w: (w.position, w.qubit),
            )
        )
        cuts = []
        for i, g in enumerate(self.c.gates):
            if g.arity == 2 and self.label(g.qubits[0], i) != self.label(g.qubits[1], i):
                cuts.append(i)
        return _canonical(CutPlan(m, self.c.num_qubits, partition, tuple(cuts), wires, complete=complete))


def _canonical(plan: CutPlan) -> CutPlan:
    remap: dict[int, int] = {}
    for q in sorted(plan.partition):
        remap.setdefault(plan.partition[q], len(remap))
    for w in plan.wire_cuts:
        remap.setdefault(w.label, len(remap))
    return replace(
        plan,
        partition={q: remap[l] for q, l in plan.partition.items()},
        wire_cuts=tuple(WireCut(w.qubit, w.position, remap[w.label]) for w in plan.wire_cuts),
    )


def find_cuts(
    c: Circuit,
    m: int,
    allow_wire: bool = True,
    allow_gate: bool = True,
    config: FinderConfig | None = None,
) -> CutPlan:
    """Search for a plan with every block at most ``m`` qubits wide and low total gamma^2.

    Deterministic for identical inputs. Raises :class:`InfeasibleCutError` if
    no plan exists under the allowed cut types, and
    :class:`SearchBudgetExhausted` (plan attached) only when ``config.strict``.
    """
    cfg = config or FinderConfig()
    n = c.num_qubits
    if not 1 <= m:
        raise PlanError("m must be >= 1")
    if not (allow_wire or allow_gate):
        raise PlanError("at least one cut type must be allowed")
    if m >= n:
        return CutPlan(m, n, {q: 0 for q in range(n)}).bind(c)
    w = _weights(c)
    order = _bfs_order(c)
    labels, complete = _dijkstra(w, order, m, cfg)
    if not complete:
        labels = _greedy_complete(w, order, labels, m)
        alt = _greedy_complete(w, order, {}, m)
        if _cost(w, np.array([alt[q] for q in range(n)])) < _cost(w, np.array([labels[q] for q in range(n)])):
            labels = alt
    if cfg.improve:
        labels = _improve(w, labels, m)
    tl = _Timeline(c, labels, m, None if allow_gate else 1e3)
    if allow_wire:
        tl.refine(allow_middle=not allow_gate)
    plan = tl.plan(m, complete).bind(c)
    if not allow_gate and plan.n_gate:
        raise InfeasibleCutError(f"no wire-only plan found for m={m} ({plan.n_gate} gates still cross)")
    validate_plan(c, plan)
    if not complete and cfg.strict:
        raise SearchBudgetExhausted(plan)
    return plan


# ---------------------------------------------------------------- extraction


@dataclass(frozen=True)
class Port:
    cut_id: int
    role: str  # gate_a | gate_b | wire_send | wire_recv
    qubit: int  # local index


@dataclass(frozen=True)
class Subcircuit:
    name: str
    label: int
    width: int
    items: tuple[Union[Gate, Port], ...]
    # local index -> original qubit (a wire-cut qubit appears once per segment)
    original_indices: tuple[int, ...]
    outputs: tuple[tuple[int, int], ...]  # (local, original) read at the end
    gate_positions: tuple[int, ...] = field(default=())

    @property
    def cut_ports(self) -> tuple[Port, ...]:
        return tuple(x for x in self.items if isinstance(x, Port))

    @property
    def circuit(self) -> Circuit:
        return Circuit(self.width, tuple(x for x in self.items if isinstance(x, Gate)), self.name)


def extract_subcircuits(c: Circuit, plan: CutPlan) -> list[Subcircuit]:
    validate_plan(c, plan)
    segs = plan.segments(c)
    local: dict[int, dict[tuple[int, int], int]] = {}
    for q in range(c.num_qubits):
        for k, (_, lab) in enumerate(segs[q]):
            blk = local.setdefault(lab, {})
            blk[(q, k)] = len(blk)
    items: dict[int, list] = {lab: [] for lab in local}
    positions: dict[int, list[int]] = {lab: [] for lab in local}
    gate_ids, wire_ids = plan.cut_ids()
    seg_idx = {q: 0 for q in range(c.num_qubits)}

    def where(q: int) -> tuple[int, int]:
        k = seg_idx[q]
        lab = segs[q][k][1]
        return lab, local[lab][(q, k)]

    for i, g in enumerate(c.gates):
        for q in g.qubits:
            k = seg_idx[q]
            if k + 1 < len(segs[q]) and segs[q][k + 1][0] == i:
                cid = wire_ids[(q, i)]
                lab, lq = where(q)
                items[lab].append(Port(cid, "wire_send", lq))
                seg_idx[q] += 1
                lab, lq = where(q)
                items[lab].append(Port(cid, "wire_recv", lq))
        if i in gate_ids:
            (la, qa), (lb, qb) = where(g.qubits[0]), where(g.qubits[1])
            items[la].append(Port(gate_ids[i], "gate_a", qa))
            items[lb].append(Port(gate_ids[i], "gate_b", qb))
            continue
        locs = [where(q) for q in g.qubits]
        lab = locs[0][0]
        if any(l != lab for l, _ in locs):
            raise PlanError(f"gate {i} crosses blocks without a cut")
        items[lab].append(Gate(g.kind, tuple(lq for _, lq in locs), g.params))
        positions[lab].append(i)

    out = []
    for lab in sorted(local):
        inv = sorted(local[lab].items(), key=lambda kv: kv[1])
        outputs = tuple(
            (lq, q) for (q, k), lq in inv if k == len(segs[q]) - 1
        )
        out.append(
            Subcircuit(
                f"{c.name}.s{lab}",
                lab,
                len(inv),
                tuple(items[lab]),
                tuple(q for (q, _), _ in inv),
                outputs,
                tuple(positions[lab]),
            )
        )
    return out


@dataclass(frozen=True)
class PlanSummary:
    n_gate: int
    n_wire: int
    widths: list[int]
    gammas: list[float]

    def as_tuple(self):
        return self.n_gate, self.n_wire, self.widths, self.gammas


def plan_summary(plan: CutPlan) -> PlanSummary:
    gammas = [basis_for(kind, params).gamma for kind, params in plan.cut_channels]
    return PlanSummary(plan.n_gate, plan.n_wire, list(plan.widths().values()), gammas)


def nominal_gammas(plan: CutPlan) -> list[float]:
    """Closed-form gammas, independent of the decomposition tables."""
    return [expected_gamma(kind, params) for kind, params in plan.cut_channels]
