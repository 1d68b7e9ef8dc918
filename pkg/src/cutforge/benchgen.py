"""Deterministic generators for the benchmark circuits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .circuit import Circuit, Gate

PI = math.pi
MODELS = ("Ising", "Heisenberg", "FermiHubbard")
SUZUKI_U = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))


def _qft_gates(qubits: Sequence[int], swaps: bool) -> list[Gate]:
    n = len(qubits)
    out: list[Gate] = []
    for i in range(n):
        out.append(Gate("h", (qubits[i],)))
        for j in range(i + 1, n):
            out.append(Gate("cp", (qubits[j], qubits[i]), (PI / 2 ** (j - i),)))
    if swaps:
        for i in range(n // 2):
            out.append(Gate("swap", (qubits[i], qubits[n - 1 - i])))
    return out


def _inverse(gates: Sequence[Gate]) -> list[Gate]:
    inv = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}
    out = []
    for g in reversed(gates):
        if g.params:
            out.append(Gate(g.kind, g.qubits, tuple(-p for p in g.params)))
        else:
            out.append(Gate(inv.get(g.kind, g.kind), g.qubits))
    return out


def gen_qft(n: int, swaps: bool = True) -> Circuit:
    """Hadamard/controlled-phase ladder; with ``swaps`` the output is in natural order.

    Qubit 0 is the most significant bit, so with swaps the unitary equals the
    DFT matrix ``w^(xy)/sqrt(2^n)``. The swaps only relabel outputs, which is
    why cut-count studies usually drop them (``swaps=False``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return Circuit(n, tuple(_qft_gates(range(n), swaps)), f"qft{n}")


# ---------------------------------------------------------------- lattice models


@dataclass(frozen=True)
class LatticeSpec:
    D: int
    model: str = "Ising"
    t_evolution: float = 1.0
    trotter_steps: int = 1
    # (J, h): coupling and field; for Fermi-Hubbard (hopping t, on-site U)
    couplings: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.D < 2:
            raise ValueError("D must be >= 2")
        if self.trotter_steps < 1:
            raise ValueError("trotter_steps must be >= 1")

    @property
    def num_qubits(self) -> int:
        return 2 * self.D**2 if self.model == "FermiHubbard" else self.D**2


def grid_edges(D: int) -> list[tuple[int, int]]:
    edges = []
    for r in range(D):
        for c in range(D):
            q = r * D + c
            if c + 1 < D:
                edges.append((q, q + 1))
            if r + 1 < D:
                edges.append((q, q + D))
    return edges


def snake_order(D: int) -> list[int]:
    """Row-major site indices visited boustrophedon; position = Jordan-Wigner index."""
    return [r * D + (c if r % 2 == 0 else D - 1 - c) for r in range(D) for c in range(D)]


def _stage(spec: LatticeSpec, tau: float) -> tuple[list[Gate], list[Gate]]:
    """(two-qubit block A, single-qubit block B) for one first-order step of length ``tau``."""
    J, h = spec.couplings
    D = spec.D
    a: list[Gate] = []
    b: list[Gate] = []
    if spec.model == "Ising":
        # H = -J sum ZZ - h sum X
        a = [Gate("rzz", e, (-2 * J * tau,)) for e in grid_edges(D)]
        b = [Gate("rx", (q,), (-2 * h * tau,)) for q in range(D * D)]
    elif spec.model == "Heisenberg":
        # H = J sum (XX + YY + ZZ) + h sum Z
        for e in grid_edges(D):
            a += [Gate(k, e, (2 * J * tau,)) for k in ("rxx", "ryy", "rzz")]
        if h:
            b = [Gate("rz", (q,), (2 * h * tau,)) for q in range(D * D)]
    else:
        # H = -t sum (a+a + h.c.) + U sum n_up n_dn; qubit = JW position, spin-down offset D^2
        n = D * D
        for off in (0, n):
            for k in range(n - 1):
                pair = (off + k, off + k + 1)
                a += [Gate("rxx", pair, (-J * tau,)), Gate("ryy", pair, (-J * tau,))]
        pos = {site: k for k, site in enumerate(snake_order(D))}
        for site in range(n):
            k = pos[site]
            a.append(Gate("rzz", (k, n + k), (h * tau / 2,)))
        b = [Gate("rz", (q,), (-h * tau / 2,)) for q in range(2 * n)]
    return a, b


_DIAGONAL = frozenset({"rzz", "rz", "cp", "crz"})


def _merge_adjacent(gates: list[Gate]) -> list[Gate]:
    out: list[Gate] = []
    for g in gates:
        if out and out[-1].kind == g.kind and out[-1].qubits == g.qubits and g.params:
            out[-1] = Gate(g.kind, g.qubits, (out[-1].params[0] + g.params[0],))
        else:
            out.append(g)
    return out


def _strang(spec: LatticeSpec, tau: float) -> list[Gate]:
    """``B/2 A B/2``; a non-commuting ``A`` is itself split as a palindrome."""
    a, _ = _stage(spec, tau)
    _, b = _stage(spec, tau / 2)
    if any(g.kind not in _DIAGONAL for g in a):
        half, _ = _stage(spec, tau / 2)
        a = _merge_adjacent(half + half[::-1])
    return b + a + b


def _trotter_step(spec: LatticeSpec, tau: float, order: int) -> list[Gate]:
    if order == 1:
        a, b = _stage(spec, tau)
        return a + b
    if order == 2:
        return _strang(spec, tau)
    u = SUZUKI_U
    out: list[Gate] = []
    for w in (u, u, 1 - 4 * u, u, u):
        out += _strang(spec, w * tau)
    return out


def gen_lattice_model(spec: LatticeSpec, order: int = 4) -> Circuit:
    """``trotter_steps`` repetitions of a first-order, Strang or fourth-order Suzuki step.

    First order applies the two-qubit terms in a fixed order. Higher orders
    compose symmetric stages; when the two-qubit terms do not commute the
    layer is mirrored so each stage stays symmetric.
    """
    if order not in (1, 2, 4):
        raise ValueError(f"unsupported Trotter order {order}")
    tau = spec.t_evolution / spec.trotter_steps
    step = _trotter_step(spec, tau, order)
    name = f"{spec.model.lower()}_D{spec.D}_o{order}_n{spec.trotter_steps}"
    return Circuit(spec.num_qubits, tuple(step) * spec.trotter_steps, name)


def stages_per_step(order: int) -> int:
    return {1: 1, 2: 1, 4: 5}[order]


def default_comm_norm(spec: LatticeSpec) -> float:
    """Crude nearest-neighbour bound on the commutator norm of the model."""
    J, h = (abs(x) for x in spec.couplings)
    edges = len(grid_edges(spec.D))
    per_edge = {"Ising": 2 * J * h, "Heisenberg": 6 * J * (J + h), "FermiHubbard": 2 * J * (J + h)}[spec.model]
    return per_edge * edges


def trotter_steps_for_error(t: float, comm_norm: float, p: int, eps_alg: float) -> int:
    """Smallest ``N`` with ``(t * comm_norm)**(1 + p) / N**p <= eps_alg``."""
    if min(t, comm_norm, eps_alg) <= 0 or p < 1:
        raise ValueError("arguments must be positive")
    x = (t * comm_norm) ** (1 + p)

    def ok(n: int) -> bool:
        return x / n**p <= eps_alg

    n = max(1, math.ceil((x / eps_alg) ** (1.0 / p)))
    while n > 1 and ok(n - 1):
        n -= 1
    while not ok(n):
        n += 1
    return n


# ---------------------------------------------------------------- QAOA


@dataclass(frozen=True)
class QAOASpec:
    n: int
    p: int = 1
    graph_seed: int = 0
    degree: int = 3
    edges: tuple[tuple[int, int], ...] | None = field(default=None)

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("p must be >= 0")
        if self.n < 2:
            raise ValueError("n must be >= 2")

    def graph_edges(self) -> list[tuple[int, int]]:
        if self.edges is not None:
            return [tuple(sorted(e)) for e in self.edges]
        if self.degree >= self.n or (self.n * self.degree) % 2:
            raise ValueError(f"no {self.degree}-regular graph on {self.n} vertices")
        import networkx as nx

        g = nx.random_regular_graph(self.degree, self.n, seed=self.graph_seed)
        return sorted(tuple(sorted(e)) for e in g.edges())


def ring_edges(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)))


def gen_qaoa(spec: QAOASpec, angles: Sequence[tuple[float, float]] | None = None) -> Circuit:
    """Hadamard layer, then ``p`` rounds of RZZ(2 gamma) per edge and RX(2 beta) per qubit."""
    if angles is None:
        angles = [(0.4, 0.3)] * spec.p
    if len(angles) != spec.p:
        raise ValueError(f"expected {spec.p} angle pairs, got {len(angles)}")
    edges = spec.graph_edges()
    gates = [Gate("h", (q,)) for q in range(spec.n)]
    for gamma, beta in angles:
        gates += [Gate("rzz", e, (2 * gamma,)) for e in edges]
        gates += [Gate("rx", (q,), (2 * beta,)) for q in range(spec.n)]
    return Circuit(spec.n, tuple(gates), f"qaoa{spec.n}_p{spec.p}")


# ---------------------------------------------------------------- QPE


def gen_qpe(bits: int, phase: float, target_qubits: int = 1) -> Circuit:
    """Phase estimation of ``U = diag(1, e^(2 pi i phase))`` with ``bits`` control qubits.

    Control ``j`` (qubit ``j``, most significant first) applies ``U^(2^(bits-1-j))``.
    With ``target_qubits > 1`` the phase is spread evenly over a target
    register prepared in ``|1...1>``, which changes the width but not the readout.
    """
    if bits < 1 or target_qubits < 1:
        raise ValueError("bits and target_qubits must be >= 1")
    n = bits + target_qubits
    targets = range(bits, n)
    gates = [Gate("x", (t,)) for t in targets]
    gates += [Gate("h", (q,)) for q in range(bits)]
    for j in range(bits):
        angle = 2 * PI * phase * 2 ** (bits - 1 - j) / target_qubits
        gates += [Gate("cp", (j, t), (angle,)) for t in targets]
    gates += _inverse(_qft_gates(range(bits), swaps=True))
    return Circuit(n, tuple(gates), f"qpe{bits}")


# ---------------------------------------------------------------- random


def gen_random(n: int, depth: int, seed=None) -> Circuit:
    """``depth`` layers of random single-qubit gates followed by CX on a random matching."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    gates: list[Gate] = []
    for _ in range(depth):
        for q in range(n):
            choice = int(rng.integers(4))
            if choice == 3:
                gates.append(Gate("rz", (q,), (float(rng.uniform(0, 2 * PI)),)))
            else:
                gates.append(Gate(("h", "s", "t")[choice], (q,)))
        perm = rng.permutation(n)
        for k in range(n // 2):
            gates.append(Gate("cx", (int(perm[2 * k]), int(perm[2 * k + 1]))))
    return Circuit(n, tuple(gates), f"random{n}_d{depth}")
