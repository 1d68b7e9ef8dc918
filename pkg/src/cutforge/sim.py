"""Dense statevector and density-matrix simulation at desk scale.

Bit order: qubit 0 is the most significant bit of a basis-state index, so the
amplitude of ``|q0 q1 ... q_{n-1}>`` sits at ``int("q0q1...", 2)``.

In the exact (branching) modes a ``measure`` gate does not sample: both
outcomes are followed, each carrying its Born weight in the norm of an
unnormalised state and its eigenvalue (+1 for 0, -1 for 1) as a sign.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .circuit import NONUNITARY_KINDS, Circuit, Gate

DEFAULT_QUBIT_GUARD = 24
_DROP = 1e-30


class SimulationError(RuntimeError):
    pass


class TooManyQubitsError(SimulationError):
    pass


def qubit_guard() -> int:
    return int(os.environ.get("CUTFORGE_QUBIT_GUARD", DEFAULT_QUBIT_GUARD))


def check_guard(n: int, guard: int | None = None) -> None:
    limit = qubit_guard() if guard is None else guard
    if n > limit:
        raise TooManyQubitsError(f"{n} qubits exceeds the simulator guard of {limit}")


# ---------------------------------------------------------------- gate matrices

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULI = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}


def _controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


def _pauli_rotation(p: np.ndarray, theta: float) -> np.ndarray:
    # exp(-i theta/2 P) for P^2 = I
    return math.cos(theta / 2) * np.eye(p.shape[0]) - 1j * math.sin(theta / 2) * p


@lru_cache(maxsize=4096)
def _matrix_cached(kind: str, params: tuple[float, ...]) -> np.ndarray:
    th = params[0] if params else 0.0
    if kind == "h":
        return _H
    if kind == "x":
        return _X
    if kind == "y":
        return _Y
    if kind == "z":
        return _Z
    if kind == "s":
        return np.diag([1, 1j])
    if kind == "sdg":
        return np.diag([1, -1j])
    if kind == "t":
        return np.diag([1, np.exp(1j * math.pi / 4)])
    if kind == "tdg":
        return np.diag([1, np.exp(-1j * math.pi / 4)])
    if kind == "rx":
        return _pauli_rotation(_X, th)
    if kind == "ry":
        return _pauli_rotation(_Y, th)
    if kind == "rz":
        return _pauli_rotation(_Z, th)
    if kind == "cx":
        return _controlled(_X)
    if kind == "cz":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "cs":
        return np.diag([1, 1, 1, 1j])
    if kind == "csx":
        return _controlled(np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2)
    if kind == "ch":
        return _controlled(_H)
    if kind == "swap":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if kind == "iswap":
        return np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)
    if kind == "rxx":
        return _pauli_rotation(np.kron(_X, _X), th)
    if kind == "ryy":
        return _pauli_rotation(np.kron(_Y, _Y), th)
    if kind == "rzz":
        return _pauli_rotation(np.kron(_Z, _Z), th)
    if kind == "rzx":
        return _pauli_rotation(np.kron(_Z, _X), th)
    if kind == "crx":
        return _controlled(_pauli_rotation(_X, th))
    if kind == "cry":
        return _controlled(_pauli_rotation(_Y, th))
    if kind == "crz":
        return _controlled(_pauli_rotation(_Z, th))
    if kind == "cp":
        return np.diag([1, 1, 1, np.exp(1j * th)])
    raise SimulationError(f"{kind} has no unitary matrix")


def gate_matrix(kind: str, params: Sequence[float] = ()) -> np.ndarray:
    m = _matrix_cached(kind, tuple(float(p) for p in params))
    m.setflags(write=False)
    return m


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Full ``2^n x 2^n`` unitary; column ``j`` is the output for basis input ``j``."""
    n = c.num_qubits
    check_guard(n, 12)
    dim = 2**n
    cols = np.eye(dim, dtype=complex).reshape((dim,) + (2,) * n)
    for g in c.gates:
        if g.kind in NONUNITARY_KINDS:
            raise SimulationError(f"{g.kind} is not unitary")
        cols = _apply(cols, gate_matrix(g.kind, g.params), tuple(q + 1 for q in g.qubits))
    return cols.reshape(dim, dim).T


# ---------------------------------------------------------------- kernels


def _apply(t: np.ndarray, u: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Contract ``u`` (acting on len(axes) qubits) into tensor ``t`` along ``axes``."""
    k = len(axes)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


@dataclass
class State:
    amplitudes: np.ndarray
    n: int

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.vector) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def zero_state(n: int) -> State:
    amp = np.zeros((2,) * n, dtype=complex)
    amp[(0,) * n] = 1.0
    return State(amp, n)


def apply_gate(state: State, g: Gate) -> State:
    if g.kind in NONUNITARY_KINDS:
        raise SimulationError(f"{g.kind} needs branch enumeration or sampling")
    return State(_apply(state.amplitudes, gate_matrix(g.kind, g.params), g.qubits), state.n)


def simulate(c: Circuit, initial: np.ndarray | None = None) -> State:
    """Run a measurement-free circuit from ``|0...0>`` (or ``initial``)."""
    check_guard(c.num_qubits)
    n = c.num_qubits
    if initial is None:
        state = zero_state(n)
    else:
        state = State(np.asarray(initial, dtype=complex).reshape((2,) * n).copy(), n)
    for g in c.gates:
        state = apply_gate(state, g)
    return state


# ---------------------------------------------------------------- observables


@dataclass(frozen=True)
class Observable:
    """Either a weighted Pauli-Z string or a bitstring function table.

    Values lie in ``[-1, 1]``; tables are indexed with qubit 0 as the most
    significant bit.
    """

    z_support: tuple[int, ...] | None = None
    weight: float = 1.0
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.z_support is None) == (self.table is None):
            raise ValueError("give exactly one of z_support or table")
        if self.z_support is not None and abs(self.weight) > 1:
            raise ValueError("|weight| must be <= 1")
        if self.table is not None and any(abs(v) > 1 + 1e-12 for v in self.table):
            raise ValueError("observable values must lie in [-1, 1]")

    @classmethod
    def z(cls, *qubits: int, weight: float = 1.0) -> "Observable":
        return cls(z_support=tuple(sorted(qubits)), weight=weight)

    @classmethod
    def parity(cls, n: int) -> "Observable":
        return cls.z(*range(n))

    @classmethod
    def from_function(cls, n: int, fn: Callable[[tuple[int, ...]], float]) -> "Observable":
        vals = []
        for x in range(2**n):
            bits = tuple((x >> (n - 1 - k)) & 1 for k in range(n))
            vals.append(float(fn(bits)))
        return cls(table=tuple(vals))

    def values(self, n: int) -> np.ndarray:
        if self.table is not None:
            if len(self.table) != 2**n:
                raise ValueError(f"table has {len(self.table)} entries, expected {2**n}")
            return np.asarray(self.table, dtype=float)
        idx = np.arange(2**n)
        par = np.zeros(2**n, dtype=int)
        for q in self.z_support:
            if q >= n:
                raise ValueError(f"Z support qubit {q} >= {n}")
            par ^= (idx >> (n - 1 - q)) & 1
        return self.weight * (1 - 2 * par).astype(float)

    def expect(self, distribution: np.ndarray) -> float:
        n = int(round(math.log2(len(distribution))))
        return float(np.dot(self.values(n), distribution))


def expectation(c: Circuit, o: Observable) -> float:
    return o.expect(simulate(c).probabilities())


# ---------------------------------------------------------------- branching


def enumerate_branches(c: Circuit) -> list[tuple[float, np.ndarray]]:
    """All measurement/reset branches as ``(eigenvalue product, unnormalised state)``."""
    check_guard(c.num_qubits)
    n = c.num_qubits
    branches = [(1.0, zero_state(n).amplitudes)]
    for g in c.gates:
        if g.kind not in NONUNITARY_KINDS:
            u = gate_matrix(g.kind, g.params)
            branches = [(s, _apply(a, u, g.qubits)) for s, a in branches]
            continue
        q = g.qubits[0]
        nxt = []
        for s, a in branches:
            a0 = a.copy()
            np.moveaxis(a0, q, 0)[1] = 0
            a1 = a.copy()
            np.moveaxis(a1, q, 0)[0] = 0
            if g.kind == "measure":
                parts = [(s, a0), (-s, a1)]
            else:
                parts = [(s, a0), (s, _apply(a1, _X, (q,)))]
            nxt += [(sp, ap) for sp, ap in parts if np.vdot(ap, ap).real > _DROP]
        branches = nxt
        if g.kind == "prep_x":
            branches = [(s, _apply(a, _H, (q,))) for s, a in branches]
        elif g.kind == "prep_y":
            branches = [(s, _apply(_apply(a, _H, (q,)), np.diag([1, 1j]), (q,))) for s, a in branches]
    return branches


def signed_distribution(c: Circuit, outputs: Sequence[int] | None = None) -> np.ndarray:
    """Sum over branches of eigenvalue product times Born probabilities.

    Marginalised onto ``outputs`` (default: all qubits, in order).
    """
    n = c.num_qubits
    outputs = list(range(n)) if outputs is None else list(outputs)
    acc = np.zeros((2,) * n)
    for s, a in enumerate_branches(c):
        acc += s * np.abs(a) ** 2
    drop = tuple(q for q in range(n) if q not in outputs)
    marg = acc.sum(axis=drop) if drop else acc
    kept = [q for q in range(n) if q in outputs]
    marg = np.transpose(marg, [kept.index(q) for q in outputs]) if outputs else marg
    return np.asarray(marg).reshape(-1)


def joint_distribution(parts: Sequence[tuple[np.ndarray, Sequence[int]]], n: int) -> np.ndarray:
    """Product of per-part distributions, each over the listed original qubits, in qubit order."""
    acc = np.ones(())
    axes: list[int] = []
    for dist, qubits in parts:
        acc = np.multiply.outer(acc, np.asarray(dist).reshape((2,) * len(qubits)))
        axes += list(qubits)
    if sorted(axes) != list(range(n)):
        raise SimulationError(f"parts cover qubits {sorted(axes)}, expected 0..{n - 1}")
    return np.transpose(acc, np.argsort(axes)).reshape(-1)


def run_subexperiment_exact(realized, o: Observable) -> float:
    """Exact value of ``f(y)`` times the mid-circuit eigenvalue product for one term assignment.

    ``realized`` carries ``circuits``, ``outputs`` (``(local, original)``
    pairs per circuit) and ``num_qubits``; the caller applies the sign.
    """
    parts = []
    for circ, outs in zip(realized.circuits, realized.outputs):
        dist = signed_distribution(circ, [lq for lq, _ in outs])
        parts.append((dist, [q for _, q in outs]))
    return o.expect(joint_distribution(parts, realized.num_qubits))


def run_stochastic(c: Circuit, shots: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Shot sampling with mid-circuit measurement.

    Returns ``(final bitstrings as ints, eigenvalue products)``, one per shot.
    """
    rng = np.random.default_rng(seed)
    branches = enumerate_branches(c)
    weights = np.array([np.vdot(a, a).real for _, a in branches])
    weights /= weights.sum()
    pick = rng.choice(len(branches), size=shots, p=weights)
    outcomes = np.empty(shots, dtype=np.int64)
    signs = np.empty(shots)
    for b in np.unique(pick):
        s, a = branches[b]
        p = np.abs(a.reshape(-1)) ** 2
        p /= p.sum()
        mask = pick == b
        outcomes[mask] = rng.choice(len(p), size=int(mask.sum()), p=p)
        signs[mask] = s
    return outcomes, signs


# ---------------------------------------------------------------- density matrices
#
# A batch of w-qubit operators is stored as shape (B,) + (2,)*w + (2,)*w:
# row axes 1..w, column axes w+1..2w.


def dm_from_matrix(rho: np.ndarray) -> np.ndarray:
    dim = rho.shape[-1]
    w = int(round(math.log2(dim)))
    return np.asarray(rho, dtype=complex).reshape((1,) + (2,) * (2 * w))


def dm_to_matrix(t: np.ndarray) -> np.ndarray:
    w = (t.ndim - 1) // 2
    return t.reshape(t.shape[0], 2**w, 2**w)


def dm_apply_unitary(t: np.ndarray, u: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    w = (t.ndim - 1) // 2
    rows = tuple(1 + q for q in qubits)
    cols = tuple(1 + w + q for q in qubits)
    t = _apply(t, u, rows)
    return _apply(t, u.conj(), cols)


def _diag_mask(t: np.ndarray, q: int, r: int, c: int) -> np.ndarray:
    w = (t.ndim - 1) // 2
    idx = [slice(None)] * t.ndim
    idx[1 + q] = r
    idx[1 + w + q] = c
    return tuple(idx)


def dm_signed_measure(t: np.ndarray, q: int) -> np.ndarray:
    """``P0 rho P0 - P1 rho P1`` on qubit ``q``: Z measurement weighted by its eigenvalue."""
    out = np.zeros_like(t)
    out[_diag_mask(t, q, 0, 0)] = t[_diag_mask(t, q, 0, 0)]
    out[_diag_mask(t, q, 1, 1)] = -t[_diag_mask(t, q, 1, 1)]
    return out


def dm_reset(t: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros_like(t)
    out[_diag_mask(t, q, 0, 0)] = t[_diag_mask(t, q, 0, 0)] + t[_diag_mask(t, q, 1, 1)]
    return out


def dm_apply_gate(t: np.ndarray, g: Gate, qubit_map: Sequence[int] | None = None) -> np.ndarray:
    qs = g.qubits if qubit_map is None else tuple(qubit_map[q] for q in g.qubits)
    if g.kind == "measure":
        return dm_signed_measure(t, qs[0])
    if g.kind in ("prep_z", "prep_x", "prep_y"):
        t = dm_reset(t, qs[0])
        if g.kind != "prep_z":
            t = dm_apply_unitary(t, _H, qs)
        if g.kind == "prep_y":
            t = dm_apply_unitary(t, np.diag([1, 1j]), qs)
        return t
    return dm_apply_unitary(t, gate_matrix(g.kind, g.params), qs)


def dm_apply_gates(t: np.ndarray, gates: Sequence[Gate], qubit_map: Sequence[int] | None = None) -> np.ndarray:
    for g in gates:
        t = dm_apply_gate(t, g, qubit_map)
    return t


def dm_diagonal(t: np.ndarray) -> np.ndarray:
    m = dm_to_matrix(t)
    return np.real(np.einsum("bii->bi", m))


def channel_apply(basis, rho_in: np.ndarray) -> np.ndarray:
    """Apply ``sum_i q_i (E_i^a (x) E_i^b)`` from a decomposition to ``rho_in``.

    Gate bases act on a two-qubit input (endpoint ``a`` is qubit 0). A wire
    cut is a one-qubit channel: the sender ops, then the receiver ops, act
    on the same qubit.
    """
    t = dm_from_matrix(rho_in)
    out = 0
    for term in basis.terms:
        if basis.is_wire:
            r = dm_apply_gates(t, term.ops_a, [0])
            r = dm_apply_gates(r, term.ops_b, [0])
        else:
            r = dm_apply_gates(t, term.ops_a, [0])
            r = dm_apply_gates(r, term.ops_b, [1])
        out = out + term.coefficient * r
    return dm_to_matrix(out)[0]


# ---------------------------------------------------------------- state dump

_MAGIC = b"CFSV"


def dump_state(state: State, path) -> None:
    """Header: magic ``CFSV``, uint32 version (1), uint32 qubit count; then
    little-endian float64 pairs (re, im) in basis-index order."""
    vec = state.vector.astype(np.complex128)
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<II", 1, state.n))
        fh.write(vec.astype("<c16").tobytes())


def load_state(path) -> State:
    with open(path, "rb") as fh:
        head = fh.read(12)
        if head[:4] != _MAGIC:
            raise SimulationError("not a cutforge state dump")
        _, n = struct.unpack("<II", head[4:])
        vec = np.frombuffer(fh.read(), dtype="<c16").astype(complex)
    return State(vec.reshape((2,) * n), n)
