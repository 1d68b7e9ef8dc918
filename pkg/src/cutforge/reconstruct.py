"""Recombining subexperiment results: exact, Monte-Carlo and tensor-network modes.

Tensor mode propagates, per subcircuit, a batch of density matrices. Each
cut port widens the batch along a leg: the port's local operations are
applied and mixed with one factor of the low-rank split of the cut's term
table (see :meth:`QPDBasis.leg_factors`). Reading out the diagonal gives a
:class:`CutTensor` of shape ``(leg dims...) + (2**outputs,)``; matched legs
are then contracted sequentially in subcircuit order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import sim
from .circuit import Circuit, Gate
from .cutfinder import CutPlan, Port, Subcircuit, extract_subcircuits
from .qpd import (
    enumerate_indices,
    plan_bases,
    pool_size_log10,
    realize_subexperiment,
    sample_indices,
    verified_pool_size,
)

ENUMERATION_CAP = 10**6


class PoolTooLargeError(RuntimeError):
    pass


class LegMismatchError(ValueError):
    pass


@dataclass
class CutTensor:
    """``data`` has one axis per leg (in ``legs`` order) followed by the output axis."""

    data: np.ndarray
    legs: list[int]
    outputs: list[int]  # original qubits, most significant first

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape


@dataclass
class ReconstructionResult:
    estimate: float
    mode: str
    N_s_used: int = 0
    eps_rct_target: float | None = None
    flops_performed: int = 0
    exact_reference: float | None = None
    pool_log10: float = 0.0
    flops_log10: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["N_s"] = d.pop("N_s_used")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def flops_estimate(n_cuts: int, num_qubits: int) -> int:
    return 4**n_cuts * 2**num_qubits


def flops_estimate_log10(n_cuts: int, num_qubits: int) -> float:
    return n_cuts * math.log10(4) + num_qubits * math.log10(2)


# ---------------------------------------------------------------- tensor mode


def _subcircuit_tensor(sub: Subcircuit, bases) -> CutTensor:
    w = sub.width
    sim.check_guard(2 * w)
    rho = np.zeros((1,) + (2,) * (2 * w), dtype=complex)
    rho[(0,) * (2 * w + 1)] = 1.0
    legs: list[int] = []
    for item in sub.items:
        if isinstance(item, Gate):
            rho = sim.dm_apply_gate(rho, item)
            continue
        ua, L, ub, R = bases[item.cut_id].leg_factors()
        ops, fac = (ua, L) if item.role in ("gate_a", "wire_send") else (ub, R)
        qmap = [item.qubit]
        branches = np.stack([sim.dm_apply_gates(rho, op, qmap) for op in ops])
        # (n_ops, B, ...) -> (rank, B, ...)
        rho = np.tensordot(fac.T, branches, axes=(1, 0))
        rho = rho.reshape((-1,) + rho.shape[2:])
        legs.insert(0, item.cut_id)
    dims = [bases[c].leg_factors()[1].shape[1] for c in legs]
    diag = sim.dm_diagonal(rho).real.reshape((-1,) + (2,) * w)
    out_local = [lq for lq, _ in sub.outputs]
    drop = tuple(1 + q for q in range(w) if q not in out_local)
    if drop:
        diag = diag.sum(axis=drop)
    kept = [q for q in range(w) if q in out_local]
    diag = np.transpose(diag, [0] + [1 + kept.index(lq) for lq in out_local])
    data = diag.reshape(tuple(dims) + (2 ** len(out_local),))
    return CutTensor(data, legs, [q for _, q in sub.outputs])


def cut_tensors(c: Circuit, plan: CutPlan, subcircuits: list[Subcircuit] | None = None) -> list[CutTensor]:
    if not plan.cut_channels and plan.n_cuts:
        plan = plan.bind(c)
    subs = subcircuits or extract_subcircuits(c, plan)
    bases = plan_bases(plan)
    return [_subcircuit_tensor(s, bases) for s in subs]


def contract(tensors: list[CutTensor]) -> tuple[np.ndarray, list[int], int]:
    """Sequential pairwise contraction; returns ``(vector, output qubit order, multiplications)``."""
    if not tensors:
        raise LegMismatchError("nothing to contract")
    counts: dict[int, int] = {}
    for t in tensors:
        if t.data.ndim != len(t.legs) + 1:
            raise LegMismatchError("tensor rank does not match its leg labels")
        for leg in t.legs:
            counts[leg] = counts.get(leg, 0) + 1
    if any(v != 2 for v in counts.values()):
        bad = sorted(k for k, v in counts.items() if v != 2)
        raise LegMismatchError(f"legs {bad} do not pair across exactly two tensors")
    cur = tensors[0]
    flops = 0
    for nxt in tensors[1:]:
        shared = [leg for leg in cur.legs if leg in nxt.legs]
        for leg in shared:
            if cur.data.shape[cur.legs.index(leg)] != nxt.data.shape[nxt.legs.index(leg)]:
                raise LegMismatchError(f"leg {leg} dimension differs")
        # einsum labels: legs by id, outputs as two fresh labels
        ids = {leg: i for i, leg in enumerate(sorted(set(cur.legs) | set(nxt.legs)))}
        oa, ob = len(ids), len(ids) + 1
        la = [ids[l] for l in cur.legs] + [oa]
        lb = [ids[l] for l in nxt.legs] + [ob]
        rest_a = [l for l in cur.legs if l not in shared]
        rest_b = [l for l in nxt.legs if l not in shared]
        lo = [ids[l] for l in rest_a + rest_b] + [oa, ob]
        data = np.einsum(cur.data, la, nxt.data, lb, lo, optimize=True)
        flops += int(np.prod(data.shape)) * int(np.prod([cur.data.shape[cur.legs.index(l)] for l in shared] or [1]))
        data = data.reshape(data.shape[:-2] + (-1,))
        cur = CutTensor(data, rest_a + rest_b, cur.outputs + nxt.outputs)
    if cur.legs:
        raise LegMismatchError(f"dangling legs {cur.legs}")
    return cur.data.reshape(-1), cur.outputs, flops


def _to_qubit_order(vec: np.ndarray, outputs: list[int]) -> np.ndarray:
    n = len(outputs)
    if n == 0:
        return vec
    t = vec.reshape((2,) * n)
    return np.transpose(t, np.argsort(outputs)).reshape(-1)


def reconstruct_distribution(tensors: list[CutTensor], with_flops: bool = False):
    """Quasi-distribution over all output qubits (qubit 0 most significant)."""
    vec, outs, flops = contract(tensors)
    sim.check_guard(len(outs))
    dist = _to_qubit_order(vec, outs)
    return (dist, flops) if with_flops else dist


def clip_distribution(p: np.ndarray) -> np.ndarray:
    """Clip negative entries and renormalise (a view for display; estimates stay raw)."""
    q = np.clip(p, 0, None)
    s = q.sum()
    return q / s if s > 0 else q


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


# ---------------------------------------------------------------- expectation modes


def _check_pool(plan: CutPlan, cap: int) -> None:
    size = verified_pool_size(plan_bases(plan))
    if size > cap:
        raise PoolTooLargeError(f"pool of {size} subexperiments exceeds cap {cap}; use mc_expectation")


def exact_expectation(
    c: Circuit,
    plan: CutPlan,
    o: sim.Observable,
    method: str = "tensor",
    cap: int = ENUMERATION_CAP,
) -> float:
    """Full-pool reconstruction of ``<o>``.

    ``method="enumerate"`` literally sums ``q_idx * contribution`` over the
    pool (slow; the independent route), ``"tensor"`` contracts cut tensors.
    """
    plan = plan.bind(c)
    _check_pool(plan, cap)
    subs = extract_subcircuits(c, plan)
    if method == "tensor":
        return o.expect(reconstruct_distribution(cut_tensors(c, plan, subs)))
    if method != "enumerate":
        raise ValueError(f"unknown method {method!r}")
    total = 0.0
    for idx in enumerate_indices(plan_bases(plan)):
        if idx.weight == 0:
            continue
        r = realize_subexperiment(subs, plan, idx)
        total += idx.coefficient() * sim.run_subexperiment_exact(r, o)
    return total


def mc_expectation(
    c: Circuit,
    plan: CutPlan,
    o: sim.Observable,
    eps_rct: float,
    seed=None,
    n_samples: int | None = None,
    sampling: str = "importance",
    exact_reference: float | None = None,
) -> ReconstructionResult:
    """Monte-Carlo estimate from ``N_s = gamma^2 / eps^2`` sampled subexperiments.

    ``sampling="importance"`` draws each cut's term with probability
    ``|q_i| / gamma`` and averages ``gamma_total * sign * contribution``;
    ``"uniform"`` draws uniformly from the pool and averages
    ``pool * q * contribution``. Both are unbiased and coincide when every
    term has the same ``|q_i|``. Contributions are exact per subexperiment.
    """
    from .qpd import num_samples

    plan = plan.bind(c)
    bases = plan_bases(plan)
    gamma = math.prod(b.gamma for b in bases)
    n_s = n_samples or num_samples(gamma**2, eps_rct)
    subs = extract_subcircuits(c, plan)
    memo: dict[tuple[int, ...], float] = {}

    def contribution(idx) -> float:
        if idx.choices not in memo:
            memo[idx.choices] = sim.run_subexperiment_exact(realize_subexperiment(subs, plan, idx), o)
        return memo[idx.choices]

    if sampling == "importance":
        draws = sample_indices(bases, n_s, seed, weighted=True)
        vals = [gamma * idx.global_sign * contribution(idx) for idx in draws]
    elif sampling == "uniform":
        pool = verified_pool_size(bases)
        vals = [pool * idx.coefficient() * contribution(idx) for idx in sample_indices(bases, n_s, seed)]
    else:
        raise ValueError(f"unknown sampling {sampling!r}")
    vals = np.asarray(vals)
    return ReconstructionResult(
        float(vals.mean()),
        "monte-carlo",
        int(n_s),
        eps_rct,
        0,
        exact_reference,
        pool_size_log10(plan.n_gate, plan.n_wire),
        None,
        {"sample_std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0, "unique_subexperiments": len(memo)},
    )


def tensor_result(c: Circuit, plan: CutPlan, o: sim.Observable, exact_reference: float | None = None) -> ReconstructionResult:
    plan = plan.bind(c)
    dist, flops = reconstruct_distribution(cut_tensors(c, plan), with_flops=True)
    return ReconstructionResult(
        o.expect(dist),
        "tensor",
        0,
        None,
        flops,
        exact_reference,
        pool_size_log10(plan.n_gate, plan.n_wire),
        flops_estimate_log10(plan.n_cuts, c.num_qubits),
    )
