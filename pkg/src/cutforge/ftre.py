"""Fault-tolerant resource estimation for whole circuits and for cut subcircuits.

Model summary (all constants live in :class:`HardwareProfile`):

* logical failure per qubit per cycle ``a * (p / p_th) ** ((d + 1) / 2)``;
  a logical cycle is ``d`` syndrome rounds of ``4 t_gate + t_readout``;
* each logical qubit is a ``2 d^2`` patch, optionally inside a routing layout
  of ``2Q + ceil(sqrt(8Q)) + 1`` patches;
* T states come from 15-to-1 factories (``p_out = 35 p_in^3``, second level
  if needed); runtime is the longer of the algorithm's logical depth and the
  time the factories need to supply every T state.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

from .circuit import Circuit, Gate

PI = math.pi
MAX_DISTANCE = 99
DEFAULT_FRACTIONS = (1 / 3, 1 / 6, 1 / 6, 1 / 3)


class EstimationError(RuntimeError):
    pass


class DistanceCapError(EstimationError):
    pass


class FactoryError(EstimationError):
    pass


@dataclass(frozen=True)
class ErrorBudget:
    eps_total: float
    eps_log: float
    eps_dis: float
    eps_syn: float
    eps_alg: float

    def __post_init__(self):
        parts = (self.eps_log, self.eps_dis, self.eps_syn, self.eps_alg)
        if min(parts) < 0:
            raise ValueError("budget components must be non-negative")
        if abs(math.fsum(parts) - self.eps_total) > 1e-12:
            raise ValueError("budget components must sum to eps_total")

    @classmethod
    def from_total(cls, eps_total: float, fractions: Sequence[float] = DEFAULT_FRACTIONS) -> "ErrorBudget":
        if not 0 < eps_total < 1:
            raise ValueError("eps_total must lie in (0, 1)")
        s = math.fsum(fractions)
        f = [x / s for x in fractions]
        log, dis, syn = (eps_total * x for x in f[:3])
        # last component absorbs rounding so the parts re-sum exactly
        alg = eps_total - log - dis - syn
        return cls(eps_total, log, dis, syn, max(alg, 0.0))

    def scaled(self, w: float) -> "ErrorBudget":
        return ErrorBudget.from_total(
            self.eps_total * w, (self.eps_log, self.eps_dis, self.eps_syn, self.eps_alg)
        )


@dataclass(frozen=True)
class FactorySpec:
    """15-to-1 distillation unit; footprint in ``2 d_f^2`` tiles, duration in logical cycles.

    The defaults make one factory the runtime bottleneck for small
    rotation-heavy circuits, as in the estimator family this model imitates.
    """

    tiles: int = 16
    duration_cycles: int = 20
    output_states: int = 1
    error_coeff: float = 35.0


@dataclass(frozen=True)
class HardwareProfile:
    t_gate: float = 50e-9
    t_readout: float = 100e-9
    p_phys: float = 1e-4
    a: float = 0.03
    p_th: float = 1e-2
    factory: FactorySpec = field(default_factory=FactorySpec)
    layout: bool = True
    synth_a: float = 0.53
    synth_b: float = 5.3

    def __post_init__(self):
        if not self.p_phys < self.p_th:
            raise ValueError("p_phys must be below threshold")

    @property
    def round_time(self) -> float:
        return 4 * self.t_gate + self.t_readout

    def logical_error(self, d: int) -> float:
        return self.a * (self.p_phys / self.p_th) ** ((d + 1) / 2)


@dataclass(frozen=True)
class LogicalCounts:
    logical_qubits: int = 0
    logical_depth: int = 0
    t_count: int = 0
    rotation_count: int = 0
    measurement_count: int = 0
    # rotations left after lowering multi-qubit gates, each needing synthesis
    synth_rotations: int = 0
    # rotation layers on the longest chain (depth excluding synthesis expansion)
    rotation_depth: int = 0
    clifford_depth: int = 0

    def with_depth(self, depth: int) -> "LogicalCounts":
        return replace(self, logical_depth=depth)


# ---------------------------------------------------------------- lowering


def _angle_class(theta: float) -> str:
    """``clifford`` for multiples of pi/2, ``t`` for odd multiples of pi/4, else ``rot``."""
    k = theta / (PI / 4)
    if abs(k - round(k)) < 1e-9:
        return "clifford" if round(k) % 2 == 0 else "t"
    return "rot"


def _lower(g: Gate) -> list[tuple[str, tuple[int, ...]]]:
    """Lowered op classes ``("clifford" | "t" | "rot" | "measure", qubits)``."""
    k, q = g.kind, g.qubits
    if k in ("t", "tdg"):
        return [("t", q)]
    if k in ("rx", "ry", "rz"):
        return [(_angle_class(g.params[0]), q)]
    if k in ("rxx", "ryy", "rzz", "rzx"):
        return [("clifford", q), (_angle_class(g.params[0]), q[1:]), ("clifford", q)]
    if k in ("cp", "crx", "cry", "crz", "cs", "csx", "ch"):
        theta = {"cs": PI / 2, "csx": PI / 2, "ch": PI / 2}.get(k, g.params[0] if g.params else 0.0)
        half = _angle_class(theta / 2)
        return [("clifford", q), (half, q[1:]), ("clifford", q), (half, q[:1])]
    if k == "measure":
        return [("measure", q)]
    return [("clifford", q)]


def count_logical(c: Circuit) -> LogicalCounts:
    lowered = [op for g in c.gates for op in _lower(g)]
    t = sum(1 for cls, _ in lowered if cls == "t")
    rots = sum(1 for cls, _ in lowered if cls == "rot")
    meas = sum(1 for cls, _ in lowered if cls == "measure") + sum(
        1 for g in c.gates if g.kind in ("prep_z", "prep_x", "prep_y")
    )
    # layered depth; rotation layers tracked separately so synthesis can expand them
    level = [(0, 0)] * c.num_qubits
    for cls, qs in lowered:
        r = max(level[x][0] for x in qs)
        other = max(level[x][1] for x in qs)
        nxt = (r + 1, other) if cls == "rot" else (r, other + 1)
        for x in qs:
            level[x] = nxt
    best = max(level, key=lambda v: (v[0], v[1]), default=(0, 0))
    depth = max((a + b for a, b in level), default=0)
    return LogicalCounts(
        c.num_qubits,
        depth,
        t,
        sum(1 for g in c.gates if g.params),
        meas,
        rots,
        best[0],
        depth - best[0],
    )


def synthesis_t_cost(rotations: int, eps_syn: float, a: float = 0.53, b: float = 5.3) -> int:
    if rotations == 0:
        return 0
    if not 0 < eps_syn < 1:
        raise ValueError("eps_syn must lie in (0, 1)")
    per = math.ceil(a * math.log2(max(rotations, 1) / eps_syn) + b)
    return rotations * max(per, 0)


def t_per_rotation(rotations: int, eps_syn: float, hw: HardwareProfile) -> int:
    return synthesis_t_cost(rotations, eps_syn, hw.synth_a, hw.synth_b) // rotations if rotations else 0


def logical_qubits_with_layout(q: int, hw: HardwareProfile) -> int:
    if not hw.layout or q == 0:
        return q
    return 2 * q + math.ceil(math.sqrt(8 * q)) + 1


def choose_distance(counts: LogicalCounts, eps_log: float, hw: HardwareProfile) -> int:
    """Smallest odd ``d`` with ``Q * depth * P_L(d) <= eps_log``."""
    if not 0 < eps_log < 1:
        raise ValueError("eps_log must lie in (0, 1)")
    volume = max(counts.logical_qubits, 1) * max(counts.logical_depth, 1)
    d = 1
    while volume * hw.logical_error(d) > eps_log:
        d += 2
        if d > MAX_DISTANCE:
            raise DistanceCapError(f"no distance <= {MAX_DISTANCE} meets eps_log={eps_log}")
    return d


@dataclass(frozen=True)
class FactoryPlan:
    levels: int
    distance: int
    footprint: int
    duration_s: float
    output_error: float

    @property
    def states_per_second(self) -> float:
        return 1.0 / self.duration_s


def plan_factory(n_t: int, eps_dis: float, hw: HardwareProfile) -> FactoryPlan | None:
    """Cheapest 15-to-1 configuration whose per-state error fits ``eps_dis / n_t``.

    The factory distance keeps the unit's own Clifford noise
    (``tiles * cycles * P_L(d_f)``) below the distilled output error, so the
    footprint is set by the protocol rather than by the demand.
    """
    if n_t == 0:
        return None
    target = eps_dis / n_t
    f = hw.factory
    p_in = hw.p_phys
    for levels in (1, 2):
        p_dist = f.error_coeff * p_in**3
        units = 1 if levels == 1 else 16
        cycles = f.duration_cycles * levels
        d = 1
        while units * f.tiles * cycles * hw.logical_error(d) > p_dist:
            d += 2
            if d > MAX_DISTANCE:
                raise DistanceCapError("factory distance cap exceeded")
        p_out = p_dist + units * f.tiles * cycles * hw.logical_error(d)
        if p_out <= target:
            return FactoryPlan(levels, d, units * f.tiles * 2 * d * d, cycles * d * hw.round_time, p_out)
        p_in = p_out
    raise FactoryError(f"two-level 15-to-1 output cannot reach {target:.3e} per state")


@dataclass(frozen=True)
class ResourceEstimate:
    code_distance: int
    physical_qubits: int
    factories: int
    runtime: float
    budget: ErrorBudget
    counts: LogicalCounts
    t_states: int = 0
    factory: FactoryPlan | None = None
    bound: str = "algorithm"

    def to_dict(self) -> dict:
        return {
            "d": self.code_distance,
            "physical_qubits": self.physical_qubits,
            "factories": self.factories,
            "runtime_s": self.runtime,
            "t_states": self.t_states,
            "bound": self.bound,
            "budget": asdict(self.budget),
            "counts": asdict(self.counts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def estimate(
    c: Circuit | LogicalCounts,
    budget: ErrorBudget,
    hw: HardwareProfile | None = None,
    factories: int = 1,
) -> ResourceEstimate:
    """Physical qubits and runtime for one circuit under ``budget``.

    Synthesised rotations expand into ``t_per_rotation`` sequential T layers;
    the algorithm's logical cycles are that expanded depth, stretched to the
    magic-state supply time when the factories cannot keep up. The code
    distance is chosen for the stretched cycle count.
    """
    hw = hw or HardwareProfile()
    counts = c if isinstance(c, LogicalCounts) else count_logical(c)
    if factories < 0:
        raise ValueError("factories must be >= 0")
    per_rot = t_per_rotation(counts.synth_rotations, budget.eps_syn, hw) if counts.synth_rotations else 0
    n_t = counts.t_count + per_rot * counts.synth_rotations
    alg_cycles = counts.clifford_depth + counts.rotation_depth * max(per_rot, 1)
    fplan = plan_factory(n_t, budget.eps_dis, hw)
    if n_t and factories == 0:
        raise FactoryError("circuit needs T states but no factories were given")
    supply_s = 0.0
    if fplan is not None:
        runs = math.ceil(n_t / (factories * hw.factory.output_states))
        supply_s = runs * fplan.duration_s
    q = logical_qubits_with_layout(counts.logical_qubits, hw)
    # d and stretched cycle count are mutually dependent through the cycle time
    d = choose_distance(LogicalCounts(q, max(alg_cycles, 1)), budget.eps_log, hw)
    for _ in range(8):
        cycle = d * hw.round_time
        cycles = max(alg_cycles, math.ceil(supply_s / cycle)) if supply_s else alg_cycles
        d_new = choose_distance(LogicalCounts(q, max(cycles, 1)), budget.eps_log, hw)
        if d_new == d:
            break
        d = max(d, d_new)
    cycle = d * hw.round_time
    alg_s = max(alg_cycles, 1) * cycle
    runtime = max(alg_s, supply_s)
    phys = q * 2 * d * d + (factories * fplan.footprint if fplan else 0)
    return ResourceEstimate(
        d,
        phys,
        factories if fplan else 0,
        runtime,
        budget,
        counts,
        n_t,
        fplan,
        "supply" if supply_s > alg_s else "algorithm",
    )


# ---------------------------------------------------------------- cut aggregation


def split_budget(
    widths: Sequence[int],
    eps_total: float,
    mode: str = "proportional",
    weights: Sequence[float] | None = None,
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
) -> list[ErrorBudget]:
    """One budget per subcircuit: ``equal``, ``proportional`` to width, or ``explicit`` weights.

    ``widths`` may also be subcircuit objects with a ``width`` attribute.
    """
    ws = [getattr(w, "width", w) for w in widths]
    if not ws:
        raise ValueError("need at least one subcircuit")
    if mode == "equal":
        shares = [1.0] * len(ws)
    elif mode == "proportional":
        shares = [float(w) for w in ws]
    elif mode == "explicit":
        if weights is None or len(weights) != len(ws):
            raise ValueError("explicit mode needs one weight per subcircuit")
        shares = [float(x) for x in weights]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    tot = math.fsum(shares)
    out = [ErrorBudget.from_total(eps_total * s / tot, fractions) for s in shares[:-1]]
    rest = eps_total - math.fsum(b.eps_total for b in out)
    out.append(ErrorBudget.from_total(rest, fractions))
    return out


def aggregate_cut_execution(estimates: Sequence[ResourceEstimate], n_samples: int) -> tuple[int, float]:
    """Space-efficient model: one device sized for the widest subexperiment, run ``N_s`` times."""
    if not estimates or n_samples < 1:
        raise ValueError("need >= 1 estimate and N_s >= 1")
    return max(e.physical_qubits for e in estimates), max(e.runtime for e in estimates) * n_samples


def aggregate_log10(estimates: Sequence[ResourceEstimate], n_samples_log10: float) -> tuple[int, float]:
    """Same as :func:`aggregate_cut_execution` with ``N_s`` and the runtime in log10."""
    return max(e.physical_qubits for e in estimates), math.log10(max(e.runtime for e in estimates)) + n_samples_log10


def percent_reduction(baseline_phys: float, cut_phys: Sequence[float]) -> float:
    if baseline_phys <= 0:
        raise ValueError("baseline must be positive")
    return 100.0 * (baseline_phys - max(cut_phys)) / baseline_phys


def factory_sweep(
    c: Circuit,
    budget: ErrorBudget,
    hw: HardwareProfile | None = None,
    k_range: Sequence[int] = range(1, 6),
    baseline: ResourceEstimate | None = None,
) -> list[tuple[int, float, float]]:
    """``(k, runtime / baseline runtime, qubits / baseline qubits)`` for ``k`` factories.

    The baseline defaults to the single-factory estimate of ``c`` itself.
    """
    ks = list(k_range)
    if not ks:
        raise ValueError("empty factory range")
    base = baseline or estimate(c, budget, hw, 1)
    out = []
    for k in ks:
        e = estimate(c, budget, hw, k)
        out.append((k, e.runtime / base.runtime, e.physical_qubits / base.physical_qubits))
    return out


def subcircuit_for_estimation(sub) -> Circuit:
    """Subcircuit gates plus one measurement per cut port (its readout slot)."""
    gates = [g for g in sub.items if isinstance(g, Gate)]
    gates += [Gate("measure", (p.qubit,)) for p in sub.cut_ports]
    return Circuit(sub.width, tuple(gates), sub.name)
