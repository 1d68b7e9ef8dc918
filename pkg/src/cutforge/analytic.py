"""Closed-form cut-count predictors and their comparison with the cut finder."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Iterable

DEFAULT_C = {"Ising": 3.0, "Heisenberg": 12.0, "FermiHubbard": 6.0}
GAP_TOLERANCE = 0.5


@dataclass(frozen=True)
class LatticeCutModel:
    D: int
    m: int
    steps: int = 1
    c: float | None = None
    model: str = "Ising"

    def __post_init__(self):
        if self.model not in DEFAULT_C:
            raise ValueError(f"unknown model {self.model!r}")
        if not 1 <= self.m <= self.qubits:
            raise ValueError(f"m must lie in [1, {self.qubits}]")
        if self.c is not None and self.c <= 0:
            raise ValueError("c must be positive")

    @property
    def qubits(self) -> int:
        return 2 * self.D**2 if self.model == "FermiHubbard" else self.D**2

    @property
    def multiplier(self) -> float:
        return DEFAULT_C[self.model] if self.c is None else self.c


def cuts_lattice(model: LatticeCutModel) -> float:
    """``c * steps * Q / sqrt(m)``; asymptotic, so it stays positive even at ``m = Q``."""
    return model.multiplier * model.steps * model.qubits / math.sqrt(model.m)


def cuts_qft(n: int, m: int) -> int:
    """Controlled-phase gates crossing consecutive blocks of ``m`` qubits."""
    if not 1 <= m <= n:
        raise ValueError("need 1 <= m <= n")
    return sum(m * (n - k * m) for k in range(1, math.ceil(n / m)))


def qft_average_log10(n: int) -> float:
    """log10 of the mean of :func:`cuts_qft` over ``m = 1 .. n-1``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    vals = [cuts_qft(n, m) for m in range(1, n)]
    return math.log10(sum(vals) / len(vals))


def lattice_average_log10(D: int, steps: int, model: str = "Ising", ms: Iterable[int] | None = None) -> float:
    q = 2 * D * D if model == "FermiHubbard" else D * D
    ms = list(ms) if ms is not None else list(range(2, q))
    vals = [cuts_lattice(LatticeCutModel(D, m, steps, model=model)) for m in ms]
    return math.log10(sum(vals) / len(vals))


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class ModelInstance:
    benchmark: str  # qft | Ising | Heisenberg | FermiHubbard
    n_or_D: int
    m: int
    steps: int = 1


@dataclass(frozen=True)
class ModelRow:
    benchmark: str
    n_or_D: int
    m: int
    steps: int
    predicted_cuts: float
    found_cuts: int
    log10_gap: float
    flagged: bool


def _log_gap(pred: float, found: int) -> float:
    if pred <= 0 and found == 0:
        return 0.0
    if pred <= 0 or found == 0:
        return math.inf
    return math.log10(found / pred)


def _instance_circuit(inst: ModelInstance):
    from .benchgen import LatticeSpec, gen_lattice_model, gen_qft

    if inst.benchmark == "qft":
        return gen_qft(inst.n_or_D, swaps=False)
    spec = LatticeSpec(inst.n_or_D, inst.benchmark, 1.0, inst.steps)
    return gen_lattice_model(spec, order=4)


def predicted_cuts(inst: ModelInstance) -> float:
    if inst.benchmark == "qft":
        return float(cuts_qft(inst.n_or_D, inst.m))
    return cuts_lattice(LatticeCutModel(inst.n_or_D, inst.m, inst.steps, model=inst.benchmark))


def validate_against_finder(instances: Iterable[ModelInstance], circuit_for=None, finder=None) -> list[ModelRow]:
    """Predicted versus found cut counts; rows with ``|log10 gap| > 0.5`` are flagged.

    QFT instances drop the terminal swaps and lattice instances use one
    fourth-order step per unit of ``steps``.
    """
    from .cutfinder import find_cuts

    finder = finder or find_cuts
    circuit_for = circuit_for or _instance_circuit
    rows = []
    for inst in instances:
        c = circuit_for(inst)
        plan = finder(c, inst.m)
        pred = predicted_cuts(inst)
        gap = _log_gap(pred, plan.n_cuts)
        rows.append(
            ModelRow(inst.benchmark, inst.n_or_D, inst.m, inst.steps, pred, plan.n_cuts, gap, abs(gap) > GAP_TOLERANCE)
        )
    return rows


def max_gap(rows: Iterable[ModelRow]) -> float:
    return max((abs(r.log10_gap) for r in rows), default=0.0)


def rows_to_csv(rows: Iterable[ModelRow]) -> str:
    buf = io.StringIO()
    fields = list(ModelRow.__dataclass_fields__)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        d = asdict(r)
        d["predicted_cuts"] = f"{r.predicted_cuts:.6f}"
        d["log10_gap"] = f"{r.log10_gap:.6f}"
        w.writerow(d)
    return buf.getvalue()


def qft_suite(n_range: Iterable[int] = range(5, 21)) -> list[ModelInstance]:
    return [ModelInstance("qft", n, m) for n in n_range for m in range(2, n)]


def lattice_suite(D_range: Iterable[int] = range(3, 7), model: str = "Ising", steps: int = 1) -> list[ModelInstance]:
    return [ModelInstance(model, D, m, steps) for D in D_range for m in range(2, D * D)]
