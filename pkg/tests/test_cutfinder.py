import json
import math

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cutforge import qpd
from cutforge.benchgen import LatticeSpec, gen_lattice_model, gen_qft, gen_random
from cutforge.circuit import circuit
from cutforge.cutfinder import (
    CutPlan,
    FinderConfig,
    InfeasibleCutError,
    PlanError,
    SearchBudgetExhausted,
    extract_subcircuits,
    find_cuts,
    plan_summary,
    validate_plan,
)


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def brute_force_log_gamma_sq(c, m):
    """Minimum total log(gamma^2) over all qubit partitions with blocks <= m (gate cuts only)."""
    best = math.inf
    for part in set_partitions(list(range(c.num_qubits))):
        if max(len(b) for b in part) > m:
            continue
        lab = {q: i for i, b in enumerate(part) for q in b}
        cost = 0.0
        for g in c.gates:
            if g.arity == 2 and lab[g.qubits[0]] != lab[g.qubits[1]]:
                cost += 2 * math.log(qpd.basis_for(g.kind, g.params).gamma)
        best = min(best, cost)
    return best


def plan_log_gamma_sq(plan):
    return sum(2 * math.log(b.gamma) for b in qpd.plan_bases(plan))


def test_bell_single_gate_cut(bell):
    p = find_cuts(bell, 1)
    assert (p.n_gate, p.n_wire) == (1, 0)
    assert qpd.total_overhead(p) == pytest.approx(9.0)


def test_no_cut_needed():
    c = gen_qft(4, swaps=False)
    p = find_cuts(c, 4)
    assert p.n_cuts == 0 and qpd.total_overhead(p) == 1.0


def test_qft6_m4_plan():
    c = gen_qft(6, swaps=False)
    p = find_cuts(c, 4)
    assert sorted(p.widths().values()) == [3, 4]
    assert (p.n_gate, p.n_wire) == (6, 1)
    assert qpd.total_overhead(p) == pytest.approx(459.58, abs=0.01)


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(3, 6), st.integers(1, 5), st.integers(0, 10**6), st.data())
def test_gate_only_finder_matches_brute_force(n, depth, seed, data):
    c = gen_random(n, depth, seed)
    m = data.draw(st.integers(1, n - 1))
    p = find_cuts(c, m, allow_wire=False)
    validate_plan(c, p)
    assert max(p.widths().values()) <= m
    assert plan_log_gamma_sq(p) <= brute_force_log_gamma_sq(c, m) + 1e-6


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 6), st.integers(1, 5), st.integers(0, 10**6), st.data())
def test_wires_never_hurt_and_plans_validate(n, depth, seed, data):
    c = gen_random(n, depth, seed)
    m = data.draw(st.integers(2, n - 1))
    gate_only = find_cuts(c, m, allow_wire=False)
    mixed = find_cuts(c, m)
    validate_plan(c, mixed)
    assert plan_log_gamma_sq(mixed) <= plan_log_gamma_sq(gate_only) + 1e-9
    assert find_cuts(c, m) == mixed  # deterministic


def test_plan_json_roundtrip():
    c = gen_qft(6, swaps=False)
    p = find_cuts(c, 4)
    back = CutPlan.from_dict(json.loads(p.to_json()), c)
    assert back == p


def test_validate_rejects_bad_plans():
    c = gen_qft(4, swaps=False)
    p = find_cuts(c, 2)
    with pytest.raises(PlanError):
        validate_plan(c, CutPlan(2, 4, {0: 0, 1: 0, 2: 0, 3: 1}))
    with pytest.raises(PlanError):
        validate_plan(c, CutPlan(2, 4, p.partition, p.gate_cuts[1:], p.wire_cuts))
    with pytest.raises(PlanError):
        find_cuts(c, 0)
    with pytest.raises(PlanError):
        find_cuts(c, 2, allow_wire=False, allow_gate=False)


def test_wire_only_cutting():
    c = circuit(2, [("h", (0,)), ("cx", (0, 1)), ("h", (1,)), ("h", (0,))])
    with pytest.raises(InfeasibleCutError):
        find_cuts(c, 1, allow_gate=False)
    chain = circuit(3, [("h", (0,)), ("cx", (0, 1)), ("cx", (1, 2)), ("cx", (1, 2))])
    p = find_cuts(chain, 2, allow_gate=False)
    assert p.n_gate == 0 and p.n_wire >= 1


def test_budget_exhaustion_strict():
    c = gen_lattice_model(LatticeSpec(4, "Ising", 1.0, 1), order=1)
    cfg = FinderConfig(max_expansions=5, strict=True)
    with pytest.raises(SearchBudgetExhausted) as ei:
        find_cuts(c, 5, config=cfg)
    assert not ei.value.plan.complete
    loose = find_cuts(c, 5, config=FinderConfig(max_expansions=5))
    validate_plan(c, loose)


def test_extract_subcircuits_ports():
    c = gen_qft(6, swaps=False)
    p = find_cuts(c, 4)
    subs = extract_subcircuits(c, p)
    assert [s.width for s in subs] == [3, 4]
    assert all(len(s.cut_ports) == 7 for s in subs)
    outs = sorted(q for s in subs for _, q in s.outputs)
    assert outs == list(range(6))
    s = plan_summary(p)
    assert s.n_gate == 6 and s.n_wire == 1
