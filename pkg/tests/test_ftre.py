import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutforge import ftre
from cutforge.benchgen import gen_qft, gen_random
from cutforge.circuit import circuit
from cutforge.cutfinder import extract_subcircuits, find_cuts


def oracle_distance(volume, eps_log, p=1e-4, pth=1e-2, a=0.03):
    """Closed form: smallest odd d with volume * a * (p/pth)^((d+1)/2) <= eps_log."""
    x = math.log(eps_log / (volume * a)) / math.log(p / pth)
    d = max(1, math.ceil(2 * x - 1 - 1e-12))
    return d if d % 2 else d + 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10**4), st.integers(1, 10**6), st.floats(1e-6, 0.5))
def test_choose_distance_matches_closed_form(q, depth, eps):
    hw = ftre.HardwareProfile()
    d = ftre.choose_distance(ftre.LogicalCounts(q, depth), eps, hw)
    assert d == oracle_distance(q * depth, eps)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-6, 0.9), st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4))
def test_budget_components_sum(eps, fractions):
    b = ftre.ErrorBudget.from_total(eps, fractions)
    assert math.fsum((b.eps_log, b.eps_dis, b.eps_syn, b.eps_alg)) == pytest.approx(eps, abs=1e-15)


def test_budget_validation():
    with pytest.raises(ValueError):
        ftre.ErrorBudget(0.01, 0.005, 0.001, 0.001, 0.001)
    with pytest.raises(ValueError):
        ftre.ErrorBudget.from_total(1.5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=1, max_size=6), st.floats(1e-5, 0.5), st.sampled_from(["equal", "proportional"]))
def test_split_budget_sums(widths, eps, mode):
    bs = ftre.split_budget(widths, eps, mode)
    assert len(bs) == len(widths)
    assert math.fsum(b.eps_total for b in bs) == pytest.approx(eps, rel=1e-12)


def test_clifford_only_338():
    hw = ftre.HardwareProfile(layout=False)
    # P_L(13) = 3e-16 <= 1e-15 < P_L(11) = 3e-15
    budget = ftre.ErrorBudget(1e-15, 1e-15, 0.0, 0.0, 0.0)
    e = ftre.estimate(ftre.LogicalCounts(1, 1, clifford_depth=1), budget, hw, factories=0)
    assert e.code_distance == 13
    assert e.physical_qubits == 338 and e.factory is None


def test_counts_lowering():
    c = circuit(2, [("t", (0,)), ("rz", (1,), (0.3,)), ("rz", (1,), (math.pi / 2,)), ("cp", (0, 1), (math.pi / 2,)), ("measure", (0,))])
    k = ftre.count_logical(c)
    assert k.t_count == 3  # one T plus the two pi/4 halves of the controlled phase
    assert k.synth_rotations == 1
    assert k.rotation_count == 3
    assert k.measurement_count == 1


def test_synthesis_cost():
    assert ftre.synthesis_t_cost(0, 0.01) == 0
    assert ftre.synthesis_t_cost(10, 0.01) == 10 * math.ceil(0.53 * math.log2(10 / 0.01) + 5.3)


def test_estimate_monotone_in_eps():
    c = gen_qft(6, swaps=False)
    loose = ftre.estimate(c, ftre.ErrorBudget.from_total(0.1))
    tight = ftre.estimate(c, ftre.ErrorBudget.from_total(1e-4))
    assert tight.code_distance >= loose.code_distance
    assert tight.physical_qubits >= loose.physical_qubits
    assert tight.t_states >= loose.t_states


def test_factory_sweep_monotone():
    rows = ftre.factory_sweep(gen_qft(10), ftre.ErrorBudget.from_total(0.01), k_range=range(1, 7))
    assert rows[0][1] == pytest.approx(1.0) and rows[0][2] == pytest.approx(1.0)
    for (_, t0, q0), (_, t1, q1) in zip(rows, rows[1:]):
        assert t1 <= t0 + 1e-12
        assert q1 >= q0


def test_factory_needed():
    with pytest.raises(ftre.FactoryError):
        ftre.estimate(gen_qft(4), ftre.ErrorBudget.from_total(0.01), factories=0)
    with pytest.raises(ftre.FactoryError):
        ftre.plan_factory(10**6, 1e-30, ftre.HardwareProfile())


def test_proportional_not_worse_than_equal():
    c = gen_qft(6, swaps=False)
    subs = extract_subcircuits(c, find_cuts(c, 4))
    hw = ftre.HardwareProfile()

    def worst(mode):
        bs = ftre.split_budget(subs, 0.01, mode)
        return max(ftre.estimate(ftre.subcircuit_for_estimation(s), b, hw).physical_qubits for s, b in zip(subs, bs))

    assert worst("proportional") <= worst("equal")


def test_aggregation_and_reduction():
    c = gen_random(4, 3, 1)
    e = ftre.estimate(c, ftre.ErrorBudget.from_total(0.01))
    q, t = ftre.aggregate_cut_execution([e, e], 100)
    assert q == e.physical_qubits and t == pytest.approx(100 * e.runtime)
    q2, tl = ftre.aggregate_log10([e], 2.0)
    assert tl == pytest.approx(math.log10(100 * e.runtime))
    assert ftre.percent_reduction(100, [80, 60]) == pytest.approx(20.0)
    assert set(e.to_dict()) >= {"d", "physical_qubits", "factories", "runtime_s"}
