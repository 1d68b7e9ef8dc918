import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from cutforge import reconstruct as rc
from cutforge.benchgen import LatticeSpec, QAOASpec, gen_lattice_model, gen_qaoa, gen_qft, gen_random, ring_edges
from cutforge.circuit import circuit
from cutforge.cutfinder import find_cuts
from cutforge.sim import Observable, expectation, simulate


def _check(c, m):
    plan = find_cuts(c, m).bind(c)
    dist, flops = rc.reconstruct_distribution(rc.cut_tensors(c, plan), with_flops=True)
    ref = simulate(c).probabilities()
    assert np.allclose(dist, ref, atol=1e-10)
    assert flops == rc.flops_estimate(plan.n_cuts, c.num_qubits)
    return plan


def test_bell(bell):
    plan = _check(bell, 1)
    o = Observable.parity(2)
    assert rc.exact_expectation(bell, plan, o) == pytest.approx(1.0)
    assert rc.exact_expectation(bell, plan, o, method="enumerate") == pytest.approx(1.0)


@pytest.mark.parametrize(
    "c,m",
    [
        (gen_qft(4, swaps=False), 2),
        (gen_lattice_model(LatticeSpec(3, "Ising", 0.7, 1), order=1), 5),
        (gen_qaoa(QAOASpec(6, 1, edges=ring_edges(6))), 3),
        (gen_random(5, 4, 11), 3),
    ],
)
def test_distribution_matches_uncut(c, m):
    _check(c, m)


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(3, 5), st.integers(1, 3), st.integers(0, 10**6), st.data())
def test_tensor_and_enumeration_agree(n, depth, seed, data):
    c = gen_random(n, depth, seed)
    m = data.draw(st.integers(2, n - 1))
    plan = find_cuts(c, m).bind(c)
    if plan.n_cuts > 3:
        return
    o = Observable.z(*data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
    ref = expectation(c, o)
    assert rc.exact_expectation(c, plan, o) == pytest.approx(ref, abs=1e-9)
    assert rc.exact_expectation(c, plan, o, method="enumerate") == pytest.approx(ref, abs=1e-9)


def test_function_observable_and_clip():
    c = gen_qft(3, swaps=False)
    plan = find_cuts(c, 2)
    o = Observable.from_function(3, lambda b: 1.0 if b == (0, 0, 0) else -0.5)
    assert rc.exact_expectation(c, plan, o) == pytest.approx(expectation(c, o))
    p = rc.clip_distribution(np.array([0.6, -0.1, 0.5]))
    assert p.min() >= 0 and p.sum() == pytest.approx(1.0)


def test_pool_cap():
    c = gen_qft(6, swaps=False)
    plan = find_cuts(c, 3)
    with pytest.raises(rc.PoolTooLargeError):
        rc.exact_expectation(c, plan, Observable.parity(6))


def test_leg_mismatch():
    c = gen_qft(4, swaps=False)
    plan = find_cuts(c, 2).bind(c)
    ts = rc.cut_tensors(c, plan)
    with pytest.raises(rc.LegMismatchError):
        rc.contract(ts[:1])


@pytest.mark.parametrize("sampling", ["importance", "uniform"])
def test_mc_is_seeded_and_close(bell, sampling):
    plan = find_cuts(bell, 1)
    o = Observable.parity(2)
    a = rc.mc_expectation(bell, plan, o, 0.05, seed=3, sampling=sampling)
    b = rc.mc_expectation(bell, plan, o, 0.05, seed=3, sampling=sampling)
    assert a.estimate == b.estimate
    assert a.N_s_used == 3600
    assert abs(a.estimate - 1.0) < 0.1
    assert set(a.to_dict()) >= {"estimate", "N_s", "mode", "eps_rct_target"}


def test_mc_unbiased_on_random_circuit():
    c = gen_random(4, 3, 2)
    plan = find_cuts(c, 2)
    o = Observable.z(0, 3)
    ref = expectation(c, o)
    r = rc.mc_expectation(c, plan, o, 0.05, seed=0, n_samples=20000)
    assert abs(r.estimate - ref) < 5 * r.extra["sample_std"] / np.sqrt(20000)


def test_tensor_result_flops():
    c = circuit(3, [("h", (0,)), ("cx", (0, 1)), ("cx", (1, 2))])
    plan = find_cuts(c, 2)
    r = rc.tensor_result(c, plan, Observable.parity(3), exact_reference=expectation(c, Observable.parity(3)))
    assert r.estimate == pytest.approx(r.exact_reference)
    assert r.flops_performed == rc.flops_estimate(plan.n_cuts, 3)
