import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutforge import qpd
from cutforge.circuit import GATE_SPECS
from cutforge.sim import channel_apply, gate_matrix

from .conftest import product_inputs

ANGLES = [0.0, 0.7, math.pi, 2.3]


def _cases():
    for k in sorted(qpd.CUTTABLE_KINDS):
        for th in ANGLES if GATE_SPECS[k][1] else [None]:
            yield k, () if th is None else (th,)


@pytest.mark.parametrize("kind,params", list(_cases()))
def test_gate_decomposition_reproduces_channel(kind, params):
    b = qpd.basis_for(kind, params)
    u = gate_matrix(kind, params)
    inputs, _ = product_inputs()
    err = max(np.abs(channel_apply(b, r) - u @ r @ u.conj().T).max() for r in inputs)
    assert err < 1e-12
    assert b.gamma == pytest.approx(qpd.expected_gamma(kind, params), abs=1e-12)
    assert sum(b.coefficients) == pytest.approx(1.0, abs=1e-12)
    assert b.probabilities.sum() == pytest.approx(1.0)


def test_wire_cut_is_identity():
    w = qpd.wire_cut_basis()
    _, dms = product_inputs()
    for r in dms:
        assert np.allclose(channel_apply(w, r), r, atol=1e-12)
    assert w.gamma == 4.0 and len(w.terms) == qpd.WIRE_POOL_TERMS


def test_pool_convention_term_counts():
    assert len(qpd.basis_for("rzz", (0.3,)).terms) == qpd.GATE_POOL_TERMS
    assert len(qpd.basis_for("cp", (0.3,)).terms) == qpd.GATE_POOL_TERMS
    assert qpd.basis_for("cx").matches_pool_convention
    assert not qpd.basis_for("swap").matches_pool_convention


@settings(max_examples=40, deadline=None)
@given(st.floats(-2 * math.pi, 2 * math.pi), st.sampled_from(["rzz", "rxx", "ryy", "rzx", "cp", "crz", "crx", "cry"]))
def test_gamma_closed_form_property(theta, kind):
    b = qpd.basis_for(kind, (theta,))
    assert b.gamma == pytest.approx(qpd.expected_gamma(kind, (theta,)), abs=1e-9)
    assert b.gamma >= 1 - 1e-12


def test_leg_factors_reconstruct_table():
    for kind, params in [("cx", ()), ("cp", (0.4,)), (qpd.WIRE, ())]:
        b = qpd.basis_for(kind, params)
        ua, L, ub, R = b.leg_factors()
        # M[a, b] = sum_i q_i [ops_a==a][ops_b==b]
        m = np.zeros((len(ua), len(ub)))
        for t in b.terms:
            m[ua.index(t.ops_a), ub.index(t.ops_b)] += t.coefficient
        assert np.allclose(L @ R.T, m, atol=1e-12)
        assert L.shape[1] <= 4 or kind in ("swap", "iswap")


def test_num_samples_exact_decimal():
    assert qpd.num_samples(460, 0.01) == 4_600_000
    assert qpd.num_samples(9, 0.1) == 900
    assert qpd.num_samples(1, 0.5) == 4
    with pytest.raises(ValueError):
        qpd.num_samples(9, 0.0)
    assert qpd.num_samples(9, 0.1, hoeffding=True) > 900


def test_pool_sizes():
    assert qpd.pool_size(2, 1) == 288
    assert qpd.pool_size_log10(6, 1) == pytest.approx(math.log10(6**6 * 8))
    with pytest.raises(ValueError):
        qpd.pool_size(-1, 0)


def test_subexperiment_index_validation():
    bases = [qpd.basis_for("cx"), qpd.wire_cut_basis()]
    with pytest.raises(IndexError):
        qpd.SubexperimentIndex.make(bases, [0])
    with pytest.raises(IndexError):
        qpd.SubexperimentIndex.make(bases, [0, 99])
    idx = list(qpd.enumerate_indices(bases))
    assert len(idx) == qpd.verified_pool_size(bases)
    assert sum(i.coefficient() for i in idx) == pytest.approx(1.0)


def test_weighted_sampling_frequencies():
    b = qpd.basis_for("cp", (1.1,))
    draws = [i.choices[0] for i in qpd.sample_indices([b], 40000, seed=5, weighted=True)]
    freq = np.bincount(draws, minlength=len(b.terms)) / len(draws)
    assert np.allclose(freq, b.probabilities, atol=0.01)
    a = [i.choices for i in qpd.sample_indices([b], 50, seed=9)]
    assert a == [i.choices for i in qpd.sample_indices([b], 50, seed=9)]


def test_not_cuttable():
    with pytest.raises(qpd.NotCuttableError):
        qpd.basis_for("h")
