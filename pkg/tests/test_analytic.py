import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutforge import analytic as an
from cutforge.benchgen import gen_qft


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 30), st.data())
def test_cuts_qft_counts_crossing_gates(n, data):
    m = data.draw(st.integers(1, n))
    c = gen_qft(n, swaps=False)
    crossing = sum(1 for g in c.gates if g.arity == 2 and g.qubits[0] // m != g.qubits[1] // m)
    assert an.cuts_qft(n, m) == crossing


def test_qft_small_values():
    assert an.cuts_qft(6, 4) == 8
    assert an.cuts_qft(6, 6) == 0
    assert an.cuts_qft(6, 1) == 15
    assert an.qft_average_log10(5) == pytest.approx(0.84, abs=0.1)


def test_lattice_model():
    mdl = an.LatticeCutModel(4, 4, steps=2)
    assert an.cuts_lattice(mdl) == pytest.approx(3 * 2 * 16 / 2)
    assert an.LatticeCutModel(2, 2, model="FermiHubbard").qubits == 8
    with pytest.raises(ValueError):
        an.LatticeCutModel(3, 10)
    with pytest.raises(ValueError):
        an.LatticeCutModel(3, 2, model="Potts")
    assert 3.2 <= an.lattice_average_log10(6, 100) <= 4.1


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(1, 50), st.data())
def test_lattice_model_decreasing_in_m(D, steps, data):
    m = data.draw(st.integers(1, D * D - 1))
    a = an.cuts_lattice(an.LatticeCutModel(D, m, steps))
    b = an.cuts_lattice(an.LatticeCutModel(D, m + 1, steps))
    assert b < a


def test_validation_rows_and_csv():
    rows = an.validate_against_finder(an.qft_suite(range(5, 8)))
    assert len(rows) == 3 + 4 + 5
    assert an.max_gap(rows) <= an.GAP_TOLERANCE
    text = an.rows_to_csv(rows)
    assert text.splitlines()[0].startswith("benchmark,n_or_D,m")
    assert len(text.splitlines()) == len(rows) + 1


def test_log_gap_edge_cases():
    assert an._log_gap(0, 0) == 0.0
    assert math.isinf(an._log_gap(0, 3))
