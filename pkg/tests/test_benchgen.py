import math

import numpy as np
import pytest

from cutforge import benchgen as bg
from cutforge.circuit import interaction_graph
from cutforge.sim import circuit_unitary, simulate

from .test_sim import X, Y, Z, embed


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_qft_equals_dft(n):
    N = 2**n
    w = np.exp(2j * np.pi / N)
    dft = np.array([[w ** (j * k) for k in range(N)] for j in range(N)]) / math.sqrt(N)
    assert np.allclose(circuit_unitary(bg.gen_qft(n, swaps=True)), dft, atol=1e-12)


def test_qft_gate_counts():
    c = bg.gen_qft(6, swaps=False)
    assert c.count("cp") == 15 and c.count("h") == 6 and c.count("swap") == 0
    assert bg.gen_qft(6).count("swap") == 3
    assert interaction_graph(c).total_multiplicity() == 15


def _dense_h(spec):
    n, (J, h) = spec.num_qubits, spec.couplings
    H = np.zeros((2**n, 2**n), dtype=complex)
    if spec.model == "Ising":
        for a, b in bg.grid_edges(spec.D):
            H -= J * embed(np.kron(Z, Z), (a, b), n)
        for q in range(n):
            H -= h * embed(X, (q,), n)
    else:
        for a, b in bg.grid_edges(spec.D):
            for P in (X, Y, Z):
                H += J * embed(np.kron(P, P), (a, b), n)
        for q in range(n):
            H += h * embed(Z, (q,), n)
    return H


@pytest.mark.parametrize("model", ["Ising", "Heisenberg"])
def test_trotter_converges_to_exact_evolution(model):
    spec0 = bg.LatticeSpec(2, model, 0.8, 1, (1.0, 0.6))
    w, v = np.linalg.eigh(_dense_h(spec0))
    exact = v @ np.diag(np.exp(-1j * spec0.t_evolution * w)) @ v.conj().T
    for order in (1, 2, 4):
        errs = []
        for steps in (2, 4):
            spec = bg.LatticeSpec(2, model, 0.8, steps, (1.0, 0.6))
            u = circuit_unitary(bg.gen_lattice_model(spec, order))
            errs.append(np.linalg.norm(u - exact, 2))
        # error falls roughly as steps^-order
        assert errs[1] < errs[0] * 2.0 ** (-order) * 1.8
    assert errs[1] < 1e-3


def test_lattice_counts_and_identity_at_t0():
    c = bg.gen_lattice_model(bg.LatticeSpec(3, "Ising", 1.0, 1), order=1)
    assert c.count("rzz") == 12 and c.count("rx") == 9
    h = bg.gen_lattice_model(bg.LatticeSpec(3, "Heisenberg", 1.0, 1), order=1)
    assert sum(h.count(k) for k in ("rxx", "ryy", "rzz")) == 36
    z = bg.gen_lattice_model(bg.LatticeSpec(2, "Heisenberg", 0.0, 3), order=4)
    assert np.allclose(circuit_unitary(z), np.eye(16))
    fh = bg.LatticeSpec(2, "FermiHubbard", 1.0, 1)
    assert fh.num_qubits == 8
    assert bg.gen_lattice_model(fh, 1).num_qubits == 8
    assert bg.stages_per_step(4) > bg.stages_per_step(2) >= bg.stages_per_step(1)


def test_lattice_spec_validation():
    with pytest.raises(ValueError):
        bg.LatticeSpec(1, "Ising", 1.0, 1)
    with pytest.raises(ValueError):
        bg.LatticeSpec(3, "Potts", 1.0, 1)
    with pytest.raises(ValueError):
        bg.gen_lattice_model(bg.LatticeSpec(2, "Ising", 1.0, 1), order=3)


def test_trotter_steps_for_error():
    assert bg.trotter_steps_for_error(2, 1, 4, 1e-3) == 14
    n = bg.trotter_steps_for_error(1.5, 2.0, 2, 1e-2)
    assert (1.5 * 2.0) ** 3 / n**2 <= 1e-2 < (1.5 * 2.0) ** 3 / (n - 1) ** 2


def test_qaoa():
    ring = bg.gen_qaoa(bg.QAOASpec(4, 1, edges=bg.ring_edges(4)))
    assert (ring.count("h"), ring.count("rzz"), ring.count("rx")) == (4, 4, 4)
    spec = bg.QAOASpec(10, 2, graph_seed=3)
    edges = spec.graph_edges()
    assert len(edges) == 15 and edges == bg.QAOASpec(10, 2, graph_seed=3).graph_edges()
    assert bg.gen_qaoa(spec).count("rzz") == 30


@pytest.mark.parametrize("phase,bits", [(0.25, 3), (0.625, 3), (0.75, 2)])
def test_qpe_reads_exact_phase(phase, bits):
    c = bg.gen_qpe(bits, phase)
    p = simulate(c).probabilities().reshape(2**bits, -1).sum(axis=1)
    assert int(np.argmax(p)) == round(phase * 2**bits)
    assert p.max() == pytest.approx(1.0)
    assert bg.gen_qpe(bits, phase, target_qubits=2).num_qubits == bits + 2


def test_random_is_seeded():
    assert bg.gen_random(5, 4, 1) == bg.gen_random(5, 4, 1)
    assert bg.gen_random(5, 4, 1).count("cx") == 8
