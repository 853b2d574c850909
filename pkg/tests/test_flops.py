import dataclasses

import pytest

from hqnas.flops import classical_flops, measure, quantum_layer_flops
from hqnas.search_space import Genome, enumerate_space


def genome(**kw):
    base = dict(n_qubits=2, embedding="ANGLE", gate_types=("RX",) * 4, ent_gate="CNOT",
                topology="LINEAR", n_layers=1)
    base.update(kw)
    return Genome(**base)


def test_classical_worked_example():
    # pre fwd (2*4*2+2) + pre bwd (4*4*2+2) + post fwd (2*2*3+3) + post bwd (4*2*3+3) + 6*3
    assert classical_flops(4, 2, 3) == 18 + 34 + 15 + 27 + 18 == 112


def test_classical_pre_layer_terms_scale_with_d():
    n, c = 5, 3
    post_and_softmax = (2 * n * c + c) + (4 * n * c + c) + 6 * c

    def pre_weight_terms(d):
        return classical_flops(d, n, c) - post_and_softmax - 2 * n  # drop the bias terms

    for d in (1, 4, 13, 64):
        assert pre_weight_terms(2 * d) == 2 * pre_weight_terms(d)


def test_quantum_worked_example():
    # embed 2*56, one layer of 2 single-qubit gates (2*56) and one CNOT (2), <Z> on 2 wires (2*4*2)
    forward = 2 * 28 * 2 + 28 * 2 * 2 + 2 + 2 * 4 * 2
    assert forward == 242
    assert quantum_layer_flops(genome()) == 3 * forward == 726


def test_more_layers_cost_more():
    for g in [genome(n_qubits=q, n_layers=1) for q in range(2, 11)]:
        costs = [quantum_layer_flops(dataclasses.replace(g, n_layers=k)) for k in range(1, 5)]
        assert costs == sorted(set(costs))


def test_qubit_scaling_of_gate_terms():
    g2 = genome(n_qubits=2, embedding="AMPLITUDE", n_layers=4)
    g3 = dataclasses.replace(g2, n_qubits=3)
    ratio = quantum_layer_flops(g3) / quantum_layer_flops(g2)
    assert 2 <= ratio <= 4


def test_topology_adds_one_entangler_per_layer():
    for q, gate, layers in [(2, "CNOT", 1), (5, "CZ", 3), (10, "CNOT", 4)]:
        lin = genome(n_qubits=q, ent_gate=gate, n_layers=layers, topology="LINEAR")
        circ = dataclasses.replace(lin, topology="CIRCULAR")
        per_gate = (2 if gate == "CNOT" else 6) * 2 ** (q - 2)
        d = measure(circ, 10, 3).f_quantum - measure(lin, 10, 3).f_quantum
        assert d == 3 * layers * per_gate


def test_measure_over_whole_space():
    by_width = {}
    for g in enumerate_space():
        r = measure(g, 64, 10)
        assert r.f_quantum == max(r.f_total - r.f_classical, 0) == r.f_total - r.f_classical
        assert r.f_quantum > 0 and r.f_classical > 0
        assert by_width.setdefault(g.n_qubits, r.f_classical) == r.f_classical


def test_nondecreasing_in_qubits():
    for n in range(2, 10):
        a, b = genome(n_qubits=n), genome(n_qubits=n + 1)
        assert quantum_layer_flops(b) >= quantum_layer_flops(a)


def test_invalid_dimensions():
    with pytest.raises(ValueError):
        classical_flops(0, 2, 3)
