"""Analytic one-sample forward+backward FLOPs for the hybrid model.

Real-operation accounting: a complex multiply is 6 FLOPs and a complex add 2.
Every constant below is fixed so that costs are reproducible across machines;
only the relative ordering of candidates matters to the search.
"""
from __future__ import annotations

from dataclasses import dataclass

from .search_space import Embedding, Entangler, Genome, Topology

BACKWARD_FACTOR = 2  # one adjoint re-traversal costs about one forward pass, twice over


@dataclass(frozen=True)
class FlopsReport:
    f_classical: int
    f_total: int
    f_quantum: int

    def to_record(self) -> dict:
        return {"f_classical": self.f_classical, "f_quantum": self.f_quantum, "f_total": self.f_total}


def linear_flops(d_in: int, d_out: int) -> int:
    forward = 2 * d_in * d_out + d_out
    backward = 4 * d_in * d_out + d_out  # input grad + weight grad + bias grad
    return forward + backward


def classical_flops(d: int, n_qubits: int, n_classes: int) -> int:
    """Pre-layer, post-layer and log-softmax cost for one sample."""
    if min(d, n_qubits, n_classes) < 1:
        raise ValueError("dimensions must be positive")
    return linear_flops(d, n_qubits) + linear_flops(n_qubits, n_classes) + 6 * n_classes


def single_qubit_gate_flops(n: int) -> int:
    # 2x2 complex matvec (4 mul + 2 add) on each of the 2**(n-1) amplitude pairs
    return 28 * 2 ** (n - 1)


def entangler_flops(gate: Entangler, n: int) -> int:
    per_quarter = 2 if Entangler(gate) is Entangler.CNOT else 6
    return per_quarter * 2 ** (n - 2)


def embedding_flops(embedding: Embedding, n: int) -> int:
    if Embedding(embedding) is Embedding.ANGLE:
        return n * single_qubit_gate_flops(n)
    return 3 * 2 ** n


def measurement_flops(n: int) -> int:
    return n * 4 * 2 ** (n - 1)


def quantum_forward_flops(g) -> int:
    n = g.n_qubits
    n_pairs = n - 1 + (1 if Topology(g.topology) is Topology.CIRCULAR else 0)
    per_layer = n * single_qubit_gate_flops(n) + n_pairs * entangler_flops(g.ent_gate, n)
    return embedding_flops(g.embedding, n) + g.n_layers * per_layer + measurement_flops(n)


def quantum_layer_flops(g) -> int:
    """Forward plus adjoint backward cost of the quantum layer.

    Accepts a :class:`Genome` or a ``CircuitSpec``; only the structural genes matter.
    """
    return (1 + BACKWARD_FACTOR) * quantum_forward_flops(g)


def measure(g: Genome, d: int, n_classes: int) -> FlopsReport:
    f_classical = classical_flops(d, g.n_qubits, n_classes)
    f_total = f_classical + quantum_layer_flops(g)
    return FlopsReport(f_classical, f_total, max(f_total - f_classical, 0))
