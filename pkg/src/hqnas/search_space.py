"""Genome encoding of hybrid quantum network candidates and its variation operators.

A genome has nine gene positions, in this fixed order::

    n_qubits, embedding, gate0, gate1, gate2, gate3, ent_gate, topology, n_layers

``gate_types`` carries four per-layer slots even when fewer layers are active, so
the full product of gene domains is 9 * 2 * 3**4 * 2 * 2 * 4 = 23,328 genomes.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

import numpy as np


class Embedding(str, Enum):
    ANGLE = "ANGLE"
    AMPLITUDE = "AMPLITUDE"


class Rotation(str, Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"


class Entangler(str, Enum):
    CNOT = "CNOT"
    CZ = "CZ"


class Topology(str, Enum):
    LINEAR = "LINEAR"
    CIRCULAR = "CIRCULAR"


MAX_LAYERS = 4
QUBIT_CHOICES = tuple(range(2, 11))
LAYER_CHOICES = tuple(range(1, MAX_LAYERS + 1))

GENE_NAMES = (
    "n_qubits", "embedding", "gate0", "gate1", "gate2", "gate3",
    "ent_gate", "topology", "n_layers",
)
GENE_DOMAINS: tuple[tuple, ...] = (
    QUBIT_CHOICES,
    tuple(Embedding),
    tuple(Rotation), tuple(Rotation), tuple(Rotation), tuple(Rotation),
    tuple(Entangler),
    tuple(Topology),
    LAYER_CHOICES,
)
SPACE_SIZE = math.prod(len(d) for d in GENE_DOMAINS)

_ENUM_TYPES = (None, Embedding, Rotation, Rotation, Rotation, Rotation, Entangler, Topology, None)


@dataclass(frozen=True)
class Genome:
    n_qubits: int
    embedding: Embedding
    gate_types: tuple[Rotation, Rotation, Rotation, Rotation]
    ent_gate: Entangler
    topology: Topology
    n_layers: int

    def __post_init__(self):
        # normalise plain strings / lists into the enum-typed canonical form
        object.__setattr__(self, "n_qubits", int(self.n_qubits))
        object.__setattr__(self, "n_layers", int(self.n_layers))
        object.__setattr__(self, "embedding", _as_enum(Embedding, self.embedding))
        object.__setattr__(self, "gate_types", tuple(_as_enum(Rotation, g) for g in self.gate_types))
        object.__setattr__(self, "ent_gate", _as_enum(Entangler, self.ent_gate))
        object.__setattr__(self, "topology", _as_enum(Topology, self.topology))
        if self.n_qubits not in QUBIT_CHOICES:
            raise ValueError(f"n_qubits must be in 2..10, got {self.n_qubits}")
        if self.n_layers not in LAYER_CHOICES:
            raise ValueError(f"n_layers must be in 1..{MAX_LAYERS}, got {self.n_layers}")
        if len(self.gate_types) != MAX_LAYERS:
            raise ValueError(f"gate_types needs exactly {MAX_LAYERS} slots")

    @property
    def genes(self) -> tuple:
        return (self.n_qubits, self.embedding, *self.gate_types,
                self.ent_gate, self.topology, self.n_layers)

    @classmethod
    def from_genes(cls, genes: Sequence) -> Genome:
        if len(genes) != len(GENE_NAMES):
            raise ValueError(f"expected {len(GENE_NAMES)} genes, got {len(genes)}")
        return cls(genes[0], genes[1], tuple(genes[2:6]), genes[6], genes[7], genes[8])

    @property
    def index(self) -> int:
        """Mixed-radix position of this genome in :func:`enumerate_space` order."""
        idx = 0
        for value, domain in zip(self.genes, GENE_DOMAINS):
            idx = idx * len(domain) + domain.index(value)
        return idx

    @classmethod
    def from_index(cls, index: int) -> Genome:
        if not 0 <= index < SPACE_SIZE:
            raise ValueError(f"genome index out of range: {index}")
        genes = []
        for domain in reversed(GENE_DOMAINS):
            index, r = divmod(index, len(domain))
            genes.append(domain[r])
        return cls.from_genes(genes[::-1])

    def to_record(self) -> dict:
        """Flat record with enums as their uppercase string values."""
        return {name: (v.value if isinstance(v, Enum) else v)
                for name, v in zip(GENE_NAMES, self.genes)}

    @classmethod
    def from_record(cls, record: dict) -> Genome:
        return cls.from_genes([_parse_gene(i, record[name]) for i, name in enumerate(GENE_NAMES)])

    def to_csv_row(self) -> str:
        return ",".join(str(v) for v in self.to_record().values())

    @classmethod
    def from_csv_row(cls, row: str) -> Genome:
        parts = row.strip().split(",")
        if len(parts) != len(GENE_NAMES):
            raise ValueError(f"expected {len(GENE_NAMES)} fields, got {len(parts)}: {row!r}")
        return cls.from_genes([_parse_gene(i, p) for i, p in enumerate(parts)])

    def __str__(self):
        return self.to_csv_row()


def _as_enum(enum_type, value):
    if isinstance(value, enum_type):
        return value
    return enum_type(str(value).strip().upper())


def _parse_gene(position: int, value):
    enum_type = _ENUM_TYPES[position]
    if enum_type is None:
        return int(value)
    return _as_enum(enum_type, value)


def sample_genome(rng: np.random.Generator) -> Genome:
    """Draw every gene independently and uniformly from its domain."""
    return Genome.from_genes([d[rng.integers(len(d))] for d in GENE_DOMAINS])


def enumerate_space(n_qubits: Sequence[int] | None = None) -> Iterator[Genome]:
    """Yield every legal genome once, in index order.

    ``n_qubits`` optionally restricts the qubit gene to a subset of its domain.
    """
    domains = list(GENE_DOMAINS)
    if n_qubits is not None:
        domains[0] = tuple(q for q in QUBIT_CHOICES if q in set(n_qubits))
    for genes in itertools.product(*domains):
        yield Genome.from_genes(genes)


def uniform_crossover(a: Genome, b: Genome, rng: np.random.Generator) -> Genome:
    take_a = rng.random(len(GENE_NAMES)) < 0.5
    return Genome.from_genes([ga if t else gb for ga, gb, t in zip(a.genes, b.genes, take_a)])


def pointwise_mutate(g: Genome, p_m: float, rng: np.random.Generator) -> Genome:
    """Resample each gene position from its full domain with probability ``p_m``."""
    if not 0.0 <= p_m <= 1.0:
        raise ValueError(f"mutation probability must be in [0, 1], got {p_m}")
    hits = rng.random(len(GENE_NAMES)) < p_m
    draws = [rng.integers(len(d)) for d in GENE_DOMAINS]
    return Genome.from_genes([d[k] if hit else v
                              for v, d, k, hit in zip(g.genes, GENE_DOMAINS, draws, hits)])
