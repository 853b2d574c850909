"""Dense state-vector simulation of the searched circuit family.

States are complex arrays whose last axis holds the 2**n amplitudes; any leading
axes are treated as a batch. Wire 0 is the most significant bit of the basis index,
so ``|10>`` (wire 0 set) is amplitude index 2 on two qubits.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .search_space import MAX_LAYERS, Embedding, Entangler, Genome, Rotation, Topology

DEGENERATE_NORM = 1e-12


class InvalidInputError(ValueError):
    pass


class DegenerateEmbeddingError(InvalidInputError):
    """Amplitude embedding of a vector whose norm vanishes."""


@dataclass
class CircuitSpec:
    n_qubits: int
    embedding: Embedding
    gate_types: tuple[Rotation, ...]
    ent_gate: Entangler
    topology: Topology
    n_layers: int
    theta: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (MAX_LAYERS, self.n_qubits):
            raise InvalidInputError(
                f"theta must have shape {(MAX_LAYERS, self.n_qubits)}, got {self.theta.shape}")

    @classmethod
    def from_genome(cls, g: Genome, theta=None) -> CircuitSpec:
        if theta is None:
            theta = np.zeros((MAX_LAYERS, g.n_qubits))
        return cls(g.n_qubits, g.embedding, g.gate_types, g.ent_gate, g.topology, g.n_layers, theta)


def n_qubits_of(state: np.ndarray) -> int:
    size = state.shape[-1]
    n = size.bit_length() - 1
    if size < 2 or 1 << n != size:
        raise InvalidInputError(f"state length {size} is not a power of two")
    return n


# ---------------------------------------------------------------------------
# embeddings

def angle_embed(x, n_qubits: int | None = None) -> np.ndarray:
    """Product state with wire i in cos(x_i)|0> + sin(x_i)|1>."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if n_qubits is not None and n != n_qubits:
        raise InvalidInputError(f"angle embedding needs {n_qubits} features, got {n}")
    lead = x.shape[:-1]
    state = np.ones(lead + (1,))
    for i in range(n):
        factor = np.stack([np.cos(x[..., i]), np.sin(x[..., i])], axis=-1)
        state = (state[..., :, None] * factor[..., None, :]).reshape(lead + (-1,))
    return state.astype(complex)


def amplitude_embed(x, n_qubits: int) -> np.ndarray:
    """Zero-pad ``x`` to 2**n_qubits entries and scale to unit norm."""
    x = np.asarray(x, dtype=float)
    m, size = x.shape[-1], 1 << n_qubits
    if not 1 <= m <= size:
        raise InvalidInputError(f"amplitude embedding takes 1..{size} features, got {m}")
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norm <= DEGENERATE_NORM):
        raise DegenerateEmbeddingError("cannot amplitude-embed an all-zero vector")
    state = np.zeros(x.shape[:-1] + (size,), dtype=complex)
    state[..., :m] = x / norm
    return state


def embed(embedding: Embedding, x, n_qubits: int) -> np.ndarray:
    if embedding is Embedding.ANGLE:
        return angle_embed(x, n_qubits)
    return amplitude_embed(x, n_qubits)


# ---------------------------------------------------------------------------
# gates

def rotation_matrix(gate: Rotation, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if gate is Rotation.RX:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if gate is Rotation.RY:
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def rotation_derivative(gate: Rotation, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if gate is Rotation.RX:
        return 0.5 * np.array([[-s, -1j * c], [-1j * c, -s]])
    if gate is Rotation.RY:
        return 0.5 * np.array([[-s, -c], [c, -s]], dtype=complex)
    return 0.5j * np.array([[-np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def _check_wire(wire: int, n: int):
    if not 0 <= wire < n:
        raise InvalidInputError(f"wire {wire} out of range for {n} qubits")


def apply_matrix(state: np.ndarray, matrix: np.ndarray, wire: int) -> np.ndarray:
    """Apply an arbitrary 2x2 matrix to one wire of a (batched) state."""
    n = n_qubits_of(state)
    _check_wire(wire, n)
    lead = state.shape[:-1]
    v = state.reshape(lead + (1 << wire, 2, 1 << (n - wire - 1)))
    s0, s1 = v[..., 0, :], v[..., 1, :]
    out = np.empty_like(v)
    out[..., 0, :] = matrix[0, 0] * s0 + matrix[0, 1] * s1
    out[..., 1, :] = matrix[1, 0] * s0 + matrix[1, 1] * s1
    return out.reshape(state.shape)


def apply_rotation(state: np.ndarray, gate: Rotation, wire: int, theta: float) -> np.ndarray:
    return apply_matrix(state, rotation_matrix(Rotation(gate), theta), wire)


def apply_entangler(state: np.ndarray, gate: Entangler, control: int, target: int) -> np.ndarray:
    n = n_qubits_of(state)
    _check_wire(control, n)
    _check_wire(target, n)
    if control == target:
        raise InvalidInputError("control and target must differ")
    lead = state.shape[:-1]
    v = state.reshape(lead + (2,) * n).copy()
    ax_c, ax_t = len(lead) + control, len(lead) + target
    idx = [slice(None)] * v.ndim
    idx[ax_c] = 1
    if Entangler(gate) is Entangler.CZ:
        idx[ax_t] = 1
        v[tuple(idx)] *= -1
    else:
        sub = v[tuple(idx)]
        flip_axis = ax_t if target < control else ax_t - 1
        sub[...] = np.flip(sub, axis=flip_axis).copy()
    return v.reshape(state.shape)


def entangling_pairs(n_qubits: int, topology: Topology) -> list[tuple[int, int]]:
    """(control, target) pairs of one entangling round, in application order."""
    pairs = [(i, i + 1) for i in range(n_qubits - 1)]
    if Topology(topology) is Topology.CIRCULAR:
        pairs.append((n_qubits - 1, 0))
    return pairs


def entangling_round(state: np.ndarray, gate: Entangler, topology: Topology,
                     n_qubits: int | None = None) -> np.ndarray:
    n = n_qubits_of(state) if n_qubits is None else n_qubits
    if n < 2:
        raise InvalidInputError("an entangling round needs at least two qubits")
    for c, t in entangling_pairs(n, topology):
        state = apply_entangler(state, gate, c, t)
    return state


# ---------------------------------------------------------------------------
# measurement

@lru_cache(maxsize=None)
def z_signs(n_qubits: int) -> np.ndarray:
    """(n_qubits, 2**n_qubits) table of Pauli-Z eigenvalues per wire and basis index."""
    j = np.arange(1 << n_qubits)
    bits = (j[None, :] >> (n_qubits - 1 - np.arange(n_qubits)[:, None])) & 1
    signs = 1.0 - 2.0 * bits
    signs.setflags(write=False)
    return signs


def expval_z(state: np.ndarray) -> np.ndarray:
    probs = state.real ** 2 + state.imag ** 2
    return probs @ z_signs(n_qubits_of(state)).T


# ---------------------------------------------------------------------------
# circuits

def circuit_ops(spec: CircuitSpec) -> list[tuple]:
    """Flat gate list: ("rot", gate, wire, layer) and ("ent", gate, control, target)."""
    ops = []
    pairs = entangling_pairs(spec.n_qubits, spec.topology)
    for k in range(spec.n_layers):
        gate = Rotation(spec.gate_types[k])
        ops.extend(("rot", gate, w, k) for w in range(spec.n_qubits))
        ops.extend(("ent", Entangler(spec.ent_gate), c, t) for c, t in pairs)
    return ops


def _check_input(spec: CircuitSpec, x: np.ndarray):
    if spec.embedding is Embedding.ANGLE and x.shape[-1] != spec.n_qubits:
        raise InvalidInputError(f"angle embedding needs {spec.n_qubits} features, got {x.shape[-1]}")


def final_state(spec: CircuitSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_input(spec, x)
    state = embed(spec.embedding, x, spec.n_qubits)
    for op in circuit_ops(spec):
        if op[0] == "rot":
            _, gate, w, k = op
            state = apply_matrix(state, rotation_matrix(gate, spec.theta[k, w]), w)
        else:
            state = apply_entangler(state, op[1], op[2], op[3])
    return state


def run_circuit(spec: CircuitSpec, x) -> np.ndarray:
    """Per-wire <Z> after embedding ``x`` and applying the active layers.

    ``x`` may be a single feature vector or a batch with features on the last axis.
    """
    return expval_z(final_state(spec, x))


def circuit_gradients(spec: CircuitSpec, x, upstream) -> tuple[np.ndarray, np.ndarray]:
    """Adjoint-mode gradients of ``sum(upstream * run_circuit(spec, x))``.

    Returns ``(dtheta, dx)``: dtheta has the shape of ``spec.theta`` and is summed
    over any batch axes; dx has the shape of ``x``.
    """
    x = np.asarray(x, dtype=float)
    upstream = np.asarray(upstream, dtype=float)
    n = spec.n_qubits
    if upstream.shape != x.shape[:-1] + (n,):
        raise InvalidInputError(f"upstream must have shape {x.shape[:-1] + (n,)}, got {upstream.shape}")
    phi = final_state(spec, x)
    lam = (upstream @ z_signs(n)) * phi

    dtheta = np.zeros_like(spec.theta)
    for op in reversed(circuit_ops(spec)):
        if op[0] == "rot":
            _, gate, w, k = op
            theta = spec.theta[k, w]
            inv = rotation_matrix(gate, theta).conj().T
            phi = apply_matrix(phi, inv, w)
            d_phi = apply_matrix(phi, rotation_derivative(gate, theta), w)
            dtheta[k, w] = 2.0 * np.sum(lam.real * d_phi.real + lam.imag * d_phi.imag)
            lam = apply_matrix(lam, inv, w)
        else:
            _, gate, c, t = op
            phi = apply_entangler(phi, gate, c, t)
            lam = apply_entangler(lam, gate, c, t)

    # the embedded state is real, so only Re(lam) couples to input perturbations
    g = 2.0 * lam.real
    if spec.embedding is Embedding.ANGLE:
        dx = _angle_input_grad(x, g)
    else:
        m = x.shape[-1]
        norm = np.linalg.norm(x, axis=-1, keepdims=True)
        v = x / norm
        gm = g[..., :m]
        dx = (gm - v * np.sum(v * gm, axis=-1, keepdims=True)) / norm
    return dtheta, dx


def _angle_input_grad(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    lead, n = x.shape[:-1], x.shape[-1]
    cos, sin = np.cos(x), np.sin(x)
    dx = np.empty_like(x)
    for i in range(n):
        state = np.ones(lead + (1,))
        for j in range(n):
            if j == i:
                factor = np.stack([-sin[..., j], cos[..., j]], axis=-1)
            else:
                factor = np.stack([cos[..., j], sin[..., j]], axis=-1)
            state = (state[..., :, None] * factor[..., None, :]).reshape(lead + (-1,))
        dx[..., i] = np.sum(g * state, axis=-1)
    return dx
