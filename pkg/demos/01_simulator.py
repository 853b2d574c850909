"""
A tour of the state-vector simulator
====================================

Embed a feature vector, run one candidate circuit, read Pauli-Z expectations,
and check the adjoint gradient against the parameter-shift rule.
"""
import numpy as np

from hqnas import qsim
from hqnas.search_space import Genome

# %% two embeddings of the same input
x = np.array([0.3, -1.2, 0.7])
print("angle     ", np.round(qsim.angle_embed(x).real, 3))
print("amplitude ", np.round(qsim.amplitude_embed(x, 3).real, 3))  # zero-padded to 8 amplitudes

# %% one circuit from the search space
g = Genome(3, "ANGLE", ("RY", "RX", "RZ", "RY"), "CNOT", "CIRCULAR", 2)
rng = np.random.default_rng(0)
spec = qsim.CircuitSpec.from_genome(g, rng.uniform(0, 2 * np.pi, (4, 3)))
z = qsim.run_circuit(spec, x)
print("<Z> per wire", np.round(z, 4))

# %% gradient of a weighted readout, two ways
upstream = np.array([1.0, -0.5, 2.0])
dtheta, dx = qsim.circuit_gradients(spec, x, upstream)

shift = np.zeros_like(dtheta)
for k in range(g.n_layers):
    for w in range(g.n_qubits):
        vals = []
        for s in (np.pi / 2, -np.pi / 2):
            theta = spec.theta.copy()
            theta[k, w] += s
            moved = qsim.CircuitSpec.from_genome(g, theta)
            vals.append(upstream @ qsim.run_circuit(moved, x))
        shift[k, w] = (vals[0] - vals[1]) / 2

print("adjoint vs shift, max diff:", np.abs(dtheta - shift).max())
print("d/dx:", np.round(dx, 4))
