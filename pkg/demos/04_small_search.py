"""
A short real search on Iris
===========================

Trains every candidate with Adam and writes the same files as ``hqnas run``.
Kept small (P=8, G=3) so it finishes in well under a minute.
"""
import json
import tempfile
from pathlib import Path

from hqnas import cli

out = Path(tempfile.mkdtemp(prefix="hqnas-demo-"))
cli.main(["run", "--dataset", "iris", "--pop-size", "8", "--generations", "3",
          "--seed", "1", "--out", str(out), "-q"])
print("outputs in", out)

# %%
pareto = json.loads((out / "pareto.json").read_text())
for m in sorted(pareto["front"], key=lambda m: m["f_quantum"]):
    print(f"f_q={m['f_quantum']:7d}  acc={m['best_val_acc']:.3f}  params={m['params']:4d}  "
          f"{m['n_qubits']}q {m['embedding']} L={m['n_layers']}")

c = pareto["compromise"]
print("compromise:", c["n_qubits"], "qubits,", c["n_layers"], "layers, acc", c["best_val_acc"])
