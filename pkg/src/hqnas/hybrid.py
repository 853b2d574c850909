"""Classical -> quantum -> classical network, trained with Adam on NLL loss."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .qsim import DEGENERATE_NORM, CircuitSpec, circuit_gradients, run_circuit
from .search_space import MAX_LAYERS, Embedding, Genome

PARAM_NAMES = ("pre_w", "pre_b", "theta", "post_w", "post_b")


class ConfigurationError(ValueError):
    pass


@dataclass
class TrainConfig:
    epochs: int = 5
    batch_size: int = 64
    learning_rate: float = 0.003
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be > 0")


@dataclass
class HybridModel:
    genome: Genome
    d: int
    n_classes: int
    params: dict

    @property
    def circuit(self) -> CircuitSpec:
        return CircuitSpec.from_genome(self.genome, self.params["theta"])

    @property
    def param_count(self) -> int:
        return sum(p.size for p in self.params.values())


def param_count(n_qubits: int, d: int, n_classes: int) -> int:
    return (d * n_qubits + n_qubits) + MAX_LAYERS * n_qubits + (n_qubits * n_classes + n_classes)


def build_model(g: Genome, d: int, n_classes: int, rng: np.random.Generator) -> HybridModel:
    """Uniform(+-1/sqrt(fan_in)) linear layers; rotation angles uniform in [0, 2pi)."""
    if d < 1:
        raise ConfigurationError("feature dimension must be >= 1")
    if n_classes < 2:
        raise ConfigurationError("need at least two classes")
    n = g.n_qubits
    pre_bound, post_bound = 1 / np.sqrt(d), 1 / np.sqrt(n)
    params = {
        "pre_w": rng.uniform(-pre_bound, pre_bound, (d, n)),
        "pre_b": rng.uniform(-pre_bound, pre_bound, n),
        "theta": rng.uniform(0, 2 * np.pi, (MAX_LAYERS, n)),
        "post_w": rng.uniform(-post_bound, post_bound, (n, n_classes)),
        "post_b": rng.uniform(-post_bound, post_bound, n_classes),
    }
    return HybridModel(g, d, n_classes, params)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def degenerate_mask(model: HybridModel, u: np.ndarray) -> np.ndarray:
    """True where the pre-layer output cannot be amplitude-embedded."""
    if model.genome.embedding is not Embedding.AMPLITUDE:
        return np.zeros(u.shape[:-1], dtype=bool)
    return np.linalg.norm(u, axis=-1) <= DEGENERATE_NORM


def forward(model: HybridModel, x) -> np.ndarray:
    """Log-probabilities for a feature vector or a batch of them."""
    p = model.params
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != model.d:
        raise ConfigurationError(f"model expects {model.d} features, got {x.shape[-1]}")
    u = x @ p["pre_w"] + p["pre_b"]
    z = run_circuit(model.circuit, u)
    return log_softmax(z @ p["post_w"] + p["post_b"])


def nll_loss(model: HybridModel, x, y) -> float:
    logp = forward(model, x)
    return float(-np.mean(logp[np.arange(len(y)), y]))


def loss_and_grads(model: HybridModel, x: np.ndarray, y: np.ndarray):
    """Mean NLL over the batch and its gradient for every parameter.

    Samples whose pre-layer output is degenerate under amplitude embedding are
    dropped from the batch. Returns ``(loss, grads, n_skipped)``; when every sample
    is dropped the loss is ``nan`` and ``grads`` is ``None``.
    """
    p = model.params
    u = x @ p["pre_w"] + p["pre_b"]
    bad = degenerate_mask(model, u)
    if bad.any():
        x, y, u = x[~bad], y[~bad], u[~bad]
    n_skipped = int(bad.sum())
    if len(y) == 0:
        return float("nan"), None, n_skipped

    spec = model.circuit
    z = run_circuit(spec, u)
    logp = log_softmax(z @ p["post_w"] + p["post_b"])
    rows = np.arange(len(y))
    loss = float(-np.mean(logp[rows, y]))

    dlogits = np.exp(logp)
    dlogits[rows, y] -= 1.0
    dlogits /= len(y)
    dz = dlogits @ p["post_w"].T
    dtheta, du = circuit_gradients(spec, u, dz)
    grads = {
        "pre_w": x.T @ du,
        "pre_b": du.sum(axis=0),
        "theta": dtheta,
        "post_w": z.T @ dlogits,
        "post_b": dlogits.sum(axis=0),
    }
    return loss, grads, n_skipped


class Adam:
    def __init__(self, params: dict, lr=0.003, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict):
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for k in params:
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            params[k] -= self.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + self.eps)


def accuracy(model: HybridModel, x: np.ndarray, y: np.ndarray, chunk: int = 2048) -> float:
    """Fraction classified correctly; degenerate samples count as misclassified."""
    p = model.params
    correct = 0
    for start in range(0, len(y), chunk):
        xb, yb = x[start:start + chunk], y[start:start + chunk]
        u = xb @ p["pre_w"] + p["pre_b"]
        ok = ~degenerate_mask(model, u)
        if ok.any():
            z = run_circuit(model.circuit, u[ok])
            pred = np.argmax(z @ p["post_w"] + p["post_b"], axis=-1)
            correct += int(np.sum(pred == yb[ok]))
    return correct / len(y)


class TrainResult(NamedTuple):
    best_val_acc: float
    param_count: int
    val_history: tuple
    losses: tuple
    skipped_samples: int


def train_and_evaluate(g: Genome, data, cfg: TrainConfig) -> TrainResult:
    """Train a freshly built model for ``cfg.epochs`` and report its best validation accuracy.

    Ties between epochs go to the earliest one. Everything random (initial weights,
    minibatch order) flows from ``cfg.seed``.
    """
    if len(data.train_y) == 0 or len(data.val_y) == 0:
        raise ConfigurationError("train and validation partitions must be nonempty")
    if data.val_x.shape[1] != data.train_x.shape[1]:
        raise ConfigurationError("train and validation feature counts differ")
    rng = np.random.default_rng(cfg.seed)
    model = build_model(g, data.d, data.n_classes, rng)
    opt = Adam(model.params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)

    history, losses, skipped = [], [], 0
    n_train = len(data.train_y)
    for _ in range(cfg.epochs):
        order = rng.permutation(n_train)
        for start in range(0, n_train, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads, n_skip = loss_and_grads(model, data.train_x[idx], data.train_y[idx])
            skipped += n_skip
            if grads is None:
                continue
            losses.append(loss)
            opt.step(model.params, grads)
        history.append(accuracy(model, data.val_x, data.val_y))
    return TrainResult(max(history), model.param_count, tuple(history), tuple(losses), skipped)
