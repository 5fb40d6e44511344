"""Elman RNN (many-to-one) in numpy: init, forward, BPTT, training, capture.

Shapes (batch of n samples, window T, hidden width b, horizon H)::

    W_in  (b, 1)    W_rec (b, b)    b_h (b,)
    W_out (H, b)    b_out (H,)

    a_0 = 0
    a_t = f(x_t W_in^T + a_{t-1} W_rec^T + b_h)      t = 1..T
    y   = (a_T * mask) W_out^T + b_out

Random streams: weights come from ``PCG64(seed)`` drawn in the order
W_in, W_rec, W_out (each row-major); shuffling and dropout masks come from
a second stream ``PCG64([seed, 1])``.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import (
    NumericalInstabilityError,
    ShapeMismatchError,
    TrainingDivergedError,
    UserInputError,
)
from .pipeline import SampleSet

PARAM_NAMES = ("W_in", "W_rec", "b_h", "W_out", "b_out")


@dataclass(frozen=True)
class RnnConfig:
    T: int = 20
    hidden: int = 64
    activation: Literal["relu", "tanh"] = "relu"
    H: int = 1
    learning_rate: float = 1e-4
    batch_size: int = 64
    epochs: int = 35
    dropout_final: float = 0.0
    seed: int = 0
    optimizer: Literal["adam", "sgd"] = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float | None = None
    recurrent_init: Literal["kaiming", "orthogonal"] = "orthogonal"

    def __post_init__(self):
        for name in ("T", "hidden", "H", "batch_size", "epochs"):
            if int(getattr(self, name)) < 1:
                raise UserInputError(f"{name} must be a positive integer")
        if self.activation not in ("relu", "tanh"):
            raise UserInputError(f"unknown activation {self.activation!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise UserInputError(f"unknown optimizer {self.optimizer!r}")
        if not self.learning_rate >= 0:
            # zero is accepted so that a frozen model can be trained as a control
            raise UserInputError("learning_rate must be >= 0")
        if not 0 <= self.dropout_final < 1:
            raise UserInputError("dropout_final must lie in [0, 1)")
        if self.recurrent_init not in ("kaiming", "orthogonal"):
            raise UserInputError(f"unknown recurrent_init {self.recurrent_init!r}")
        if self.grad_clip is not None and not self.grad_clip > 0:
            raise UserInputError("grad_clip must be > 0 when set")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RnnConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise UserInputError(f"unknown RNN config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass
class RnnModel:
    W_in: np.ndarray
    W_rec: np.ndarray
    b_h: np.ndarray
    W_out: np.ndarray
    b_out: np.ndarray
    config: RnnConfig

    def params(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in PARAM_NAMES}

    def copy(self) -> "RnnModel":
        return RnnModel(*(getattr(self, k).copy() for k in PARAM_NAMES), config=self.config)

    def to_json(self) -> str:
        doc = {
            "format": "rnndcor-elman-v1",
            "config": self.config.to_dict(),
            "seed": self.config.seed,
            "weights": {
                k: {"shape": list(v.shape), "data": v.ravel().tolist()}
                for k, v in self.params().items()
            },
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RnnModel":
        doc = json.loads(text)
        config = RnnConfig.from_dict(doc["config"])
        arrays = {
            k: np.array(w["data"], dtype=float).reshape(w["shape"])
            for k, w in doc["weights"].items()
        }
        model = cls(**arrays, config=config)
        _check_shapes(model)
        return model

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RnnModel":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _check_shapes(m: RnnModel) -> None:
    b, H = m.config.hidden, m.config.H
    want = {"W_in": (b, 1), "W_rec": (b, b), "b_h": (b,), "W_out": (H, b), "b_out": (H,)}
    for k, shape in want.items():
        if getattr(m, k).shape != shape:
            raise ShapeMismatchError(f"{k} has shape {getattr(m, k).shape}, expected {shape}")


def init_kaiming(config: RnnConfig) -> RnnModel:
    """He-normal weights (variance 2 / fan_in) and zero biases."""
    rng = np.random.Generator(np.random.PCG64(int(config.seed)))
    b, H = config.hidden, config.H
    W_in = rng.standard_normal((b, 1)) * np.sqrt(2.0 / 1)
    W_rec = rng.standard_normal((b, b)) * np.sqrt(2.0 / b)
    if config.recurrent_init == "orthogonal":
        # same draw, replaced by the Q factor of its QR decomposition (sign-fixed)
        q, r = np.linalg.qr(W_rec)
        W_rec = q * np.sign(np.diag(r))
    W_out = rng.standard_normal((H, b)) * np.sqrt(2.0 / b)
    return RnnModel(W_in, W_rec, np.zeros(b), W_out, np.zeros(H), config)


def _act(name: str, z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) if name == "relu" else np.tanh(z)


def _act_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    # ReLU subgradient at exactly 0 is taken as 0
    return (z > 0).astype(float) if name == "relu" else 1.0 - a * a


@dataclass
class ForwardCache:
    X: np.ndarray        # (n, T)
    z: np.ndarray        # (T, n, b) pre-activations
    a: np.ndarray        # (T, n, b) activations a_1..a_T
    mask: np.ndarray | None
    yhat: np.ndarray     # (n, H)


def forward_batch(model: RnnModel, X: np.ndarray, mask: np.ndarray | None = None) -> ForwardCache:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    n, T = X.shape
    if T != model.config.T:
        raise ShapeMismatchError(f"input window length {T} != model T {model.config.T}")
    if not np.all(np.isfinite(X)):
        raise NumericalInstabilityError("non-finite model input")
    b = model.config.hidden
    act = model.config.activation
    z = np.empty((T, n, b))
    a = np.empty((T, n, b))
    w_in = model.W_in[:, 0]
    W_rec_T = model.W_rec.T
    prev = np.zeros((n, b))
    # overflow is detected below and reported as NumericalInstabilityError
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(T):
            z[t] = np.outer(X[:, t], w_in) + prev @ W_rec_T + model.b_h
            prev = a[t] = _act(act, z[t])
        last = a[-1] if mask is None else a[-1] * mask
        yhat = last @ model.W_out.T + model.b_out
    if not np.all(np.isfinite(yhat)) or not np.all(np.isfinite(a)):
        raise NumericalInstabilityError("non-finite activation or prediction in forward pass")
    return ForwardCache(X, z, a, mask, yhat)


def forward(model: RnnModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Single-sample inference: returns (activations ``(T, b)``, prediction ``(H,)``)."""
    cache = forward_batch(model, np.asarray(x, dtype=float)[None, :])
    return cache.a[:, 0, :], cache.yhat[0]


def loss_mse(yhat: np.ndarray, y: np.ndarray) -> float:
    yhat, y = np.asarray(yhat, dtype=float), np.asarray(y, dtype=float)
    if yhat.shape != y.shape:
        raise ShapeMismatchError(f"prediction shape {yhat.shape} != target shape {y.shape}")
    return float(np.mean((yhat - y) ** 2))


def bptt_gradients(model: RnnModel, X: np.ndarray, Y: np.ndarray,
                   mask: np.ndarray | None = None,
                   cache: ForwardCache | None = None) -> dict[str, np.ndarray]:
    """Exact gradient of the batch MSE with respect to every parameter."""
    if cache is None:
        cache = forward_batch(model, X, mask)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape != cache.yhat.shape:
        raise ShapeMismatchError(f"target shape {Y.shape} != prediction shape {cache.yhat.shape}")
    n, H = Y.shape
    T = model.config.T
    act = model.config.activation

    d_yhat = 2.0 * (cache.yhat - Y) / (n * H)
    last = cache.a[-1] if mask is None else cache.a[-1] * mask
    g = {
        "W_out": d_yhat.T @ last,
        "b_out": d_yhat.sum(axis=0),
        "W_in": np.zeros_like(model.W_in),
        "W_rec": np.zeros_like(model.W_rec),
        "b_h": np.zeros_like(model.b_h),
    }
    da = d_yhat @ model.W_out
    if mask is not None:
        da = da * mask
    for t in range(T - 1, -1, -1):
        dz = da * _act_grad(act, cache.z[t], cache.a[t])
        g["W_in"][:, 0] += dz.T @ cache.X[:, t]
        if t > 0:
            g["W_rec"] += dz.T @ cache.a[t - 1]
        g["b_h"] += dz.sum(axis=0)
        da = dz @ model.W_rec
    for k, v in g.items():
        if not np.all(np.isfinite(v)):
            raise NumericalInstabilityError(f"non-finite gradient for {k}")
    return g


def dropout_final(a: np.ndarray, rate: float, rng: np.random.Generator | None = None,
                  mode: Literal["train", "infer"] = "train") -> np.ndarray:
    """Inverted dropout on the last hidden state; identity at inference."""
    if not 0 <= rate < 1:
        raise UserInputError("dropout rate must lie in [0, 1)")
    a = np.asarray(a, dtype=float)
    if mode == "infer" or rate == 0:
        return a.copy()
    return a * dropout_mask(a.shape, rate, rng)


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


class _Adam:
    def __init__(self, params: dict[str, np.ndarray], cfg: RnnConfig):
        self.b1, self.b2, self.eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, model: RnnModel, grads: dict[str, np.ndarray], lr: float) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for k in PARAM_NAMES:
            g = grads[k]
            m = self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            v = self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            getattr(model, k)[...] -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def _sgd_step(model: RnnModel, grads: dict[str, np.ndarray], lr: float) -> None:
    for k in PARAM_NAMES:
        getattr(model, k)[...] -= lr * grads[k]


def _clip(grads: dict[str, np.ndarray], max_norm: float) -> None:
    norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        for g in grads.values():
            g *= max_norm / norm


@dataclass
class TrainReport:
    losses: list[float]
    model: RnnModel
    initial_model: RnnModel
    seed: int
    wall_clock: float = field(default=0.0, compare=False)


def train(config: RnnConfig, samples: SampleSet, rng: np.random.Generator | None = None,
          model: RnnModel | None = None) -> TrainReport:
    """Mini-batch training with per-epoch reshuffling; the last partial batch is kept."""
    if samples.n < 1:
        raise UserInputError("training set is empty")
    if samples.T != config.T or samples.H != config.H:
        raise ShapeMismatchError(
            f"samples have T={samples.T}, H={samples.H}; config has T={config.T}, H={config.H}"
        )
    if model is None:
        model = init_kaiming(config)
    else:
        model = replace(model.copy(), config=config)
    initial = model.copy()
    if rng is None:
        rng = np.random.Generator(np.random.PCG64([int(config.seed), 1]))
    opt = _Adam(model.params(), config) if config.optimizer == "adam" else None

    t0 = time.perf_counter()
    losses: list[float] = []
    n, bs = samples.n, config.batch_size
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for bi, lo in enumerate(range(0, n, bs)):
            idx = order[lo:lo + bs]
            Xb, Yb = samples.X[idx], samples.Y[idx]
            mask = None
            if config.dropout_final > 0:
                mask = dropout_mask((idx.size, config.hidden), config.dropout_final, rng)
            try:
                cache = forward_batch(model, Xb, mask)
                batch_loss = loss_mse(cache.yhat, Yb)
                if not np.isfinite(batch_loss):
                    raise NumericalInstabilityError("non-finite loss")
                grads = bptt_gradients(model, Xb, Yb, mask, cache=cache)
            except NumericalInstabilityError as exc:
                raise TrainingDivergedError(
                    f"training diverged at epoch {epoch + 1}, batch {bi + 1}: {exc}"
                ) from exc
            if config.grad_clip is not None:
                _clip(grads, config.grad_clip)
            if opt is not None:
                opt.step(model, grads, config.learning_rate)
            else:
                _sgd_step(model, grads, config.learning_rate)
            total += batch_loss * idx.size
        losses.append(total / n)
    return TrainReport(losses, model, initial, config.seed, time.perf_counter() - t0)


@dataclass
class ActivationTensor:
    """Activation layer outputs for n samples: ``layers[t-1]`` is A_t with shape (n, b)."""
    layers: np.ndarray   # (T, n, b)
    epoch: int
    tag: str = "test"
    # absolute series index of each sample's forecast target, when known
    target_index: np.ndarray | None = None

    @property
    def T(self) -> int:
        return self.layers.shape[0]

    @property
    def n(self) -> int:
        return self.layers.shape[1]

    def layer(self, t: int) -> np.ndarray:
        """A_t for 1-based layer number t."""
        return self.layers[t - 1]


def capture_activations(model: RnnModel, samples: SampleSet, epoch: int | None = None,
                        tag: str = "test") -> ActivationTensor:
    if samples.T != model.config.T:
        raise ShapeMismatchError(f"samples have T={samples.T}, model has T={model.config.T}")
    cache = forward_batch(model, samples.X)
    return ActivationTensor(cache.a, model.config.epochs if epoch is None else epoch, tag,
                            samples.target_index.copy())


def predict(model: RnnModel, X: np.ndarray) -> np.ndarray:
    return forward_batch(model, X).yhat
