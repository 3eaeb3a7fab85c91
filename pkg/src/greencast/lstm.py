"""LSTM regressor trained from scratch by backpropagation through time.

Gates follow the standard formulation: input, forget and output gates are
sigmoids of affine maps of (x_t, m_{t-1}); the candidate is a tanh; the
cell accumulates c_t = c_{t-1}*f_t + s_t*i_t and the hidden state is
m_t = o_t * tanh(c_t). A linear head v.m_T + c maps the final hidden state
to the one-step-ahead scalar prediction. Training is plain gradient
descent with global-norm gradient clipping, all in float64.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    InsufficientDataError,
    NumericInputError,
    TrainingDivergedError,
)

GATES = ("i", "f", "o", "s")  # input, forget, output, candidate


def _sigmoid(z):
    # saturated exp overflows harmlessly to inf -> sigmoid 0
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


@dataclass
class LstmParams:
    input_dim: int
    hidden_dim: int
    w: dict[str, np.ndarray]  # gate -> h x d input weights
    u: dict[str, np.ndarray]  # gate -> h x h recurrent weights
    b: dict[str, np.ndarray]  # gate -> h biases
    v: np.ndarray  # h, regression head weights
    c_out: np.ndarray  # scalar (0-d array), regression head bias

    def tensors(self):
        """Named parameter tensors in a fixed, stable order."""
        for g in GATES:
            yield f"w_{g}", self.w[g]
            yield f"u_{g}", self.u[g]
            yield f"b_{g}", self.b[g]
        yield "v", self.v
        yield "c_out", self.c_out

    def copy(self) -> "LstmParams":
        return copy.deepcopy(self)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            **{name: t.tolist() for name, t in self.tensors()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LstmParams":
        dim, h = d["input_dim"], d["hidden_dim"]
        return cls(
            dim,
            h,
            {g: np.asarray(d[f"w_{g}"], dtype=float) for g in GATES},
            {g: np.asarray(d[f"u_{g}"], dtype=float) for g in GATES},
            {g: np.asarray(d[f"b_{g}"], dtype=float) for g in GATES},
            np.asarray(d["v"], dtype=float),
            np.asarray(d["c_out"], dtype=float),
        )

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path) -> "LstmParams":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class LstmState:
    hidden: np.ndarray  # m_t
    cell: np.ndarray  # c_t


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 200
    gradient_clip: float = 1.0
    seed: int = 0
    shuffle_each_epoch: bool = True
    batch_size: int | None = None  # None = full batch

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def init_params(input_dim: int, hidden_dim: int, seed: int) -> LstmParams:
    """Uniform +/- 1/sqrt(h) weights, zero biases, forget-gate bias 1."""
    if input_dim < 1 or hidden_dim < 1:
        raise DimensionError("input_dim and hidden_dim must be >= 1")
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(hidden_dim)
    w, u, b = {}, {}, {}
    for g in GATES:
        w[g] = rng.uniform(-bound, bound, (hidden_dim, input_dim))
        u[g] = rng.uniform(-bound, bound, (hidden_dim, hidden_dim))
        b[g] = np.zeros(hidden_dim)
    b["f"][:] = 1.0  # keeps the forget pathway open early in training
    v = rng.uniform(-bound, bound, hidden_dim)
    return LstmParams(input_dim, hidden_dim, w, u, b, v, np.zeros(()))


def cell_step(params: LstmParams, x_t: np.ndarray, prev: LstmState) -> LstmState:
    """One recurrence step for a single input vector."""
    x_t = np.asarray(x_t, dtype=float)
    if x_t.shape != (params.input_dim,):
        raise DimensionError(f"expected input of shape ({params.input_dim},)")
    if not np.all(np.isfinite(x_t)):
        raise NumericInputError("non-finite input vector")
    i = _sigmoid(params.w["i"] @ x_t + params.u["i"] @ prev.hidden + params.b["i"])
    f = _sigmoid(params.w["f"] @ x_t + params.u["f"] @ prev.hidden + params.b["f"])
    o = _sigmoid(params.w["o"] @ x_t + params.u["o"] @ prev.hidden + params.b["o"])
    s = np.tanh(params.w["s"] @ x_t + params.u["s"] @ prev.hidden + params.b["s"])
    c = prev.cell * f + s * i
    return LstmState(o * np.tanh(c), c)


def zero_state(params: LstmParams) -> LstmState:
    return LstmState(np.zeros(params.hidden_dim), np.zeros(params.hidden_dim))


def _forward_batch(params: LstmParams, X: np.ndarray):
    """Run the recurrence over a batch of windows; returns predictions + cache.

    X has shape (batch, window, input_dim); all per-step activations are
    cached for backprop.
    """
    B, T, d = X.shape
    h = params.hidden_dim
    m = np.zeros((B, h))
    c = np.zeros((B, h))
    cache = {"x": [], "i": [], "f": [], "o": [], "s": [], "c": [], "tc": [], "m_prev": []}
    for t in range(T):
        x_t = X[:, t, :]
        net = {
            g: x_t @ params.w[g].T + m @ params.u[g].T + params.b[g] for g in GATES
        }
        i, f, o = _sigmoid(net["i"]), _sigmoid(net["f"]), _sigmoid(net["o"])
        s = np.tanh(net["s"])
        cache["m_prev"].append(m)
        c = c * f + s * i
        tc = np.tanh(c)
        m = o * tc
        for k, val in (("x", x_t), ("i", i), ("f", f), ("o", o), ("s", s), ("c", c), ("tc", tc)):
            cache[k].append(val)
    preds = m @ params.v + params.c_out
    cache["m_last"] = m
    return preds, cache


def forward(params: LstmParams, window: np.ndarray):
    """Single-window forward pass: (prediction, cached activations)."""
    window = np.asarray(window, dtype=float)
    if window.ndim != 2 or window.shape[0] == 0:
        raise InsufficientDataError("window must be non-empty (window x input_dim)")
    if window.shape[1] != params.input_dim:
        raise DimensionError(f"expected {params.input_dim} features")
    preds, cache = _forward_batch(params, window[None])
    return float(preds[0]), cache


def predict_one_step(params: LstmParams, window: np.ndarray) -> float:
    return forward(params, window)[0]


def predict_batch(params: LstmParams, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 3 or X.shape[2] != params.input_dim:
        raise DimensionError("expected (batch, window, input_dim) inputs")
    return _forward_batch(params, X)[0]


@dataclass
class Gradients:
    w: dict[str, np.ndarray]
    u: dict[str, np.ndarray]
    b: dict[str, np.ndarray]
    v: np.ndarray
    c_out: np.ndarray

    def tensors(self):
        for g in GATES:
            yield f"w_{g}", self.w[g]
            yield f"u_{g}", self.u[g]
            yield f"b_{g}", self.b[g]
        yield "v", self.v
        yield "c_out", self.c_out

    def global_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(t * t) for _, t in self.tensors())))

    def scale(self, factor: float):
        for _, t in self.tensors():
            t *= factor


def bptt_gradients(
    params: LstmParams, X: np.ndarray, y: np.ndarray
) -> tuple[Gradients, float]:
    """Exact gradients of batch-mean squared error; returns (grads, loss)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise InsufficientDataError("empty batch")
    B, T, _ = X.shape
    with np.errstate(over="ignore", invalid="ignore"):
        return _bptt_gradients_unchecked(params, X, y, B, T)


def _bptt_gradients_unchecked(params, X, y, B, T):
    preds, cache = _forward_batch(params, X)
    resid = preds - y
    loss = float(np.mean(resid**2))

    grads = Gradients(
        {g: np.zeros_like(params.w[g]) for g in GATES},
        {g: np.zeros_like(params.u[g]) for g in GATES},
        {g: np.zeros_like(params.b[g]) for g in GATES},
        np.zeros_like(params.v),
        np.zeros(()),
    )
    dpred = 2.0 * resid / B  # d loss / d prediction
    grads.v[:] = cache["m_last"].T @ dpred
    grads.c_out[...] = dpred.sum()

    dm = dpred[:, None] * params.v[None, :]
    dc = np.zeros_like(dm)
    for t in range(T - 1, -1, -1):
        i, f, o, s = (cache[k][t] for k in ("i", "f", "o", "s"))
        tc = cache["tc"][t]
        c_prev = cache["c"][t - 1] if t > 0 else np.zeros_like(dc)
        m_prev = cache["m_prev"][t]
        x_t = cache["x"][t]

        do = dm * tc
        dc = dc + dm * o * (1.0 - tc * tc)
        di = dc * s
        ds = dc * i
        df = dc * c_prev

        da = {
            "i": di * i * (1.0 - i),
            "f": df * f * (1.0 - f),
            "o": do * o * (1.0 - o),
            "s": ds * (1.0 - s * s),
        }
        dm = np.zeros_like(dm)
        for g in GATES:
            grads.w[g] += da[g].T @ x_t
            grads.u[g] += da[g].T @ m_prev
            grads.b[g] += da[g].sum(axis=0)
            dm += da[g] @ params.u[g]
        dc = dc * f
    return grads, loss


def train(
    params: LstmParams,
    train_X: np.ndarray,
    train_y: np.ndarray,
    val_X: np.ndarray | None,
    val_y: np.ndarray | None,
    config: TrainConfig,
) -> tuple[LstmParams, list[float]]:
    """Gradient descent with clipping; returns the lowest-validation-MSE epoch.

    Loss history (per-epoch train MSE) always has length config.epochs.
    """
    train_X = np.asarray(train_X, dtype=float)
    train_y = np.asarray(train_y, dtype=float)
    if len(train_y) == 0:
        raise InsufficientDataError("empty training set")
    have_val = val_X is not None and val_y is not None and len(val_y) > 0
    params = params.copy()
    rng = np.random.default_rng(config.seed)
    n = len(train_y)
    batch = config.batch_size or n

    best = params.copy()
    best_val = np.inf
    history: list[float] = []
    for epoch in range(config.epochs):
        order = np.arange(n)
        if config.shuffle_each_epoch and batch < n:
            rng.shuffle(order)
        epoch_losses = []
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            grads, loss = bptt_gradients(params, train_X[idx], train_y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            norm = grads.global_norm()
            if norm > config.gradient_clip:
                grads.scale(config.gradient_clip / norm)
            for (_, p), (_, g) in zip(params.tensors(), grads.tensors()):
                p -= config.learning_rate * g
            epoch_losses.append(loss)
        history.append(float(np.mean(epoch_losses)))

        if have_val:
            # divergence surfaces as a non-finite score below, not a warning
            with np.errstate(over="ignore", invalid="ignore"):
                score = float(np.mean((predict_batch(params, val_X) - val_y) ** 2))
        else:
            score = history[-1]
        if not np.isfinite(score):
            raise TrainingDivergedError(epoch)
        if score < best_val:
            best_val = score
            best = params.copy()
    return best, history
