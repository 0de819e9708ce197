"""From-scratch ReLU multilayer perceptron used as a surrogate option pricer.

Training minimises mean squared error plus an L2 weight penalty with
full-batch Polak-Ribiere conjugate gradient. Inputs and targets are
z-scored with training-split statistics; the public forward pass and input
gradient work in raw units.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import FeatureVector, ShapeProfile
from .errors import ContractViolation, DivergenceError, InsufficientDataError
from .pricing import OPTION_FEATURES, OptionRecord, PricingModel, bsm_model, bsm_price

MIN_RECORDS = 50
OPTIMIZERS = ("nonlinear-conjugate-gradient", "gradient-descent")


@dataclass
class MlpSurrogate:
    """Affine-ReLU network with an identity output layer.

    ``weights[k]`` has shape ``(layer_sizes[k], layer_sizes[k + 1])``.
    """

    layer_sizes: list[int]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feature_names: tuple[str, ...] = OPTION_FEATURES
    x_mean: np.ndarray | None = None
    x_std: np.ndarray | None = None
    y_mean: float = 0.0
    y_std: float = 1.0
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.layer_sizes = [int(s) for s in self.layer_sizes]
        n_in = self.layer_sizes[0]
        if self.layer_sizes[-1] != 1:
            raise ContractViolation("output layer must have size 1")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise ContractViolation("need one weight matrix and bias vector per layer")
        self.weights = [np.asarray(W, dtype=float) for W in self.weights]
        self.biases = [np.asarray(b, dtype=float).reshape(-1) for b in self.biases]
        for k, (W, b) in enumerate(zip(self.weights, self.biases)):
            shape = (self.layer_sizes[k], self.layer_sizes[k + 1])
            if W.shape != shape or b.shape != (shape[1],):
                raise ContractViolation(f"layer {k}: expected weight {shape}, got {W.shape}")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ContractViolation(f"layer {k} has non-finite parameters")
        self.feature_names = tuple(self.feature_names)
        if len(self.feature_names) != n_in:
            raise ContractViolation(f"{len(self.feature_names)} feature names for input size {n_in}")
        self.x_mean = np.zeros(n_in) if self.x_mean is None else np.asarray(self.x_mean, dtype=float)
        self.x_std = np.ones(n_in) if self.x_std is None else np.asarray(self.x_std, dtype=float)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    def forward_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.n_inputs)
        h = (X - self.x_mean) / self.x_std
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ W + b, 0.0)
        out = h @ self.weights[-1] + self.biases[-1]
        return out[:, 0] * self.y_std + self.y_mean

    def input_gradient_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.n_inputs)
        h = (X - self.x_mean) / self.x_std
        masks = []
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            pre = h @ W + b
            # subgradient 0 at the kink
            masks.append(pre > 0.0)
            h = np.where(masks[-1], pre, 0.0)
        delta = np.broadcast_to(self.weights[-1][:, 0], (len(X), self.layer_sizes[-2])).copy()
        for W, mask in zip(reversed(self.weights[:-1]), reversed(masks)):
            delta = (delta * mask) @ W.T
        return delta * self.y_std / self.x_std

    def pricing_model(self, shape: ShapeProfile | None = None, name: str = "surrogate") -> PricingModel:
        return PricingModel(
            self.feature_names,
            lambda x: float(self.forward_batch(x)[0]),
            lambda x: self.input_gradient_batch(x)[0],
            shape, name, self.forward_batch, self.input_gradient_batch)

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "feature_names": list(self.feature_names),
            "weights": [W.ravel(order="C").tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "x_mean": self.x_mean.tolist(),
            "x_std": self.x_std.tolist(),
            "y_mean": float(self.y_mean),
            "y_std": float(self.y_std),
            **({"kind": self.info["kind"]} if "kind" in self.info else {}),
        }

    @classmethod
    def from_dict(cls, d) -> "MlpSurrogate":
        sizes = [int(s) for s in d["layer_sizes"]]
        weights = [np.asarray(w, dtype=float).reshape(sizes[k], sizes[k + 1]) for k, w in enumerate(d["weights"])]
        return cls(sizes, weights, [np.asarray(b, dtype=float) for b in d["biases"]],
                   tuple(d["feature_names"]), np.asarray(d["x_mean"]), np.asarray(d["x_std"]),
                   float(d["y_mean"]), float(d["y_std"]),
                   info={"kind": d["kind"]} if "kind" in d else {})

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "MlpSurrogate":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _check_input(model: MlpSurrogate, x) -> np.ndarray:
    if isinstance(x, FeatureVector):
        if x.names != model.feature_names:
            raise ContractViolation(f"surrogate expects {model.feature_names}, got {x.names}")
        x = x.values
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.size != model.n_inputs:
        raise ContractViolation(f"surrogate expects {model.n_inputs} inputs, got {arr.size}")
    return arr


def mlp_forward(model: MlpSurrogate, x) -> float:
    return float(model.forward_batch(_check_input(model, x))[0])


def mlp_input_gradient(model: MlpSurrogate, x) -> np.ndarray:
    """Backpropagated d(output)/d(input) in raw units; ReLU'(0) is taken as 0."""
    return model.input_gradient_batch(_check_input(model, x))[0]


# ---------------------------------------------------------------------------
# Training


@dataclass(frozen=True)
class TrainConfig:
    hidden: tuple[int, ...] = (32, 16)
    l2_lambda: float = 1e-3
    max_iters: int = 1000
    optimizer: str = "nonlinear-conjugate-gradient"
    split_fraction: float = 0.75
    seed: int = 0
    learning_rate: float = 1e-2  # gradient-descent only

    def __post_init__(self):
        if not 0.0 < self.split_fraction < 1.0:
            raise ContractViolation(f"split_fraction must lie in (0, 1), got {self.split_fraction}")
        if self.l2_lambda < 0:
            raise ContractViolation("l2_lambda must be non-negative")
        if self.optimizer not in OPTIMIZERS:
            raise ContractViolation(f"optimizer must be one of {OPTIMIZERS}")
        if self.max_iters < 0:
            raise ContractViolation("max_iters must be non-negative")


class _Objective:
    """MSE + lambda * sum of squared weights over a flat parameter vector."""

    def __init__(self, sizes: Sequence[int], X: np.ndarray, y: np.ndarray, lam: float):
        self.sizes = list(sizes)
        self.X, self.y, self.lam = X, y, lam
        self.slices = []
        offset = 0
        for a, b in zip(self.sizes[:-1], self.sizes[1:]):
            self.slices.append(((offset, offset + a * b, (a, b)), (offset + a * b, offset + a * b + b)))
            offset += a * b + b
        self.n_params = offset

    def unpack(self, theta):
        Ws, bs = [], []
        for (w0, w1, shape), (b0, b1) in self.slices:
            Ws.append(theta[w0:w1].reshape(shape))
            bs.append(theta[b0:b1])
        return Ws, bs

    def pack(self, Ws, bs) -> np.ndarray:
        return np.concatenate([np.concatenate([W.ravel(), b]) for W, b in zip(Ws, bs)])

    def value_and_grad(self, theta) -> tuple[float, np.ndarray]:
        Ws, bs = self.unpack(theta)
        acts = [self.X]
        pres = []
        h = self.X
        for W, b in zip(Ws[:-1], bs[:-1]):
            pre = h @ W + b
            pres.append(pre)
            h = np.maximum(pre, 0.0)
            acts.append(h)
        out = (h @ Ws[-1] + bs[-1])[:, 0]
        resid = out - self.y
        m = len(self.y)
        loss = float(resid @ resid / m + self.lam * sum(float(np.sum(W * W)) for W in Ws))
        grad_W = [None] * len(Ws)
        grad_b = [None] * len(Ws)
        delta = (2.0 / m) * resid[:, None]
        for k in range(len(Ws) - 1, -1, -1):
            grad_W[k] = acts[k].T @ delta + 2.0 * self.lam * Ws[k]
            grad_b[k] = delta.sum(axis=0)
            if k:
                delta = (delta @ Ws[k].T) * (pres[k - 1] > 0.0)
        return loss, self.pack(grad_W, grad_b)


def _init_params(sizes, rng) -> tuple[list, list]:
    Ws, bs = [], []
    for a, b in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / a)
        Ws.append(rng.uniform(-limit, limit, size=(a, b)))
        bs.append(np.zeros(b))
    return Ws, bs


def _armijo(obj, theta, f0, g0, d, step, c1=1e-4, shrink=0.5, max_backtracks=60):
    slope = float(g0 @ d)
    for _ in range(max_backtracks):
        trial = theta + step * d
        f1, g1 = obj.value_and_grad(trial)
        if math.isfinite(f1) and f1 <= f0 + c1 * step * slope:
            # greedy expansion while the Armijo condition keeps improving
            for _ in range(20):
                trial2 = theta + 2.0 * step * d
                f2, g2 = obj.value_and_grad(trial2)
                if not (math.isfinite(f2) and f2 <= f0 + c1 * 2.0 * step * slope and f2 < f1):
                    break
                step, trial, f1, g1 = 2.0 * step, trial2, f2, g2
            return step, trial, f1, g1
        step *= shrink
    return 0.0, theta, f0, g0


def minimize_cg(obj: _Objective, theta: np.ndarray, max_iters: int, tol: float = 1e-12):
    """Polak-Ribiere+ nonlinear CG with Armijo backtracking; restarts every n_params steps.

    Returns the final parameters and the loss history (one entry per accepted step).
    """
    f, g = obj.value_and_grad(theta)
    if not math.isfinite(f):
        raise DivergenceError("non-finite initial loss", 0)
    history = [f]
    d = -g
    step = 1.0 / max(1.0, float(np.linalg.norm(g)))
    since_restart = 0
    for it in range(1, max_iters + 1):
        if float(g @ d) >= 0.0:
            d = -g
            since_restart = 0
        step, theta_new, f_new, g_new = _armijo(obj, theta, f, g, d, step)
        if not math.isfinite(f_new):
            raise DivergenceError("non-finite training loss", it)
        if step == 0.0:
            if since_restart == 0:
                break
            d = -g
            since_restart = 0
            step = 1.0 / max(1.0, float(np.linalg.norm(g)))
            continue
        y = g_new - g
        beta = max(0.0, float(g_new @ y) / float(g @ g))
        since_restart += 1
        if since_restart >= obj.n_params:
            beta = 0.0
            since_restart = 0
        prev_slope = float(g @ d)
        theta, f, g = theta_new, f_new, g_new
        d = -g + beta * d
        new_slope = float(g @ d)
        if new_slope < 0.0:
            step = min(1e3, step * prev_slope / new_slope)
        history.append(f)
        if float(g @ g) < tol:
            break
    return theta, history


def minimize_gd(obj: _Objective, theta, max_iters: int, lr: float):
    f, g = obj.value_and_grad(theta)
    history = [f]
    for it in range(1, max_iters + 1):
        step, theta, f, g = _armijo(obj, theta, f, g, -g, lr)
        if not math.isfinite(f):
            raise DivergenceError("non-finite training loss", it)
        history.append(f)
    return theta, history


def _records_to_arrays(records: Sequence[OptionRecord]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([rec.features() for rec in records], dtype=float).reshape(-1, 5)
    y = np.array([rec.price for rec in records], dtype=float)
    return X, y


def train_surrogate(records: Sequence[OptionRecord], config: TrainConfig | None = None
                    ) -> tuple[MlpSurrogate, float, float]:
    """Fit the surrogate and return ``(model, train_rmse, test_rmse)``.

    RMSEs are in raw price units. The loss history and iteration count are
    left in ``model.info``.
    """
    config = config or TrainConfig()
    if len(records) < MIN_RECORDS:
        raise InsufficientDataError(f"need at least {MIN_RECORDS} records, got {len(records)}")
    X, y = _records_to_arrays(records)
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(len(y))
    n_train = int(round(config.split_fraction * len(y)))
    n_train = min(max(n_train, 1), len(y) - 1)
    tr, te = order[:n_train], order[n_train:]
    x_mean, x_std = X[tr].mean(axis=0), X[tr].std(axis=0)
    x_std = np.where(x_std > 0, x_std, 1.0)
    y_mean, y_std = float(y[tr].mean()), float(y[tr].std()) or 1.0
    sizes = [X.shape[1], *config.hidden, 1]
    obj = _Objective(sizes, (X[tr] - x_mean) / x_std, (y[tr] - y_mean) / y_std, config.l2_lambda)
    Ws, bs = _init_params(sizes, rng)
    theta0 = obj.pack(Ws, bs)
    if config.optimizer == "nonlinear-conjugate-gradient":
        theta, history = minimize_cg(obj, theta0, config.max_iters)
    else:
        theta, history = minimize_gd(obj, theta0, config.max_iters, config.learning_rate)
    Ws, bs = obj.unpack(theta)
    model = MlpSurrogate(sizes, [W.copy() for W in Ws], [b.copy() for b in bs], OPTION_FEATURES,
                         x_mean, x_std, y_mean, y_std,
                         info={"loss_history": history, "iterations": len(history) - 1,
                               "n_train": int(len(tr)), "n_test": int(len(te))})
    train_rmse = float(np.sqrt(np.mean((model.forward_batch(X[tr]) - y[tr]) ** 2)))
    test_rmse = float(np.sqrt(np.mean((model.forward_batch(X[te]) - y[te]) ** 2)))
    return model, train_rmse, test_rmse


DEFAULT_RANGES = {
    "S": (1000.0, 1500.0),
    "moneyness": (0.85, 1.15),
    "tau": (0.05, 1.0),
    "r": (0.01, 0.05),
    "sigma": (0.15, 0.6),
}


def synthetic_bsm_records(n: int, kind: str = "call", seed: int = 0,
                          ranges: dict | None = None) -> list[OptionRecord]:
    """Uniformly sampled inputs priced exactly by Black-Scholes-Merton (rates as decimals)."""
    rg = {**DEFAULT_RANGES, **(ranges or {})}
    rng = np.random.default_rng(seed)
    S = rng.uniform(*rg["S"], n)
    K = S * rng.uniform(*rg["moneyness"], n)
    tau = rng.uniform(*rg["tau"], n)
    r = rng.uniform(*rg["r"], n)
    sigma = rng.uniform(*rg["sigma"], n)
    return [OptionRecord(float(S[i]), float(r[i]), float(tau[i]), float(K[i]), float(sigma[i]),
                         bsm_price(S[i], K[i], r[i], tau[i], sigma[i], kind), kind) for i in range(n)]


def surrogate_shape(kind: str) -> ShapeProfile:
    """Shape declared for a surrogate trained on ``kind`` options (that of the analytic model)."""
    return bsm_model(kind).shape
