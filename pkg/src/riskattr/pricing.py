"""Analytic pricing models: zero-coupon bond, Black-Scholes-Merton, model-free VIX.

Every model is exposed through :class:`PricingModel`, which pairs an
evaluation function with an optional gradient and a declared
:class:`~riskattr.core.ShapeProfile` used by the auditors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from .core import Curvature, FeatureVector, ShapeProfile
from .errors import ContractViolation, InsufficientChainError, ModelEvaluationError

OPTION_FEATURES = ("S", "r", "tau", "K", "sigma")
BOND_FEATURES = ("r", "c")
LIMIT_EPS = 1e-12
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class PricingModel:
    """A real-valued model of named features.

    Parameters
    ----------
    names : sequence of str
        Feature identifiers, in evaluation order.
    evaluate : callable
        Maps a float array of shape ``(n,)`` to a float.
    gradient : callable, optional
        Maps a float array of shape ``(n,)`` to an array of partial derivatives.
    shape : ShapeProfile
        Declared monotone directions and curvature flags.
    name : str
        Label carried into reports.
    evaluate_batch, gradient_batch : callable, optional
        Row-wise versions over an ``(m, n)`` array; used by the attribution
        methods when present.
    """

    def __init__(
        self,
        names: Sequence[str],
        evaluate: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray] | None = None,
        shape: ShapeProfile | None = None,
        name: str = "model",
        evaluate_batch: Callable[[np.ndarray], np.ndarray] | None = None,
        gradient_batch: Callable[[np.ndarray], np.ndarray] | None = None,
    ):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ContractViolation(f"duplicate feature names {self.names}")
        self._evaluate = evaluate
        self._gradient = gradient
        self.shape = shape if shape is not None else ShapeProfile()
        self.name = name
        self._evaluate_batch = evaluate_batch
        self._gradient_batch = gradient_batch if gradient is not None else None

    @property
    def n_features(self) -> int:
        return len(self.names)

    @property
    def has_gradient(self) -> bool:
        return self._gradient is not None

    def _coerce(self, x) -> np.ndarray:
        if isinstance(x, FeatureVector):
            if x.names != self.names:
                raise ContractViolation(f"{self.name} expects features {self.names}, got {x.names}")
            return np.array(x.values)
        arr = np.asarray(x, dtype=float).reshape(-1)
        if arr.size != self.n_features:
            raise ContractViolation(f"{self.name} expects {self.n_features} features, got {arr.size}")
        return arr

    def evaluate(self, x) -> float:
        arr = self._coerce(x)
        try:
            value = float(self._evaluate(arr))
        except (ContractViolation, ModelEvaluationError):
            raise
        except Exception as exc:
            raise ModelEvaluationError(f"{self.name} failed: {exc}", arr.tolist()) from exc
        if not math.isfinite(value):
            raise ModelEvaluationError(f"{self.name} returned {value}", arr.tolist())
        return value

    __call__ = evaluate

    def gradient(self, x) -> np.ndarray:
        if self._gradient is None:
            raise NotImplementedError(f"{self.name} has no gradient")
        g = np.asarray(self._gradient(self._coerce(x)), dtype=float).reshape(-1)
        if g.size != self.n_features:
            raise ContractViolation(f"{self.name} gradient has {g.size} entries")
        return g

    def evaluate_many(self, points) -> np.ndarray:
        """Evaluate each row of ``points``."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.n_features)
        if self._evaluate_batch is None:
            return np.array([self.evaluate(row) for row in pts])
        out = np.asarray(self._evaluate_batch(pts), dtype=float).reshape(-1)
        bad = np.flatnonzero(~np.isfinite(out))
        if bad.size:
            raise ModelEvaluationError(f"{self.name} returned {out[bad[0]]}", pts[bad[0]].tolist())
        return out

    def gradient_many(self, points) -> np.ndarray:
        """Gradient at each row of ``points``, shape ``(m, n)``."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.n_features)
        if self._gradient_batch is None:
            return np.array([self.gradient(row) for row in pts]).reshape(len(pts), self.n_features)
        return np.asarray(self._gradient_batch(pts), dtype=float).reshape(len(pts), self.n_features)

    def vector(self, values) -> FeatureVector:
        return FeatureVector(values, self.names)

    def fix(self, **fixed: float) -> "PricingModel":
        """Restrict to the remaining features, holding ``fixed`` ones constant."""
        for k in fixed:
            if k not in self.names:
                raise ContractViolation(f"unknown feature {k!r}")
        keep = [i for i, n in enumerate(self.names) if n not in fixed]
        full = np.zeros(self.n_features)
        for k, v in fixed.items():
            full[self.names.index(k)] = v

        def lift(z):
            x = full.copy()
            x[keep] = z
            return x

        def lift_many(Z):
            X = np.tile(full, (len(Z), 1))
            X[:, keep] = Z
            return X

        grad = None
        if self._gradient is not None:
            grad = lambda z: self.gradient(lift(z))[keep]
        shape = self.shape
        for i in sorted((self.names.index(k) for k in fixed), reverse=True):
            shape = shape.drop(i)
        return PricingModel([self.names[i] for i in keep], lambda z: self.evaluate(lift(z)), grad, shape,
                            f"{self.name}|" + ",".join(f"{k}={v:g}" for k, v in fixed.items()),
                            lambda Z: self.evaluate_many(lift_many(Z)),
                            lambda Z: self.gradient_many(lift_many(Z))[:, keep])

    def with_dummy(self, name: str = "dummy") -> "PricingModel":
        """Append a feature the model ignores."""
        n = self.n_features
        grad = None
        if self._gradient is not None:
            grad = lambda x: np.append(self.gradient(x[:n]), 0.0)
        return PricingModel(self.names + (name,), lambda x: self.evaluate(x[:n]), grad, self.shape,
                            f"{self.name}+{name}",
                            lambda X: self.evaluate_many(X[:, :n]),
                            lambda X: np.column_stack([self.gradient_many(X[:, :n]), np.zeros(len(X))]))

    def __repr__(self) -> str:
        return f"PricingModel({self.name!r}, features={self.names})"


def linear_combination(models: Sequence[PricingModel], coeffs: Sequence[float], name: str = "combo") -> PricingModel:
    """sum_k coeffs[k] * models[k]; all models must share feature names. Shape is left undeclared."""
    names = models[0].names
    if any(m.names != names for m in models):
        raise ContractViolation("models in a combination must share feature names")
    coeffs = [float(c) for c in coeffs]
    grad = None
    if all(m.has_gradient for m in models):
        grad = lambda x: sum(c * m.gradient(x) for c, m in zip(coeffs, models))
    return PricingModel(names, lambda x: sum(c * m.evaluate(x) for c, m in zip(coeffs, models)), grad,
                        name=name)


def finite_difference_gradient(f: Callable[[np.ndarray], float], x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences with step ``rel_step * max(1, |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        up = x.copy()
        dn = x.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (f(up) - f(dn)) / (2.0 * h)
    return g


def with_finite_difference_gradient(model: PricingModel, rel_step: float = 1e-6) -> PricingModel:
    """Same model, gradient replaced by central differences of ``evaluate``."""
    return PricingModel(model.names, model.evaluate,
                        lambda x: finite_difference_gradient(model.evaluate, x, rel_step),
                        model.shape, f"{model.name}[fd]")


# ---------------------------------------------------------------------------
# Zero-coupon bond


@dataclass(frozen=True)
class BondSpec:
    c: float
    T: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and math.isfinite(self.T)) or self.c < 0 or self.T <= 0:
            raise ContractViolation(f"bond needs c >= 0 and T > 0, got c={self.c}, T={self.T}")


def bond_price(r: float, c: float, T: float) -> float:
    """Present value c * exp(-r T) of a zero-coupon bond under continuous compounding."""
    if not all(math.isfinite(v) for v in (r, c, T)):
        raise ContractViolation(f"non-finite bond input r={r}, c={c}, T={T}")
    if T <= 0 or c < 0:
        raise ContractViolation(f"bond needs c >= 0 and T > 0, got c={c}, T={T}")
    return c * math.exp(-r * T)


def bond_model(T: float = 10.0) -> PricingModel:
    """Two-feature model over (r, c) with maturity ``T`` held fixed."""
    BondSpec(0.0, T)

    def value(x):
        return bond_price(x[0], x[1], T)

    def grad(x):
        disc = math.exp(-x[0] * T)
        return np.array([-T * x[1] * disc, disc])

    def value_batch(X):
        return X[:, 1] * np.exp(-X[:, 0] * T)

    def grad_batch(X):
        disc = np.exp(-X[:, 0] * T)
        return np.column_stack([-T * X[:, 1] * disc, disc])

    shape = ShapeProfile(monotone_increasing={1}, monotone_decreasing={0}, curvature={0: Curvature.RDME})
    return PricingModel(BOND_FEATURES, value, grad, shape, f"bond(T={T:g})", value_batch, grad_batch)


def bond_model_3() -> PricingModel:
    """Three-feature variant over (r, c, T)."""

    def value(x):
        return bond_price(x[0], x[1], x[2])

    def grad(x):
        disc = math.exp(-x[0] * x[2])
        return np.array([-x[2] * x[1] * disc, disc, -x[0] * x[1] * disc])

    shape = ShapeProfile(monotone_increasing={1}, monotone_decreasing={0}, curvature={0: Curvature.RDME})
    return PricingModel(("r", "c", "T"), value, grad, shape, "bond")


# ---------------------------------------------------------------------------
# Normal distribution and Black-Scholes-Merton


def norm_cdf(x):
    """Standard normal CDF (scalar or array)."""
    out = ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / _SQRT_2PI
    return float(out) if out.ndim == 0 else out


def _kind(kind: str) -> str:
    k = str(kind).lower()
    if k not in ("call", "put"):
        raise ContractViolation(f"option kind must be 'call' or 'put', got {kind!r}")
    return k


def _check_bsm(S, K, r, tau, sigma):
    for name, v in (("S", S), ("K", K), ("r", r), ("tau", tau), ("sigma", sigma)):
        if not math.isfinite(v):
            raise ContractViolation(f"non-finite {name}={v}")
    if S <= 0 or K <= 0:
        raise ContractViolation(f"need S > 0 and K > 0, got S={S}, K={K}")
    if tau < 0 or sigma < 0:
        raise ContractViolation(f"need tau > 0 and sigma > 0, got tau={tau}, sigma={sigma}")


def _d1_d2(S, K, r, tau, sigma):
    vol = sigma * math.sqrt(tau)
    d1 = (math.log(S / K) + (r + 0.5 * sigma * sigma) * tau) / vol
    return d1, d1 - vol


def bsm_price(S: float, K: float, r: float, tau: float, sigma: float, kind: str = "call") -> float:
    """European option price under Black-Scholes-Merton (no dividends).

    Below ``tau`` or ``sigma`` of 1e-12 the price is the discounted intrinsic
    value, which is the limit of the formula.
    """
    kind = _kind(kind)
    _check_bsm(S, K, r, tau, sigma)
    disc_K = K * math.exp(-r * tau)
    if tau < LIMIT_EPS or sigma < LIMIT_EPS:
        return max(S - disc_K, 0.0) if kind == "call" else max(disc_K - S, 0.0)
    d1, d2 = _d1_d2(S, K, r, tau, sigma)
    if kind == "call":
        return S * norm_cdf(d1) - disc_K * norm_cdf(d2)
    return disc_K * norm_cdf(-d2) - S * norm_cdf(-d1)


@dataclass(frozen=True)
class Greeks:
    delta: float
    vega: float
    rho: float
    gamma: float
    vomma: float
    theta_tau: float = 0.0  # dV/dtau (time to expiry, not calendar time)
    dK: float = 0.0


def bsm_greeks(S: float, K: float, r: float, tau: float, sigma: float, kind: str = "call") -> Greeks:
    kind = _kind(kind)
    _check_bsm(S, K, r, tau, sigma)
    disc = math.exp(-r * tau)
    if tau < LIMIT_EPS or sigma < LIMIT_EPS:
        itm = (S > K * disc) if kind == "call" else (S < K * disc)
        sgn = 1.0 if kind == "call" else -1.0
        if not itm:
            return Greeks(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        return Greeks(sgn, 0.0, sgn * K * tau * disc, 0.0, 0.0, sgn * r * K * disc, -sgn * disc)
    sqrt_tau = math.sqrt(tau)
    d1, d2 = _d1_d2(S, K, r, tau, sigma)
    pdf1 = norm_pdf(d1)
    vega = S * pdf1 * sqrt_tau
    gamma = pdf1 / (S * sigma * sqrt_tau)
    vomma = vega * d1 * d2 / sigma
    decay = S * pdf1 * sigma / (2.0 * sqrt_tau)
    if kind == "call":
        n2 = norm_cdf(d2)
        return Greeks(norm_cdf(d1), vega, K * tau * disc * n2, gamma, vomma,
                      decay + r * K * disc * n2, -disc * n2)
    n2 = norm_cdf(-d2)
    return Greeks(norm_cdf(d1) - 1.0, vega, -K * tau * disc * n2, gamma, vomma,
                  decay - r * K * disc * n2, disc * n2)


def bsm_gradient(S, K, r, tau, sigma, kind="call") -> np.ndarray:
    """Partial derivatives in feature order (S, r, tau, K, sigma)."""
    g = bsm_greeks(S, K, r, tau, sigma, kind)
    return np.array([g.delta, g.rho, g.theta_tau, g.dK, g.vega])


def bsm_model(kind: str = "call") -> PricingModel:
    """Five-feature model over (S, r, tau, K, sigma); rates are decimals."""
    kind = _kind(kind)

    def value(x):
        S, r, tau, K, sigma = x
        return bsm_price(S, K, r, tau, sigma, kind)

    def grad(x):
        S, r, tau, K, sigma = x
        return bsm_gradient(S, K, r, tau, sigma, kind)

    def value_batch(X):
        return _bsm_rows(X, kind)[0]

    def grad_batch(X):
        return _bsm_rows(X, kind)[1]

    # S=0 r=1 tau=2 K=3 sigma=4
    if kind == "call":
        shape = ShapeProfile(monotone_increasing={0, 1, 2, 4}, monotone_decreasing={3},
                             curvature={0: Curvature.IME, 3: Curvature.RDME})
    else:
        shape = ShapeProfile(monotone_increasing={3, 4}, monotone_decreasing={0, 1},
                             curvature={0: Curvature.RDME, 3: Curvature.IME})
    return PricingModel(OPTION_FEATURES, value, grad, shape, f"bsm-{kind}", value_batch, grad_batch)


def _bsm_rows(X: np.ndarray, kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Prices and (S, r, tau, K, sigma) gradients for each row of ``X``."""
    S, r, tau, K, sigma = (X[:, j] for j in range(5))
    if (not np.all(np.isfinite(X)) or np.any(S <= 0) or np.any(K <= 0)
            or np.any(tau < LIMIT_EPS) or np.any(sigma < LIMIT_EPS)):
        prices = np.array([bsm_price(x[0], x[3], x[1], x[2], x[4], kind) for x in X])
        grads = np.array([bsm_gradient(x[0], x[3], x[1], x[2], x[4], kind) for x in X]).reshape(len(X), 5)
        return prices, grads
    sqrt_tau = np.sqrt(tau)
    vol = sigma * sqrt_tau
    d1 = (np.log(S / K) + (r + 0.5 * sigma * sigma) * tau) / vol
    d2 = d1 - vol
    disc = np.exp(-r * tau)
    pdf1 = np.exp(-0.5 * d1 * d1) / _SQRT_2PI
    vega = S * pdf1 * sqrt_tau
    decay = S * pdf1 * sigma / (2.0 * sqrt_tau)
    if kind == "call":
        n1, n2 = ndtr(d1), ndtr(d2)
        price = S * n1 - K * disc * n2
        grad = np.column_stack([n1, K * tau * disc * n2, decay + r * K * disc * n2, -disc * n2, vega])
    else:
        n1, n2 = ndtr(-d1), ndtr(-d2)
        price = K * disc * n2 - S * n1
        grad = np.column_stack([-n1, -K * tau * disc * n2, decay - r * K * disc * n2, disc * n2, vega])
    return price, grad


@dataclass(frozen=True)
class OptionRecord:
    S: float
    r: float
    tau: float
    K: float
    sigma: float
    price: float
    kind: str
    date: str | None = None

    def problems(self) -> list[str]:
        out = []
        for name in ("S", "r", "tau", "K", "sigma", "price"):
            if not math.isfinite(getattr(self, name)):
                out.append(f"{name} not finite")
        for name in ("S", "K", "tau", "sigma"):
            if getattr(self, name) <= 0:
                out.append(f"{name} must be > 0")
        if self.price < 0:
            out.append("price must be >= 0")
        if self.kind not in ("call", "put"):
            out.append(f"kind {self.kind!r} not call/put")
        return out

    def features(self) -> np.ndarray:
        return np.array([self.S, self.r, self.tau, self.K, self.sigma])


# ---------------------------------------------------------------------------
# Model-free VIX


@dataclass(frozen=True)
class VixInput:
    """Out-of-the-money quotes around the forward ``F``.

    ``put_quotes`` covers strikes <= F and ``call_quotes`` strikes > F, either
    as side-length arrays or as full-length arrays aligned with ``strikes``.
    """

    strikes: np.ndarray
    put_quotes: np.ndarray
    call_quotes: np.ndarray
    F: float
    r: float
    tau: float = 30.0 / 365.0

    def __post_init__(self):
        k = np.asarray(self.strikes, dtype=float)
        object.__setattr__(self, "strikes", k)
        if k.ndim != 1 or k.size < 2 or np.any(k <= 0) or np.any(np.diff(k) <= 0):
            raise ContractViolation("strikes must be positive and strictly ascending")
        if not (k[0] <= self.F <= k[-1]):
            raise ContractViolation(f"forward {self.F} outside strike range [{k[0]}, {k[-1]}]")
        if self.tau <= 0:
            raise ContractViolation("tau must be positive")
        below = k <= self.F
        for attr, side in (("put_quotes", below), ("call_quotes", ~below)):
            q = np.asarray(getattr(self, attr), dtype=float).reshape(-1)
            if q.size == k.size:
                q = q[side]
            if q.size != int(side.sum()):
                raise ContractViolation(f"{attr} has {q.size} entries for {int(side.sum())} strikes")
            if np.any(~np.isfinite(q)) or np.any(q < 0):
                raise ContractViolation(f"{attr} must be finite and non-negative")
            object.__setattr__(self, attr, q)

    def otm_quotes(self) -> np.ndarray:
        return np.concatenate([self.put_quotes, self.call_quotes])


def vix_from_chain(chain: VixInput, min_per_side: int = 3) -> float:
    """Trapezoid discretisation of the model-free variance integral.

    The integrals over P(K)/K^2 below the forward and C(K)/K^2 above it are
    truncated at the outermost strikes. No CBOE forward-adjustment term.
    """
    n_put, n_call = chain.put_quotes.size, chain.call_quotes.size
    if n_put < min_per_side or n_call < min_per_side:
        raise InsufficientChainError(
            f"need {min_per_side} strikes each side of F={chain.F}, have {n_put} puts and {n_call} calls")
    k = chain.strikes
    integrand = chain.otm_quotes() / (k * k)
    area = float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(k)))
    variance = 2.0 * math.exp(chain.r * chain.tau) / chain.tau * area
    return math.sqrt(max(variance, 0.0))


def flat_vol_chain(F: float, sigma: float, r: float = 0.0, tau: float = 30.0 / 365.0,
                   lo: float = 0.5, hi: float = 2.0, spacing: float = 0.005) -> VixInput:
    """Synthetic BSM chain with strikes from ``lo*F`` to ``hi*F`` in steps of ``spacing*F``."""
    m = int(round((hi - lo) / spacing))
    strikes = F * (lo + spacing * np.arange(m + 1))
    spot = F * math.exp(-r * tau)
    puts = np.array([bsm_price(spot, K, r, tau, sigma, "put") for K in strikes if K <= F])
    calls = np.array([bsm_price(spot, K, r, tau, sigma, "call") for K in strikes if K > F])
    return VixInput(strikes, puts, calls, F, r, tau)


MODEL_FACTORIES: Mapping[str, Callable[..., PricingModel]] = {
    "bond": bond_model,
    "bsm-call": lambda: bsm_model("call"),
    "bsm-put": lambda: bsm_model("put"),
}
