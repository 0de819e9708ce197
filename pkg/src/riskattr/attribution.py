"""Exact Baseline Shapley and quadrature Integrated Gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend
from .core import MAX_EXACT_FEATURES, AttributionResult, FeatureVector, Method, check_aligned
from .errors import CapabilityError, ContractViolation, SizeLimitError
from .pricing import PricingModel

RULES = ("trapezoid", "gauss-legendre")


@dataclass(frozen=True)
class QuadratureConfig:
    rule: str = "trapezoid"
    points: int = 256
    refine_check: bool = False

    def __post_init__(self):
        if self.rule not in RULES:
            raise ContractViolation(f"quadrature rule must be one of {RULES}, got {self.rule!r}")
        if int(self.points) < 2:
            raise ContractViolation(f"need at least 2 quadrature points, got {self.points}")
        object.__setattr__(self, "points", int(self.points))

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        return _nodes_weights(self.rule, self.points)


@lru_cache(maxsize=32)
def _nodes_weights(rule: str, m: int) -> tuple[np.ndarray, np.ndarray]:
    if rule == "trapezoid":
        t = np.linspace(0.0, 1.0, m)
        w = np.full(m, 1.0 / (m - 1))
        w[0] = w[-1] = 0.5 / (m - 1)
    else:
        x, w = np.polynomial.legendre.leggauss(m)
        t, w = 0.5 * (x + 1.0), 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _check_inputs(model: PricingModel, explicand: FeatureVector, baseline: FeatureVector) -> None:
    check_aligned(explicand, baseline)
    if explicand.names != model.names:
        raise ContractViolation(f"model {model.name} expects {model.names}, got {explicand.names}")


def corner_points(explicand: FeatureVector, baseline: FeatureVector) -> np.ndarray:
    """All 2**n coalition substitutions; row ``mask`` takes the explicand on the set bits of ``mask``."""
    n = len(explicand)
    masks = np.arange(1 << n)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    return np.where(bits, explicand.values, baseline.values)


def bshap(model: PricingModel, explicand: FeatureVector, baseline: FeatureVector) -> AttributionResult:
    """Exact Baseline Shapley values by enumerating every coalition.

    Each of the ``2**n`` coalition values is computed once; the weighted
    marginal contributions are reduced in ascending-mask order.
    """
    _check_inputs(model, explicand, baseline)
    n = len(explicand)
    if n > MAX_EXACT_FEATURES:
        raise SizeLimitError(f"exact BShap supports at most {MAX_EXACT_FEATURES} features, got {n}")
    points = corner_points(explicand, baseline)
    values = model.evaluate_many(points)
    attributions = _backend.shapley_from_values(values, n)
    return AttributionResult(
        Method.BSHAP, attributions, explicand, baseline,
        f_explicand=float(values[-1]), f_baseline=float(values[0]),
        evaluation_points=points, n_model_evals=len(values),
    )


def integrated_gradients(
    model: PricingModel,
    explicand: FeatureVector,
    baseline: FeatureVector,
    q: QuadratureConfig | None = None,
) -> AttributionResult:
    """Integrated Gradients along the straight path from ``baseline`` to ``explicand``.

    The completeness residual is reported as-is; quadrature error is never
    redistributed across features.
    """
    q = q or QuadratureConfig()
    _check_inputs(model, explicand, baseline)
    if not model.has_gradient:
        raise CapabilityError(
            f"{model.name} has no gradient; wrap it with pricing.with_finite_difference_gradient")
    attributions, path = _ig_sum(model, explicand.values, baseline.values, q.rule, q.points)
    meta = {"rule": q.rule, "points": q.points}
    n_evals = 2 + len(path)
    if q.refine_check:
        fine, _ = _ig_sum(model, explicand.values, baseline.values, q.rule, 2 * q.points)
        meta["refinement_delta"] = float(np.max(np.abs(fine - attributions)))
        n_evals += 2 * q.points
    return AttributionResult(
        Method.IG, attributions, explicand, baseline,
        f_explicand=model.evaluate(explicand.values), f_baseline=model.evaluate(baseline.values),
        evaluation_points=path, n_model_evals=n_evals, meta=meta,
    )


def _ig_sum(model, xe, xb, rule, m):
    t, w = _nodes_weights(rule, m)
    diff = xe - xb
    path = xb + t[:, None] * diff
    grads = model.gradient_many(path)
    return diff * (w @ grads), path


def attribute(method, model: PricingModel, explicand: FeatureVector, baseline: FeatureVector,
              q: QuadratureConfig | None = None) -> AttributionResult:
    method = Method.parse(method)
    if method is Method.BSHAP:
        return bshap(model, explicand, baseline)
    return integrated_gradients(model, explicand, baseline, q)


def ig_bond_closed_form(r: float, c: float, T: float) -> float:
    """Integrated Gradients of the rate feature for c*exp(-rT) against a zero baseline.

    Equals c*(exp(-a) + exp(-a)/a - 1/a) with a = r*T, and -c*a/2 for |a| <= 1e-8.
    """
    if not all(math.isfinite(v) for v in (r, c, T)):
        raise ContractViolation(f"non-finite input r={r}, c={c}, T={T}")
    a = r * T
    if abs(a) <= 1e-8:
        return -c * a / 2.0
    return c * (math.exp(-a) + math.expm1(-a) / a)


def ig_bond_principal_closed_form(r: float, c: float, T: float) -> float:
    """Companion attribution of the principal: c*(1 - exp(-a))/a."""
    a = r * T
    if abs(a) <= 1e-8:
        return c * (1.0 - a / 2.0)
    return -c * math.expm1(-a) / a
