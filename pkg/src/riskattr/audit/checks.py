"""Grid-based checkers for the risk axioms.

Each checker evaluates an attribution method on a finite grid and returns an
:class:`AxiomReport`. "pass" means no violation was found on that grid.

Sign conventions: a monotone-decreasing feature is audited with its
inequalities flipped, and an explicand coordinate below the baseline flips
the expected sign of the attribution (the attribution integrates the
feature's effect over a reversed interval).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..attribution import QuadratureConfig, attribute
from ..core import AttributionResult, Curvature, FeatureVector, Method, check_aligned
from ..errors import ContractViolation
from ..pricing import PricingModel, finite_difference_gradient
from .domain import TrainingDomain
from .report import Axiom, AxiomReport, Verdict, Witness

RATIO_MIN_GAP = 1e-9
DEFAULT_QUADRATURE = QuadratureConfig("gauss-legendre", 256)


@dataclass(frozen=True)
class AuditGrid:
    """Values of one feature to sweep, with every other coordinate frozen.

    ``context`` supplies the explicand's other coordinates; ``deltas`` are the
    extra increments c probed by the DIM check.
    """

    feature: str
    values: np.ndarray
    context: FeatureVector
    baseline: FeatureVector
    deltas: tuple[float, ...] = ()

    def __post_init__(self):
        check_aligned(self.context, self.baseline)
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.size == 0 or np.any(np.diff(vals) < 0) or not np.all(np.isfinite(vals)):
            raise ContractViolation("grid values must be finite and ascending")
        self.context.index(self.feature)
        deltas = tuple(float(c) for c in self.deltas)
        if any(not c > 0 for c in deltas):
            raise ContractViolation("DIM deltas must be positive")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "deltas", deltas)

    @classmethod
    def parse(cls, spec: str, context: FeatureVector, baseline: FeatureVector,
              deltas: Sequence[float] = ()) -> "AuditGrid":
        """Build from ``"name:lo:hi:count"``."""
        try:
            name, lo, hi, count = spec.split(":")
            values = np.linspace(float(lo), float(hi), int(count))
        except ValueError:
            raise ContractViolation(f"grid spec must look like 'S:1220:1320:21', got {spec!r}") from None
        return cls(name, values, context, baseline, tuple(deltas))

    @property
    def index(self) -> int:
        return self.context.index(self.feature)

    @property
    def baseline_value(self) -> float:
        return self.baseline[self.feature]

    def explicand(self, v: float) -> FeatureVector:
        return self.context.replace(**{self.feature: float(v)})


def _attr_fn(method: Method, model: PricingModel, q: QuadratureConfig | None):
    cache: dict = {}

    def get(x: FeatureVector, baseline: FeatureVector) -> AttributionResult:
        key = (x.values.tobytes(), baseline.values.tobytes())
        if key not in cache:
            cache[key] = attribute(method, model, x, baseline, q or DEFAULT_QUADRATURE)
        return cache[key]

    return get


def _tolerance(tol, scales) -> float:
    if tol is not None:
        return float(tol)
    return 1e-8 * max([1.0, *map(abs, scales)])


def _as_grids(grids) -> list[AuditGrid]:
    return [grids] if isinstance(grids, AuditGrid) else list(grids)


def _report(axiom, method, model, grids, tol, witnesses, n_checked, notes=(), feature=None):
    grids = _as_grids(grids)
    return AxiomReport(
        axiom, method, Verdict.VIOLATED if witnesses else Verdict.PASS, tuple(witnesses), tol,
        model.name, feature or (grids[0].feature if grids else None),
        tuple(v for g in grids for v in g.values), n_checked, tuple(notes))


def _not_applicable(axiom, method, model, grid_or_feature, note, evidence=()):
    feature = grid_or_feature.feature if isinstance(grid_or_feature, AuditGrid) else grid_or_feature
    grid = tuple(grid_or_feature.values) if isinstance(grid_or_feature, AuditGrid) else ()
    return AxiomReport(axiom, method, Verdict.NOT_APPLICABLE, (), 0.0, model.name, feature, grid, 0,
                       (note,), tuple(evidence))


def _vec(x: FeatureVector) -> list[float]:
    return [float(v) for v in x.values]


def check_aim(method, model: PricingModel, grids, tol: float | None = None,
              q: QuadratureConfig | None = None) -> AxiomReport:
    """Attributions of monotone features carry the sign of the monotone effect.

    For an increasing feature the attribution must be >= -tol whenever the
    explicand coordinate is at or above the baseline; decreasing features and
    explicands below the baseline flip the sign.
    """
    method = Method.parse(method)
    grids = _as_grids(grids)
    for g in grids:
        if model.shape.direction(g.index) == 0:
            return _not_applicable(Axiom.AIM, method, model, g, f"feature {g.feature} not declared monotone")
    get = _attr_fn(method, model, q)
    results = [(g, v, get(g.explicand(v), g.baseline)) for g in grids for v in g.values]
    tol = _tolerance(tol, [res.delta_f for _, _, res in results])
    witnesses = []
    for g, v, res in results:
        a = res.attributions[g.index]
        side = np.sign(v - g.baseline_value)
        want = model.shape.direction(g.index) * side
        margin = -want * a if want != 0 else abs(a)
        if margin > tol:
            witnesses.append(Witness({"explicand": _vec(res.explicand), "baseline": _vec(res.baseline)},
                                     {g.feature: float(a)}, float(margin)))
    return _report(Axiom.AIM, method, model, grids, tol, witnesses, len(results))


def check_dim(method, model: PricingModel, grid: AuditGrid, tol: float | None = None,
              q: QuadratureConfig | None = None) -> AxiomReport:
    """Raising a monotone feature moves its attribution in the monotone direction.

    Compares consecutive grid values and every ``(v, v + c)`` pair for
    ``c`` in ``grid.deltas``.
    """
    method = Method.parse(method)
    direction = model.shape.direction(grid.index)
    if direction == 0:
        return _not_applicable(Axiom.DIM, method, model, grid, f"feature {grid.feature} not declared monotone")
    get = _attr_fn(method, model, q)
    pairs = list(zip(grid.values[:-1], grid.values[1:]))
    pairs += [(v, v + c) for v in grid.values for c in grid.deltas]
    computed = []
    for lo, hi in pairs:
        r_lo = get(grid.explicand(lo), grid.baseline)
        r_hi = get(grid.explicand(hi), grid.baseline)
        computed.append((lo, hi, r_lo, r_hi))
    tol = _tolerance(tol, [r.delta_f for _, _, a, b in computed for r in (a, b)])
    witnesses = []
    for lo, hi, r_lo, r_hi in computed:
        a_lo, a_hi = r_lo.attributions[grid.index], r_hi.attributions[grid.index]
        margin = direction * (a_lo - a_hi)
        if margin > tol:
            witnesses.append(Witness(
                {"explicand": _vec(r_lo.explicand), "explicand_raised": _vec(r_hi.explicand),
                 "baseline": _vec(grid.baseline)},
                {"at": float(a_lo), "raised": float(a_hi)}, float(margin)))
    return _report(Axiom.DIM, method, model, grid, tol, witnesses, len(pairs))


_RATIO_DIRECTION = {Curvature.DME: -1, Curvature.RDME: 1, Curvature.IME: 1}


def check_marginal(method, model: PricingModel, grid: AuditGrid, kind, tol: float | None = None,
                   q: QuadratureConfig | None = None) -> AxiomReport:
    """Normalised attribution A/(x - x') moves with the declared curvature.

    Nonincreasing along the grid for DME, nondecreasing for RDME and IME.
    Grid values within 1e-9 of the baseline coordinate are skipped.
    """
    method = Method.parse(method)
    kind = Curvature[kind.upper()] if isinstance(kind, str) and kind.upper() in Curvature.__members__ else Curvature(kind)
    axiom = Axiom(kind.name)
    if model.shape.curvature_of(grid.index) is not kind:
        return _not_applicable(axiom, method, model, grid, f"feature {grid.feature} not flagged {kind.name}")
    get = _attr_fn(method, model, q)
    base = grid.baseline_value
    kept = [v for v in grid.values if abs(v - base) > RATIO_MIN_GAP]
    rows = []
    for v in kept:
        res = get(grid.explicand(v), grid.baseline)
        rows.append((v, res, res.attributions[grid.index] / (v - base)))
    tol = _tolerance(tol, [r.delta_f for _, r, _ in rows])
    sign = _RATIO_DIRECTION[kind]
    witnesses = []
    for (v0, r0, q0), (v1, r1, q1) in zip(rows[:-1], rows[1:]):
        margin = sign * (q0 - q1)
        if margin > tol:
            witnesses.append(Witness(
                {"explicand": _vec(r0.explicand), "explicand_raised": _vec(r1.explicand),
                 "baseline": _vec(grid.baseline)},
                {"ratio_at": float(q0), "ratio_raised": float(q1),
                 "at": float(r0.attributions[grid.index]), "raised": float(r1.attributions[grid.index])},
                float(margin)))
    notes = [f"skipped {len(grid.values) - len(kept)} grid value(s) at the baseline"] if len(kept) < len(grid.values) else []
    return _report(axiom, method, model, grid, tol, witnesses, max(len(rows) - 1, 0), notes)


def _gradient_at(model: PricingModel, x: np.ndarray) -> np.ndarray:
    if model.has_gradient:
        return model.gradient(x)
    return finite_difference_gradient(model.evaluate, x)


def check_fmd(method, model_f: PricingModel, model_g: PricingModel, grid: AuditGrid,
              shared_map: Mapping[str, str] | None = None,
              g_context: FeatureVector | None = None, g_baseline: FeatureVector | None = None,
              tol: float | None = None, q: QuadratureConfig | None = None,
              verify_dominance: bool = True) -> AxiomReport:
    """If f dominates g in feature alpha, alpha's attribution under f dominates it under g.

    ``grid`` sweeps alpha for ``model_f``. ``shared_map`` sends f's shared
    feature names (alpha included) to g's; by default every name common to
    both models is shared. g's remaining coordinates come from ``g_context``
    and ``g_baseline``.
    """
    method = Method.parse(method)
    if shared_map is None:
        shared_map = {n: n for n in model_f.names if n in model_g.names}
    shared_map = dict(shared_map)
    if grid.feature not in shared_map:
        raise ContractViolation(f"feature {grid.feature!r} is not shared between the two models")
    for fn, gn in shared_map.items():
        if fn not in model_f.names or gn not in model_g.names:
            raise ContractViolation(f"shared feature {fn!r}->{gn!r} missing from a model")
    unshared = [n for n in model_g.names if n not in shared_map.values()]
    if unshared and (g_context is None or g_baseline is None):
        raise ContractViolation(f"g features {unshared} need g_context and g_baseline")
    alpha_g = model_g.names.index(shared_map[grid.feature])
    inverse = {gn: fn for fn, gn in shared_map.items()}

    def to_g(x: FeatureVector, fallback: FeatureVector | None) -> FeatureVector:
        vals = [x[inverse[n]] if n in inverse else fallback[n] for n in model_g.names]
        return FeatureVector(vals, model_g.names)

    get_f = _attr_fn(method, model_f, q)
    get_g = _attr_fn(method, model_g, q)
    yb = to_g(grid.baseline, g_baseline)
    pairs = []
    for v in grid.values:
        x = grid.explicand(v)
        pairs.append((v, x, to_g(x, g_context)))

    if verify_dominance:
        evidence = []
        probe_tol = _tolerance(tol, [])
        for v, x, y in pairs:
            for t in (0.0, 0.5, 1.0):
                xf = grid.baseline.values + t * (x.values - grid.baseline.values)
                yg = yb.values + t * (y.values - yb.values)
                gap = _gradient_at(model_f, xf)[grid.index] - _gradient_at(model_g, yg)[alpha_g]
                if gap < -probe_tol:
                    evidence.append(Witness({"x": xf.tolist(), "y": yg.tolist()},
                                            {"dominance_gap": float(gap)}, float(-gap)))
        if evidence:
            return _not_applicable(Axiom.FMD, method, model_f, grid,
                                   f"{model_f.name} does not dominate {model_g.name} in {grid.feature}", evidence)

    computed = [(v, get_f(x, grid.baseline), get_g(y, yb)) for v, x, y in pairs]
    tol = _tolerance(tol, [r.delta_f for _, a, b in computed for r in (a, b)])
    witnesses = []
    for v, rf, rg in computed:
        af, ag = rf.attributions[grid.index], rg.attributions[alpha_g]
        side = np.sign(v - grid.baseline_value)
        margin = -side * (af - ag) if side != 0 else abs(af - ag)
        if margin > tol:
            witnesses.append(Witness(
                {"explicand_f": _vec(rf.explicand), "baseline_f": _vec(rf.baseline),
                 "explicand_g": _vec(rg.explicand), "baseline_g": _vec(rg.baseline)},
                {"f": float(af), "g": float(ag)}, float(margin)))
    return AxiomReport(Axiom.FMD, method, Verdict.VIOLATED if witnesses else Verdict.PASS, tuple(witnesses),
                       tol, f"{model_f.name} vs {model_g.name}", grid.feature, tuple(grid.values), len(computed))


def check_generalized_dummy(method, model: PricingModel, dummy_index: int, grid: AuditGrid,
                            tol: float | None = None, q: QuadratureConfig | None = None,
                            probes: Sequence[float] = (-1.0, 0.0, 1.0, 10.0)) -> AxiomReport:
    """Unused feature gets zero attribution and dropping it leaves the rest unchanged.

    The reduced model fixes the dummy at its baseline coordinate. Constancy
    in the dummy is spot-checked first by moving it across ``probes`` (and
    the grid's explicand/baseline values) at every grid point.
    """
    method = Method.parse(method)
    dummy = model.names[dummy_index]
    points = [grid.explicand(v) for v in grid.values] + [grid.baseline]
    trial_values = sorted({*probes, grid.baseline[dummy], grid.context[dummy]})
    evidence = []
    for x in points:
        ref = model.evaluate(x.values)
        for d in trial_values:
            moved = x.replace(**{dummy: d})
            diff = abs(model.evaluate(moved.values) - ref)
            if diff > 1e-12 * max(1.0, abs(ref)):
                evidence.append(Witness({"x": _vec(x), "moved": _vec(moved)}, {"change": float(diff)}, float(diff)))
    if evidence:
        return _not_applicable(Axiom.GD, method, model, dummy, f"model varies with {dummy}", evidence)

    reduced = model.fix(**{dummy: grid.baseline[dummy]})
    keep = [i for i in range(model.n_features) if i != dummy_index]
    get = _attr_fn(method, model, q)
    get_r = _attr_fn(method, reduced, q)
    rows = []
    for x in points[:-1]:
        full = get(x, grid.baseline)
        red = get_r(FeatureVector(x.values[keep], reduced.names), FeatureVector(grid.baseline.values[keep], reduced.names))
        rows.append((x, full, red))
    tol = _tolerance(tol, [f.delta_f for _, f, _ in rows])
    witnesses = []
    for x, full, red in rows:
        a_dummy = abs(full.attributions[dummy_index])
        shift = float(np.max(np.abs(full.attributions[keep] - red.attributions))) if keep else 0.0
        margin = max(a_dummy, shift)
        if margin > tol:
            witnesses.append(Witness({"explicand": _vec(x), "baseline": _vec(grid.baseline)},
                                     {"dummy": float(full.attributions[dummy_index]), "max_shift": shift},
                                     float(margin)))
    return _report(Axiom.GD, method, model, grid, tol, witnesses, len(rows), feature=dummy)


def check_cg(result: AttributionResult, domain: TrainingDomain, model_name: str = "") -> AxiomReport:
    """Every input the attribution fed to the model lies in the training domain."""
    for label, x in (("explicand", result.explicand), ("baseline", result.baseline)):
        if not domain.contains_vector(x):
            raise ContractViolation(f"{label} {x!r} lies outside the training domain")
    pts = result.evaluation_points
    inside = domain.contains(pts, result.names) if len(pts) else np.ones(0, dtype=bool)
    witnesses = [Witness({"point": pts[k].tolist()}, {}, 1.0) for k in np.flatnonzero(~inside)]
    notes = [f"domain mode {domain.mode}", f"{int((~inside).sum())} of {len(pts)} evaluation points outside"]
    if domain.extended:
        notes.append("extended-CG: point-cloud domain is not convex")
    return AxiomReport(Axiom.CG, result.method, Verdict.VIOLATED if witnesses else Verdict.PASS,
                       tuple(witnesses), 0.0, model_name, None, (), len(pts), tuple(notes))
