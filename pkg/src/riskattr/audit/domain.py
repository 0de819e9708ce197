"""Training-domain geometry for the convex-geometry audit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from .. import _backend
from ..core import FeatureVector
from ..errors import ContractViolation, InsufficientDataError
from ..pricing import OPTION_FEATURES

MODES = ("axis-box", "hull2d", "point-cloud")
MEMBERSHIP_TOL = 1e-9


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def monotone_chain(points) -> np.ndarray:
    """Convex hull vertices in counter-clockwise order, collinear points dropped.

    Degenerate inputs return one vertex (all points equal) or two (collinear).
    """
    pts = sorted(set(map(tuple, np.asarray(points, dtype=float).reshape(-1, 2))))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=float).reshape(-1, 2)


def is_convex_ccw(vertices) -> bool:
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    k = len(v)
    if k < 3:
        return True
    return all(_cross(v[j], v[(j + 1) % k], v[(j + 2) % k]) > 0 for j in range(k))


@dataclass(frozen=True)
class TrainingDomain:
    """Region of feature space a model was fitted on.

    ``lo``/``hi`` bound every feature in all modes; ``hull`` (raw units, CCW)
    constrains the two ``hull_features`` in hull2d mode; ``cloud`` holds
    min-max-normalised points with membership radius ``radius`` in
    point-cloud mode.
    """

    mode: str
    names: tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray
    hull_features: tuple[str, str] | None = None
    hull: np.ndarray | None = None
    cloud: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ContractViolation(f"domain mode must be one of {MODES}, got {self.mode!r}")
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != (len(self.names),) or hi.shape != lo.shape or np.any(lo > hi):
            raise ContractViolation("box bounds must satisfy lo <= hi for every feature")
        if self.mode == "hull2d":
            if self.hull_features is None or self.hull is None:
                raise ContractViolation("hull2d domain needs hull_features and hull vertices")
            hull = np.asarray(self.hull, dtype=float).reshape(-1, 2)
            object.__setattr__(self, "hull", hull)
            object.__setattr__(self, "hull_features", tuple(self.hull_features))
            if not is_convex_ccw(hull):
                raise ContractViolation("hull vertices do not form a counter-clockwise convex polygon")
        if self.mode == "point-cloud":
            if self.cloud is None or self.radius is None or not self.radius > 0:
                raise ContractViolation("point-cloud domain needs points and a positive radius")
            object.__setattr__(self, "cloud", np.asarray(self.cloud, dtype=float))

    @property
    def extended(self) -> bool:
        """True for modes that go beyond convex domains."""
        return self.mode == "point-cloud"

    def _span(self) -> np.ndarray:
        span = self.hi - self.lo
        return np.where(span > 0, span, 1.0)

    def normalize(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.lo) / self._span()

    def _project(self, points, names: Sequence[str] | None) -> np.ndarray:
        X = np.asarray(points, dtype=float)
        X = X.reshape(-1, X.shape[-1] if X.ndim else 1)
        if names is None:
            names = self.names
        names = tuple(names)
        try:
            cols = [names.index(n) for n in self.names]
        except ValueError:
            raise ContractViolation(f"domain features {self.names} not all present in {names}") from None
        return X[:, cols]

    def contains(self, points, names: Sequence[str] | None = None, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """Row-wise membership; ``names`` maps the columns of ``points`` onto domain features."""
        Z = self.normalize(self._project(points, names))
        inside = np.all((Z >= -tol) & (Z <= 1.0 + tol), axis=1)
        if self.mode == "hull2d":
            i, j = (self.names.index(n) for n in self.hull_features)
            span = self._span()
            hull_n = (self.hull - self.lo[[i, j]]) / span[[i, j]]
            inside &= _backend.points_in_convex_polygon(Z[:, [i, j]], hull_n, tol)
        elif self.mode == "point-cloud":
            inside &= _backend.min_sq_distances(Z, self.cloud) <= (self.radius + tol) ** 2
        return inside

    def contains_vector(self, x: FeatureVector) -> bool:
        return bool(self.contains(x.values[None, :], x.names)[0])

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "names": list(self.names),
               "lo": self.lo.tolist(), "hi": self.hi.tolist()}
        if self.mode == "hull2d":
            out["hull_features"] = list(self.hull_features)
            out["hull"] = self.hull.tolist()
        if self.mode == "point-cloud":
            out["radius"] = float(self.radius)
            out["cloud"] = self.cloud.tolist()
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainingDomain":
        return cls(mode=d["mode"], names=tuple(d["names"]), lo=np.array(d["lo"]), hi=np.array(d["hi"]),
                   hull_features=tuple(d["hull_features"]) if d.get("hull_features") else None,
                   hull=np.array(d["hull"]) if d.get("hull") is not None else None,
                   cloud=np.array(d["cloud"]) if d.get("cloud") is not None else None,
                   radius=d.get("radius"))


def _as_matrix(points, names):
    if len(points) and isinstance(points[0], FeatureVector):
        names = points[0].names
        if any(p.names != names for p in points):
            raise ContractViolation("points must share feature names")
        return np.array([p.values for p in points]), tuple(names)
    if names is None:
        raise ContractViolation("names are required for raw point arrays")
    return np.asarray(points, dtype=float).reshape(len(points), -1), tuple(names)


def fit_domain(points, mode: str = "axis-box", names: Sequence[str] | None = None,
               hull_features: tuple[str, str] = ("S", "sigma"), radius: float = 0.05) -> TrainingDomain:
    """Fit a training domain to observed points (FeatureVectors or an array plus ``names``)."""
    if mode not in MODES:
        raise ContractViolation(f"domain mode must be one of {MODES}, got {mode!r}")
    if len(points) < 3:
        raise InsufficientDataError(f"need at least 3 points to fit a domain, got {len(points)}")
    X, names = _as_matrix(points, names)
    lo, hi = X.min(axis=0), X.max(axis=0)
    if mode == "axis-box":
        return TrainingDomain(mode, names, lo, hi)
    if mode == "hull2d":
        hull_features = tuple(hull_features)
        for f in hull_features:
            if f not in names:
                raise ContractViolation(f"hull feature {f!r} not among {names}")
        i, j = (names.index(f) for f in hull_features)
        return TrainingDomain(mode, names, lo, hi, hull_features, monotone_chain(X[:, [i, j]]))
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    return TrainingDomain(mode, names, lo, hi, cloud=(X - lo) / span, radius=float(radius))


def generate_leverage_data(n_points: int, s_range: tuple[float, float], sigma_range: tuple[float, float],
                           correlation: float, seed: int = 0,
                           other_ranges: Mapping[str, tuple[float, float]] | None = None) -> list[FeatureVector]:
    """Synthetic (S, sigma) sample with a prescribed negative rank correlation.

    Uses a Gaussian copula: a Spearman target rho_s corresponds to a normal
    correlation of 2*sin(pi*rho_s/6). Marginals are uniform on the given
    ranges, and any ``other_ranges`` features are independent uniforms.
    """
    if n_points < 10:
        raise ContractViolation(f"need n_points >= 10, got {n_points}")
    if not -1.0 < correlation < 0.0:
        raise ContractViolation(f"correlation must lie in (-1, 0), got {correlation}")
    for lo, hi in [s_range, sigma_range, *(other_ranges or {}).values()]:
        if not lo < hi:
            raise ContractViolation(f"empty range ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    rho = 2.0 * math.sin(math.pi * correlation / 6.0)
    z1 = rng.standard_normal(n_points)
    z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * rng.standard_normal(n_points)
    cols = {
        "S": s_range[0] + ndtr(z1) * (s_range[1] - s_range[0]),
        "sigma": sigma_range[0] + ndtr(z2) * (sigma_range[1] - sigma_range[0]),
    }
    for name, (lo, hi) in (other_ranges or {}).items():
        cols[name] = rng.uniform(lo, hi, n_points)
    order = [n for n in OPTION_FEATURES if n in cols] + [n for n in cols if n not in OPTION_FEATURES]
    X = np.column_stack([cols[n] for n in order])
    return [FeatureVector(row, order) for row in X]
