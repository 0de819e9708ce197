"""Shared domain types and the coalition primitives behind Baseline Shapley."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ContractViolation

MAX_EXACT_FEATURES = 20


class FeatureVector:
    """Ordered, named vector of finite reals.

    Instances are immutable: ``values`` is a read-only float64 array.
    """

    __slots__ = ("_values", "_names", "_units")

    def __init__(self, values, names: Sequence[str], units: Sequence[str | None] | None = None):
        arr = np.array(values, dtype=float).reshape(-1)
        names = tuple(str(n) for n in names)
        if arr.size != len(names):
            raise ContractViolation(f"{arr.size} values but {len(names)} names")
        if len(set(names)) != len(names):
            raise ContractViolation(f"feature names must be unique, got {names}")
        if not np.all(np.isfinite(arr)):
            raise ContractViolation(f"non-finite feature value in {arr.tolist()}")
        if units is not None:
            units = tuple(units)
            if len(units) != len(names):
                raise ContractViolation("units must match names in length")
        arr.setflags(write=False)
        self._values = arr
        self._names = names
        self._units = units

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    @property
    def units(self) -> tuple[str | None, ...] | None:
        return self._units

    def __len__(self) -> int:
        return len(self._names)

    def __getitem__(self, key):
        if isinstance(key, str):
            return float(self._values[self.index(key)])
        return float(self._values[key])

    def index(self, name: str) -> int:
        try:
            return self._names.index(name)
        except ValueError:
            raise ContractViolation(f"unknown feature {name!r}; have {self._names}") from None

    def replace(self, **updates: float) -> "FeatureVector":
        """Copy with the named coordinates replaced."""
        vals = self._values.copy()
        for name, value in updates.items():
            vals[self.index(name)] = value
        return FeatureVector(vals, self._names, self._units)

    def with_values(self, values) -> "FeatureVector":
        return FeatureVector(values, self._names, self._units)

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self._names, self._values)}

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self._names == other._names and np.array_equal(self._values, other._values)

    def __hash__(self) -> int:
        return hash((self._names, self._values.tobytes()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={v:g}" for n, v in zip(self._names, self._values))
        return f"FeatureVector({inner})"


def check_aligned(a: FeatureVector, b: FeatureVector) -> None:
    if a.names != b.names:
        raise ContractViolation(f"feature names differ: {a.names} vs {b.names}")


@dataclass(frozen=True)
class Coalition:
    """A set of feature indices drawn from ``range(n)``."""

    members: frozenset[int]
    n: int

    def __init__(self, members: Iterable[int], n: int):
        members = frozenset(int(m) for m in members)
        if n < 0 or any(m < 0 or m >= n for m in members):
            raise ContractViolation(f"coalition {sorted(members)} not within range({n})")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "n", int(n))

    @classmethod
    def from_mask(cls, mask: int, n: int) -> "Coalition":
        return cls((i for i in range(n) if mask >> i & 1), n)

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members


class Curvature(str, enum.Enum):
    DME = "concave-DME"
    IME = "convex-IME"
    RDME = "convex-RDME"
    NONE = "none"


@dataclass(frozen=True)
class ShapeProfile:
    """Declared monotone directions and curvature flags, by feature index."""

    monotone_increasing: frozenset[int] = frozenset()
    monotone_decreasing: frozenset[int] = frozenset()
    curvature: Mapping[int, Curvature] = field(default_factory=dict)

    def __post_init__(self):
        inc = frozenset(self.monotone_increasing)
        dec = frozenset(self.monotone_decreasing)
        curv = {int(k): Curvature(v) for k, v in dict(self.curvature).items()}
        object.__setattr__(self, "monotone_increasing", inc)
        object.__setattr__(self, "monotone_decreasing", dec)
        object.__setattr__(self, "curvature", curv)
        if inc & dec:
            raise ContractViolation(f"features {sorted(inc & dec)} marked both increasing and decreasing")
        for i, c in curv.items():
            if c is Curvature.RDME and i not in dec:
                raise ContractViolation(f"feature {i} flagged RDME must be monotone decreasing")
            if c in (Curvature.DME, Curvature.IME) and i not in inc:
                raise ContractViolation(f"feature {i} flagged {c.name} must be monotone increasing")

    def direction(self, i: int) -> int:
        """+1 increasing, -1 decreasing, 0 not monotone."""
        if i in self.monotone_increasing:
            return 1
        if i in self.monotone_decreasing:
            return -1
        return 0

    def curvature_of(self, i: int) -> Curvature:
        return self.curvature.get(i, Curvature.NONE)

    def drop(self, i: int) -> "ShapeProfile":
        """Profile of the model with feature ``i`` removed (later indices shift down)."""

        def shift(s):
            return frozenset(j - (j > i) for j in s if j != i)

        return ShapeProfile(
            shift(self.monotone_increasing),
            shift(self.monotone_decreasing),
            {k - (k > i): v for k, v in self.curvature.items() if k != i},
        )


class Method(str, enum.Enum):
    BSHAP = "BShap"
    IG = "IG"

    @classmethod
    def parse(cls, text) -> "Method":
        if isinstance(text, Method):
            return text
        key = str(text).strip().lower()
        for m in cls:
            if m.value.lower() == key:
                return m
        raise ContractViolation(f"unknown attribution method {text!r}")


@dataclass(frozen=True)
class AttributionResult:
    """Per-feature attributions plus the bookkeeping the auditors need.

    ``evaluation_points`` holds, row by row, every input the attribution fed
    to the model (coalition corners for BShap, path nodes for IG).
    """

    method: Method
    attributions: np.ndarray
    explicand: FeatureVector
    baseline: FeatureVector
    f_explicand: float
    f_baseline: float
    evaluation_points: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    n_model_evals: int = 0
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        attr = np.array(self.attributions, dtype=float).reshape(-1)
        attr.setflags(write=False)
        object.__setattr__(self, "attributions", attr)
        if attr.shape != (len(self.explicand),):
            raise ContractViolation("attributions length must equal feature count")
        pts = np.array(self.evaluation_points, dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, len(self.explicand))
        pts.setflags(write=False)
        object.__setattr__(self, "evaluation_points", pts)

    @property
    def names(self) -> tuple[str, ...]:
        return self.explicand.names

    @property
    def delta_f(self) -> float:
        return self.f_explicand - self.f_baseline

    @property
    def completeness_residual(self) -> float:
        return float(math.fsum(self.attributions) - self.delta_f)

    def evaluation_vectors(self) -> list[FeatureVector]:
        return [self.explicand.with_values(row) for row in self.evaluation_points]

    def __getitem__(self, name: str) -> float:
        return float(self.attributions[self.explicand.index(name)])

    def to_dict(self) -> dict:
        out = {
            "method": self.method.value,
            "feature_names": list(self.names),
            "attributions": [float(a) for a in self.attributions],
            "completeness_residual": self.completeness_residual,
            "n_model_evals": int(self.n_model_evals),
            "explicand": [float(v) for v in self.explicand.values],
            "baseline": [float(v) for v in self.baseline.values],
            "f_explicand": float(self.f_explicand),
            "f_baseline": float(self.f_baseline),
        }
        if self.meta:
            out["meta"] = dict(self.meta)
        return out


def coalition_substitute(explicand: FeatureVector, baseline: FeatureVector, s: Coalition) -> FeatureVector:
    """Explicand coordinates on ``s``, baseline coordinates elsewhere."""
    check_aligned(explicand, baseline)
    if s.n != len(explicand):
        raise ContractViolation(f"coalition over {s.n} features, vectors have {len(explicand)}")
    z = baseline.values.copy()
    idx = sorted(s.members)
    z[idx] = explicand.values[idx]
    return explicand.with_values(z)


def shapley_weight(subset_size: int, n: int) -> float:
    """|S|! (n-|S|-1)! / n!, computed as a running product so n up to 20 never overflows."""
    if n < 1 or not 0 <= subset_size <= n - 1:
        raise ContractViolation(f"need 0 <= subset_size <= n-1, got subset_size={subset_size}, n={n}")
    # 1 / (n * C(n-1, k))
    k = min(subset_size, n - 1 - subset_size)
    w = 1.0 / n
    for j in range(1, k + 1):
        w *= j / (n - k + j - 1)
    return w


def shapley_weights(n: int) -> np.ndarray:
    """Weights indexed by subset size ``0..n-1``."""
    return np.array([shapley_weight(k, n) for k in range(n)])
