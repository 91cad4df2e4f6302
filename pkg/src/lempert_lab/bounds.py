"""One-sided estimates and their witnesses.

A Bound records which invariant it estimates through ``quantity`` and the
chain length ``m``:

    quantity "ell"   : ell^(m)   (m = 1 is the Lempert function, m = None means every m)
    quantity "l"     : l^(m)     (m = None is the Kobayashi distance k)
    quantity "kappa" : kappa^(m) (m = 1 is Kobayashi-Royden, m = None is the Busemann metric)
    quantity "S"     : Sibony metric

Since ell >= ell^(2) >= ... a lower bound valid for ell^(mL) and an upper
bound valid for ell^(mU) are comparable exactly when mU <= mL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domains import CPoint

CERTIFIED = "certified"
NUMERIC = "numeric"
NUMERIC_WEAK = "numeric-weak"
UPPER = "upper"
LOWER = "lower"

_INF = math.inf


def _m_key(m):
    return _INF if m is None else m


@dataclass(frozen=True)
class Bound:
    quantity: str
    value: float
    direction: str
    grade: str
    m: int | None = 1
    witness: object = None
    family: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.grade == CERTIFIED

    def label(self) -> str:
        if self.quantity == "S":
            return "S"
        if self.m == 1:
            return {"ell": "ell", "l": "l", "kappa": "kappa"}[self.quantity]
        if self.m is None:
            return {"ell": "ell^(inf)", "l": "k", "kappa": "kappa_hat"}[self.quantity]
        return f"{self.quantity}^({self.m})"

    def to_json(self) -> dict:
        w = self.witness
        wj = w.to_json() if hasattr(w, "to_json") else w
        return {"quantity": self.quantity, "label": self.label(), "m": self.m,
                "value": float(self.value), "direction": self.direction, "grade": self.grade,
                "family": self.family, "witness": wj, "details": _jsonable(self.details)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, CPoint):
        return x.to_json()
    if hasattr(x, "to_json"):
        return x.to_json()
    return x


def comparable(lower: Bound, upper: Bound) -> bool:
    """True when lower <= upper is a theorem (same invariant for some common m)."""
    if lower.direction != LOWER or upper.direction != UPPER:
        return False
    ql, qu = lower.quantity, upper.quantity
    if ql == "S":
        # the Sibony metric is dominated by every kappa^(m)
        return qu in ("S", "kappa")
    if ql != qu and not ({ql, qu} <= {"ell", "l"}):
        return False
    return _m_key(upper.m) <= _m_key(lower.m)


def to_scale(b: Bound, quantity: str) -> float:
    """Express an ell/l bound on the requested scale (l = artanh ell)."""
    if b.quantity == quantity:
        return b.value
    if b.quantity == "ell" and quantity == "l":
        return math.atanh(min(b.value, 1.0 - 1e-16))
    if b.quantity == "l" and quantity == "ell":
        return math.tanh(b.value)
    raise ValueError(f"cannot convert {b.quantity} to {quantity}")


def consistent(lower: Bound, upper: Bound, tol: float = 0.0) -> bool:
    """lower <= upper + tol for comparable bounds (vacuously true otherwise).

    For mixed ell/l comparisons the lower bound is moved to the upper's scale;
    m = 1 values agree on both scales, and for chains sum(artanh) >= artanh(sum).
    """
    if not comparable(lower, upper):
        return True
    if lower.quantity == upper.quantity:
        return lower.value <= upper.value + tol
    if lower.quantity == "ell" and upper.quantity == "l":
        return math.atanh(min(lower.value, 1 - 1e-16)) <= upper.value + tol or \
            lower.value <= upper.value + tol
    # lower on the l scale against an ell-scale upper: only valid for m = 1
    if upper.m == 1:
        return math.tanh(lower.value) <= upper.value + tol
    return True


@dataclass(frozen=True)
class DiscWitness:
    """A disc with phi(0) = z and phi(alpha) = w (or alpha phi'(0) = X)."""

    disc: object
    alpha: complex
    certificate: object
    interpolation_error: float = 0.0

    def to_json(self):
        a = complex(self.alpha)
        return {"disc": self.disc.to_json(), "alpha": [a.real, a.imag],
                "certificate": None if self.certificate is None else self.certificate.to_json(),
                "interpolation_error": self.interpolation_error}


@dataclass(frozen=True)
class Chain:
    points: tuple
    legs: tuple  # Bounds, one per leg

    @property
    def m(self) -> int:
        return len(self.legs)

    @property
    def aggregate_ell(self) -> float:
        return float(sum(b.value for b in self.legs))

    @property
    def aggregate_l(self) -> float:
        return float(sum(math.atanh(min(b.value, 1 - 1e-16)) for b in self.legs))

    @property
    def grade(self) -> str:
        if all(b.grade == CERTIFIED for b in self.legs):
            return CERTIFIED
        if any(b.grade == NUMERIC_WEAK for b in self.legs):
            return NUMERIC_WEAK
        return NUMERIC

    def reversed(self) -> "Chain":
        return Chain(tuple(reversed(self.points)), tuple(reversed(self.legs)))

    def to_json(self):
        return {"points": [p.to_json() for p in self.points],
                "legs": [b.to_json() for b in self.legs],
                "aggregate_ell": self.aggregate_ell, "aggregate_l": self.aggregate_l,
                "grade": self.grade}


@dataclass(frozen=True)
class Decomposition:
    vectors: tuple
    pieces: tuple  # kappa Bounds per vector

    def to_json(self):
        return {"vectors": [_jsonable(np.asarray(v)) for v in self.vectors],
                "pieces": [b.to_json() for b in self.pieces]}


@dataclass(frozen=True)
class PathSpec:
    nodes: tuple
    segment_costs: tuple
    segment_discs: tuple  # (center, radius) of the inscribed slice disc per segment
    integral: float

    def to_json(self):
        return {"nodes": [p.to_json() for p in self.nodes],
                "segment_costs": list(self.segment_costs),
                "segment_discs": [[[complex(c).real, complex(c).imag], r] for c, r in self.segment_discs],
                "integral": self.integral}
