"""Points of C^n and the model domains.

Every domain exposes a vectorized signed margin: the maximum over its defining
inequalities of (lhs - rhs).  A point is inside exactly when the margin is
strictly negative.  The G-variants all live in the unit polydisc and have the
origin as their distinguished boundary point, with inner normal (-1, 0, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize

from . import _kernels
from .errors import ArgumentError, CapabilityError, ConstructionError

__all__ = [
    "CPoint", "as_point", "Domain", "PolyDisc", "Ball", "GPlain", "GTilde", "GMinus",
    "GPsi", "Modulus", "Punctured", "QuadImage", "QuadraticForm", "QuadNormalization",
    "Membership", "BoundaryData", "contains", "boundary_data", "normal_point",
    "normalize_quadratic", "domain_to_json", "domain_from_json",
]


# --------------------------------------------------------------------------
# points


@dataclass(frozen=True, eq=False)
class CPoint:
    """Immutable point of C^n."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=complex).ravel()
        if arr.size < 1:
            raise ArgumentError("a point needs at least one coordinate")
        if not np.all(np.isfinite(arr)):
            raise ArgumentError("point coordinates must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    @classmethod
    def of(cls, *coords) -> "CPoint":
        return cls(np.array(coords, dtype=complex))

    @property
    def dim(self) -> int:
        return self.coords.size

    def __len__(self):
        return self.dim

    def __getitem__(self, i):
        return self.coords[i]

    def __iter__(self):
        return iter(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)

    def _other(self, other) -> np.ndarray:
        o = other.coords if isinstance(other, CPoint) else np.asarray(other, dtype=complex).ravel()
        if o.size != self.dim:
            raise ArgumentError(f"dimension mismatch: {self.dim} vs {o.size}")
        return o

    def __add__(self, other):
        return CPoint(self.coords + self._other(other))

    def __sub__(self, other):
        return CPoint(self.coords - self._other(other))

    def __mul__(self, s):
        return CPoint(self.coords * complex(s))

    __rmul__ = __mul__

    def __neg__(self):
        return CPoint(-self.coords)

    def __eq__(self, other):
        if not isinstance(other, CPoint):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash(tuple(self.coords.tolist()))

    def __repr__(self):
        inner = ", ".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in self.coords)
        return f"CPoint({inner})"

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))

    def to_json(self) -> list:
        return [[float(c.real), float(c.imag)] for c in self.coords]

    @classmethod
    def from_json(cls, data) -> "CPoint":
        return cls(np.array([complex(re, im) for re, im in data]))


def as_point(z, dim: int | None = None) -> CPoint:
    p = z if isinstance(z, CPoint) else CPoint(z)
    if dim is not None and p.dim != dim:
        raise ArgumentError(f"dimension mismatch: expected {dim}, got {p.dim}")
    return p


class Membership(NamedTuple):
    inside: bool
    margin: float


@dataclass(frozen=True)
class BoundaryData:
    gap: float
    nearest: CPoint
    inner_normal: np.ndarray
    grade: str  # "exact" | "converged" | "numeric"


# --------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class Domain:
    """Base class; subclasses implement ``margins`` on arrays of shape (N, n)."""

    variant: ClassVar[str] = "abstract"
    # True when a G-type defining inequality makes the origin a boundary point
    g_type: ClassVar[bool] = False

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def scale(self) -> float:
        return 1.0

    def margins(self, Z) -> np.ndarray:
        raise NotImplementedError

    def margin(self, z) -> float:
        z = as_point(z, self.dim)
        return float(self.margins(z.coords[None, :])[0])

    def _check(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=complex)
        if Z.ndim == 1:
            Z = Z[None, :]
        if Z.shape[1] != self.dim:
            raise ArgumentError(f"dimension mismatch: expected {self.dim}, got {Z.shape[1]}")
        return Z


def _check_dim(n, minimum=1):
    if int(n) != n or n < minimum:
        raise ArgumentError(f"dimension must be an integer >= {minimum}, got {n}")


@dataclass(frozen=True)
class PolyDisc(Domain):
    n: int = 2
    variant: ClassVar[str] = "PolyDisc"

    def __post_init__(self):
        _check_dim(self.n)

    @property
    def dim(self):
        return self.n

    def margins(self, Z):
        Z = self._check(Z)
        return np.abs(Z).max(axis=1) - 1.0


@dataclass(frozen=True)
class Ball(Domain):
    n: int = 2
    variant: ClassVar[str] = "Ball"

    def __post_init__(self):
        _check_dim(self.n)

    @property
    def dim(self):
        return self.n

    def margins(self, Z):
        Z = self._check(Z)
        return np.linalg.norm(Z, axis=1) - 1.0


@dataclass(frozen=True)
class _GBase(Domain):
    mu: float = 2.0
    n: int = 2
    g_type: ClassVar[bool] = True
    _mode: ClassVar[int] = _kernels.PLAIN

    def __post_init__(self):
        _check_dim(self.n, 2)
        if not (0.0 < self.mu <= 2.0):
            raise ArgumentError(f"{self.variant} requires 0 < mu <= 2, got {self.mu}")

    @property
    def dim(self):
        return self.n

    def margins(self, Z):
        Z = self._check(Z)
        return _kernels.g_margins(Z[:, 0], Z[:, 1:], float(self.mu), self._mode)


@dataclass(frozen=True)
class GPlain(_GBase):
    """{z in D^n : Re z1 < sum_{j>=2} |z_j|^mu}."""

    variant: ClassVar[str] = "GPlain"


@dataclass(frozen=True)
class GTilde(_GBase):
    """{z in D^n : Re z1 < |Im z1|^mu + sum_{j>=2} |z_j|^mu}."""

    variant: ClassVar[str] = "GTilde"
    _mode: ClassVar[int] = _kernels.TILDE


@dataclass(frozen=True)
class GMinus(_GBase):
    """{z in D^2 : Re z1 < -|Im z1| + |z2|^mu}, mu >= 1."""

    variant: ClassVar[str] = "GMinus"
    _mode: ClassVar[int] = _kernels.MINUS

    def __post_init__(self):
        if self.n != 2:
            raise ArgumentError("GMinus is two-dimensional")
        if not (self.mu >= 1.0):
            raise ArgumentError(f"GMinus requires mu >= 1, got {self.mu}")


@dataclass(frozen=True)
class Modulus:
    """Modulus of continuity psi(x) = x * psi1(x) with psi1 increasing, psi1(0+) = 0.

    kind "power": psi(x) = c x^p with p > 1.
    kind "log":   psi1(x) = c / (1 + log(1 + 1/x)).
    """

    kind: str = "power"
    c: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in ("power", "log"):
            raise ArgumentError(f"unknown modulus kind {self.kind!r}")
        if self.c <= 0:
            raise ArgumentError("modulus constant must be positive")
        if self.kind == "power" and self.p <= 1:
            raise ArgumentError("power modulus needs p > 1")

    def psi1(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            return self.c * x ** (self.p - 1.0)
        with np.errstate(divide="ignore"):
            out = self.c / (1.0 + np.log1p(1.0 / np.where(x > 0, x, 1.0)))
        return np.where(x > 0, out, 0.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x * self.psi1(x)

    def solve_beta(self, eps: float, C: float) -> float:
        """Solve psi(C beta^2) = eps for beta > 0 (relative tolerance 1e-12)."""
        if eps <= 0:
            raise ArgumentError("eps must be positive")
        f = lambda b: float(self(C * b * b)) - eps
        hi = 1.0
        while f(hi) < 0:
            hi *= 2.0
            if hi > 1e12:
                raise ArgumentError("modulus never reaches eps")
        lo = hi
        while f(lo) > 0:
            lo *= 0.5
            if lo < 1e-300:
                raise ArgumentError("modulus solve underflow")
        if f(lo) == 0:
            return lo
        return brentq(f, lo, hi, xtol=1e-300, rtol=1e-12, maxiter=500)

    def to_json(self):
        return {"kind": self.kind, "c": self.c, "p": self.p}


@dataclass(frozen=True)
class GPsi(Domain):
    """{z in D^n : Re z1 < psi(|Im z1| + ||z'||)}."""

    modulus: Modulus = field(default_factory=Modulus)
    n: int = 2
    variant: ClassVar[str] = "GPsi"
    g_type: ClassVar[bool] = True

    def __post_init__(self):
        _check_dim(self.n, 2)

    @property
    def dim(self):
        return self.n

    def margins(self, Z):
        Z = self._check(Z)
        z1 = Z[:, 0]
        rest = np.linalg.norm(Z[:, 1:], axis=1)
        rhs = self.modulus(np.abs(z1.imag) + rest)
        return np.maximum(np.abs(Z).max(axis=1) - 1.0, z1.real - rhs)


@dataclass(frozen=True, eq=False)
class Punctured(Domain):
    """A base domain with finitely many points removed (demonstration grade only)."""

    base: Domain = field(default_factory=lambda: Ball(2))
    excluded: tuple = ()
    variant: ClassVar[str] = "Punctured"
    demonstration_grade: ClassVar[bool] = True

    def __post_init__(self):
        pts = tuple(as_point(p, self.base.dim) for p in self.excluded)
        object.__setattr__(self, "excluded", pts)

    @property
    def dim(self):
        return self.base.dim

    @property
    def g_type(self):
        return self.base.g_type

    def margins(self, Z):
        Z = self._check(Z)
        m = self.base.margins(Z)
        for p in self.excluded:
            hit = np.all(Z == p.coords[None, :], axis=1)
            m = np.where(hit, np.maximum(m, 0.0), m)
        return m


# --------------------------------------------------------------------------
# quadratic normalization


@dataclass(frozen=True)
class QuadraticForm:
    """q = Re(a11 z1^2) + b11|z1|^2 + Re(c z1 z2) + Re(d z1 conj(z2)) + Re(a22 z2^2) + b22|z2|^2."""

    a11: complex = 0j
    b11: float = 0.0
    c: complex = 0j
    d: complex = 0j
    a22: complex = 0j
    b22: float = -1.0

    def __call__(self, Z):
        Z = np.asarray(Z, dtype=complex).reshape(-1, 2)
        z1, z2 = Z[:, 0], Z[:, 1]
        return (np.real(self.a11 * z1**2) + self.b11 * np.abs(z1) ** 2
                + np.real(self.c * z1 * z2) + np.real(self.d * z1 * np.conj(z2))
                + np.real(self.a22 * z2**2) + self.b22 * np.abs(z2) ** 2)

    def to_json(self):
        cx = lambda v: [float(complex(v).real), float(complex(v).imag)]
        return {"a11": cx(self.a11), "b11": float(self.b11), "c": cx(self.c), "d": cx(self.d),
                "a22": cx(self.a22), "b22": float(self.b22)}

    @classmethod
    def from_json(cls, data):
        cx = lambda v: complex(v[0], v[1])
        return cls(cx(data["a11"]), data["b11"], cx(data["c"]), cx(data["d"]),
                   cx(data["a22"]), data["b22"])


@dataclass(frozen=True)
class QuadNormalization:
    form: QuadraticForm
    alpha1: float
    alpha2: complex
    C1: float
    C2: float
    C3: float
    radius: float
    samples: int = 0
    worst_margin: float = float("nan")  # max of Re z1 + q over the checked samples

    def to_original(self, W) -> np.ndarray:
        """(w1, w2) -> (w1 + alpha1 w1^2 - alpha2 w2^2, w2)."""
        W = np.asarray(W, dtype=complex).reshape(-1, 2)
        w1, w2 = W[:, 0], W[:, 1]
        return np.stack([w1 + self.alpha1 * w1**2 - self.alpha2 * w2**2, w2], axis=1)

    def to_normalized(self, Z) -> np.ndarray:
        """Inverse of ``to_original`` on the branch through the origin."""
        Z = np.asarray(Z, dtype=complex).reshape(-1, 2)
        s = Z[:, 0] + self.alpha2 * Z[:, 1] ** 2
        a = self.alpha1
        w1 = 2.0 * s / (1.0 + np.sqrt(1.0 + 4.0 * a * s))  # rationalized principal root
        return np.stack([w1, Z[:, 1]], axis=1)

    def to_json(self):
        return {"form": self.form.to_json(), "alpha1": self.alpha1,
                "alpha2": [self.alpha2.real, self.alpha2.imag], "C1": self.C1, "C2": self.C2,
                "C3": self.C3, "radius": self.radius, "samples": self.samples,
                "worst_margin": self.worst_margin}

    @classmethod
    def from_json(cls, data):
        return cls(QuadraticForm.from_json(data["form"]), data["alpha1"],
                   complex(*data["alpha2"]), data["C1"], data["C2"], data["C3"], data["radius"],
                   data.get("samples", 0), data.get("worst_margin", float("nan")))


def _ball_samples(rng, count, r):
    g = rng.standard_normal((count, 4))
    g /= np.linalg.norm(g, axis=1)[:, None]
    g *= r * rng.uniform(size=(count, 1)) ** 0.25
    return g[:, :2] + 1j * g[:, 2:]


def _model_samples(rng, count, r):
    """Points of {Re w1 < |w2|^2/4, ||w|| < r}, half of them on the curved face."""
    W = _ball_samples(rng, 4 * count, r)
    W = W[W[:, 0].real < 0.25 * np.abs(W[:, 1]) ** 2][: count // 2]
    F = _ball_samples(rng, count - W.shape[0], r)
    F[:, 0] = 0.25 * np.abs(F[:, 1]) ** 2 + 1j * F[:, 0].imag
    F = F[(np.linalg.norm(F, axis=1) < r) & (np.abs(F[:, 1]) > 0)]
    return np.concatenate([W, F])


def normalize_quadratic(form: QuadraticForm, samples: int = 100_000, seed: int = 0,
                        max_halvings: int = 20) -> QuadNormalization:
    """Build the quadratic change of coordinates and a sampled validity radius.

    The returned radius r satisfies, on every sample: the image of
    {Re w1 < |w2|^2/4, ||w|| < r} under ``to_original`` lies in {Re z1 + q < 0},
    and ``to_normalized`` inverts ``to_original`` (sampled injectivity).
    """
    if abs(form.b22 + 1.0) > 1e-14:
        raise ArgumentError("the |z2|^2 coefficient of q must be -1")
    C1 = max(abs(form.a11) + form.b11, 0.0)
    C2 = abs(form.c) + abs(form.d)
    alpha1 = C1 + 0.5 * C2**2 + 1.0
    C3 = C1 + 0.5 * C2**2 + alpha1 + 1.0
    alpha2 = complex(form.a22)
    rng = np.random.default_rng(seed)
    r = 0.5
    while r >= 1.0 / (2.0 * alpha1):
        r *= 0.5
    base = QuadNormalization(form, alpha1, alpha2, C1, C2, C3, r)
    for _ in range(max_halvings):
        cand = QuadNormalization(form, alpha1, alpha2, C1, C2, C3, r)
        W = _model_samples(rng, samples, r)
        Z = cand.to_original(W)
        vals = Z[:, 0].real + form(Z)
        back = cand.to_normalized(Z)
        ok_inv = np.max(np.abs(back - W)) <= 1e-9 * max(r, 1.0)
        if vals.max() < 0 and ok_inv:
            return QuadNormalization(form, alpha1, alpha2, C1, C2, C3, r, W.shape[0],
                                     float(vals.max()))
        r *= 0.5
    raise ConstructionError("no radius passed sampled verification", witness=base)


@dataclass(frozen=True)
class QuadImage(Domain):
    """Image of {Re w1 < |w2|^2/4, ||w|| < radius} under the normalization map."""

    quad: QuadNormalization = None
    radius: float | None = None
    variant: ClassVar[str] = "QuadImage"
    g_type: ClassVar[bool] = True

    def __post_init__(self):
        if self.quad is None:
            raise ArgumentError("QuadImage needs a QuadNormalization")
        if self.radius is None:
            object.__setattr__(self, "radius", self.quad.radius)
        if not (0 < self.radius <= self.quad.radius):
            raise ArgumentError("radius must lie in (0, verified radius]")

    @property
    def dim(self):
        return 2

    @property
    def scale(self):
        return self.radius

    def margins(self, Z):
        Z = self._check(Z)
        W = self.quad.to_normalized(Z)
        return np.maximum(W[:, 0].real - 0.25 * np.abs(W[:, 1]) ** 2,
                          np.linalg.norm(W, axis=1) - self.radius)


# --------------------------------------------------------------------------
# operations


def contains(domain: Domain, z) -> Membership:
    """Membership flag and signed margin (negative inside)."""
    m = domain.margin(as_point(z, domain.dim))
    return Membership(bool(m < 0.0), m)


def normal_point(domain: Domain, t: float) -> CPoint:
    """p + t n_p: (-t, 0, ...) for G-variants, (1 - t, 0, ...) for polydisc and ball."""
    if not (0.0 < t < 1.0):
        raise ArgumentError(f"t must lie in (0, 1), got {t}")
    z = np.zeros(domain.dim, dtype=complex)
    if isinstance(domain, (PolyDisc, Ball)):
        z[0] = 1.0 - t
    elif domain.g_type:
        z[0] = -t
    else:
        raise CapabilityError(f"{domain.variant} has no distinguished boundary point")
    return CPoint(z)


def _nearest_closed_form(domain, z):
    c = z.coords
    if isinstance(domain, PolyDisc):
        j = int(np.argmax(np.abs(c)))
        gap = 1.0 - abs(c[j])
        u = c[j] / abs(c[j]) if abs(c[j]) > 0 else 1.0
        nearest = c.copy()
        nearest[j] = u
    else:
        r = np.linalg.norm(c)
        gap = 1.0 - r
        nearest = c / r if r > 0 else np.eye(domain.dim, dtype=complex)[0]
    return gap, nearest


def _g_boundary_point(domain, x):
    """Boundary parametrization: (y, w') -> (h + i y, w') with Re w1 = h on the face."""
    n = domain.dim
    y = x[0]
    wr = x[1:n] + 1j * x[n:]
    s = np.sum(np.abs(wr) ** domain.mu)
    if isinstance(domain, GTilde):
        h = abs(y) ** domain.mu + s
    elif isinstance(domain, GMinus):
        h = -abs(y) + s
    else:
        h = s
    return np.concatenate([[h + 1j * y], wr])


def _nearest_g(domain, z, rng, starts):
    c = z.coords
    n = domain.dim
    obj = lambda x: float(np.sum(np.abs(_g_boundary_point(domain, x) - c) ** 2))
    seeds = [np.concatenate([[c[0].imag], c[1:].real, c[1:].imag]), np.zeros(2 * n - 1)]
    for _ in range(starts):
        seeds.append(seeds[0] + 0.1 * rng.standard_normal(2 * n - 1))
    best = None
    for x0 in seeds:
        r = minimize(obj, x0, method="Nelder-Mead",
                     options=dict(xatol=1e-13, fatol=1e-28, maxiter=20000, maxfev=40000))
        r = minimize(obj, r.x, method="Powell", options=dict(xtol=1e-13, ftol=1e-28))
        if best is None or r.fun < best.fun:
            best = r
    w = _g_boundary_point(domain, best.x)
    gap = float(np.sqrt(best.fun))
    # faces of the ambient polydisc
    faces = [1.0 - abs(v) for v in c]
    j = int(np.argmin(faces))
    if faces[j] < gap:
        gap = faces[j]
        w = c.copy()
        w[j] = c[j] / abs(c[j]) if abs(c[j]) > 0 else 1.0
    return gap, w


def boundary_data(domain: Domain, z, neighborhood: float = 0.5, seed: int = 0,
                  starts: int = 4) -> BoundaryData:
    """Euclidean distance to the complement, the nearest boundary point and the inner normal.

    Closed forms for the polydisc and the ball.  For the G-variants the distance
    is minimized over a parametrization of the curved face (multi-start); the
    result is graded "converged" for GPlain/GTilde with mu >= 1 and ||z|| within
    ``neighborhood`` (where the complement is locally convex), else "numeric".
    """
    z = as_point(z, domain.dim)
    if not contains(domain, z).inside:
        raise ArgumentError("point is not in the domain")
    if isinstance(domain, (PolyDisc, Ball)):
        gap, w = _nearest_closed_form(domain, z)
        grade = "exact"
    elif isinstance(domain, (GPlain, GTilde, GMinus)):
        gap, w = _nearest_g(domain, z, np.random.default_rng(seed), starts)
        convex = isinstance(domain, (GPlain, GTilde)) and domain.mu >= 1.0
        grade = "converged" if convex and z.norm() <= neighborhood else "numeric"
    else:
        raise CapabilityError(f"nearest-point queries are not available for {domain.variant}")
    nu = (z.coords - w) / gap
    nu = nu / np.linalg.norm(nu)
    return BoundaryData(float(gap), CPoint(w), nu, grade)


# --------------------------------------------------------------------------
# serialization

_G_CLASSES = {"GPlain": GPlain, "GTilde": GTilde, "GMinus": GMinus}


def domain_to_json(domain: Domain) -> dict:
    out = {"variant": domain.variant, "dim": domain.dim}
    if isinstance(domain, _GBase):
        out["mu"] = float(domain.mu)
    elif isinstance(domain, GPsi):
        out["modulus"] = domain.modulus.to_json()
    elif isinstance(domain, Punctured):
        out["base"] = domain_to_json(domain.base)
        out["excluded"] = [p.to_json() for p in domain.excluded]
    elif isinstance(domain, QuadImage):
        out["normalization"] = domain.quad.to_json()
        out["radius"] = domain.radius
    return out


def domain_from_json(data: dict) -> Domain:
    try:
        v = data["variant"]
        if v == "PolyDisc":
            return PolyDisc(int(data["dim"]))
        if v == "Ball":
            return Ball(int(data["dim"]))
        if v in _G_CLASSES:
            if v == "GMinus":
                return GMinus(float(data["mu"]))
            return _G_CLASSES[v](float(data["mu"]), int(data.get("dim", 2)))
        if v == "GPsi":
            return GPsi(Modulus(**data.get("modulus", {})), int(data.get("dim", 2)))
        if v == "Punctured":
            base = domain_from_json(data["base"])
            return Punctured(base, tuple(CPoint.from_json(p) for p in data.get("excluded", [])))
        if v == "QuadImage":
            return QuadImage(QuadNormalization.from_json(data["normalization"]), data.get("radius"))
    except (KeyError, TypeError) as exc:
        raise ArgumentError(f"malformed domain description: {exc}") from exc
    raise ArgumentError(f"unknown domain variant {data.get('variant')!r}")
