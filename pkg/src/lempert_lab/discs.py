"""Analytic discs, Blaschke factors, the closed-form families and containment checks.

Families (all centred at normal points (-t, 0, ...)):

    F1  (c, T(zeta))                     vertical disc, Re c < 0
    F2  (-e + e^{1/2} z, z)              square-root disc for mu = 2
    F3  (-e + e^{1-1/(2mu)} z, B_a(z))   first-degree disc, a = (e-d)/e^{1-1/(2mu)}
    F4  (-d - A z^2, B_a(z))             second-degree disc, A = a0 e^{1-1/mu}
    F5  (z, M_e(z) M_d(z))               small-mu Moebius product
    F6  ((1-e) z - e, z)                 two-step disc for mu <= 1
    F7  (-e + C e^{1-1/mu} z, z)         two-step disc for mu > 1
    F8  (-e + C e^{1-1/mu} z / sqrt 2, z)  disc into the G-minus model (C = 1 by default)

Analytic verifiers check the reduced real-variable inequality of each family
with exact case analysis; the grid verifier samples the signed margin on
concentric circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .domains import (Ball, CPoint, Domain, GMinus, GPlain, GPsi, GTilde, PolyDisc, Punctured,
                      as_point, domain_to_json)
from .errors import ArgumentError, CapabilityError, RangeError

FAMILIES = ("F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8")

SQRT2 = math.sqrt(2.0)


# --------------------------------------------------------------------------
# one-variable building blocks


def blaschke(alpha: float):
    """Return zeta -> zeta (zeta - alpha) / (1 - alpha zeta)."""
    alpha = float(alpha)
    if not (0.0 <= alpha < 1.0):
        raise ArgumentError(f"Blaschke parameter must lie in [0, 1), got {alpha}")
    return lambda zeta: blaschke_eval(alpha, zeta)


def blaschke_eval(alpha, zeta):
    zeta = np.asarray(zeta, dtype=complex)
    return zeta * (zeta - alpha) / (1.0 - alpha * zeta)


def blaschke_deriv(alpha, zeta):
    zeta = np.asarray(zeta, dtype=complex)
    return (2.0 * zeta - alpha - alpha * zeta**2) / (1.0 - alpha * zeta) ** 2


def mobius_shift(a, u):
    """Disc automorphism u -> (u + a) / (1 + conj(a) u), sending 0 to a."""
    return (u + a) / (1.0 + np.conj(a) * u)


def mobius_shift_deriv(a, u):
    return (1.0 - abs(a) ** 2) / (1.0 + np.conj(a) * u) ** 2


def _unit_check(zeta):
    z = np.asarray(zeta, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise ArgumentError("disc argument must satisfy |zeta| < 1")
    return z


# --------------------------------------------------------------------------
# disc representations


class AnalyticDisc:
    """Holomorphic map from the unit disc to C^n.

    Subclasses implement vectorized ``values``/``derivatives`` on 1-d arrays
    of disc points; ``eval``/``derivative`` add the |zeta| < 1 check.
    """

    kind = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def values(self, zeta) -> np.ndarray:
        raise NotImplementedError

    def derivatives(self, zeta) -> np.ndarray:
        raise NotImplementedError

    def eval(self, zeta) -> CPoint:
        z = _unit_check(zeta)
        return CPoint(self.values(np.atleast_1d(z))[0])

    def derivative(self, zeta) -> np.ndarray:
        z = _unit_check(zeta)
        return self.derivatives(np.atleast_1d(z))[0]

    def to_json(self) -> dict:
        raise NotImplementedError


def _pad(cols, n):
    N = cols[0].shape[0]
    out = np.zeros((N, n), dtype=complex)
    for j, c in enumerate(cols):
        out[:, j] = c
    return out


@dataclass(frozen=True, eq=False)
class ExplicitDisc(AnalyticDisc):
    """One of the closed-form families; ``params`` holds the full parameter record."""

    family: str
    params: dict = field(default_factory=dict)
    n: int = 2
    kind = "explicit"

    @property
    def dim(self):
        return self.n

    def __getitem__(self, key):
        return self.params[key]

    def values(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()
        p = self.params
        f = self.family
        if f == "F1":
            rest = [mobius_shift(a, b * z) for a, b in zip(p["centers"], p["multipliers"])]
            return _pad([np.full(z.shape, complex(p["c"]))] + rest, self.n)
        if f == "F2":
            e = p["eps"]
            return _pad([-e + math.sqrt(e) * z, z], self.n)
        if f == "F3":
            return _pad([-p["eps"] + p["slope"] * z, blaschke_eval(p["alpha"], z)], self.n)
        if f == "F4":
            return _pad([-p["delta"] - p["a"] * z**2, blaschke_eval(p["alpha"], z)], self.n)
        if f == "F5":
            e, d = p["eps"], p["delta"]
            return _pad([z, (z + e) / (1 + e * z) * (z + d) / (1 + d * z)], self.n)
        if f == "F6":
            e = p["eps"]
            return _pad([(1 - e) * z - e, z], self.n)
        if f in ("F7", "F8"):
            return _pad([-p["eps"] + p["slope"] * z, z], self.n)
        raise ArgumentError(f"unknown family {f}")

    def derivatives(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()
        p = self.params
        f = self.family
        one = np.ones(z.shape, dtype=complex)
        if f == "F1":
            rest = [b * mobius_shift_deriv(a, b * z) for a, b in zip(p["centers"], p["multipliers"])]
            return _pad([0 * one] + rest, self.n)
        if f == "F2":
            return _pad([math.sqrt(p["eps"]) * one, one], self.n)
        if f == "F3":
            return _pad([p["slope"] * one, blaschke_deriv(p["alpha"], z)], self.n)
        if f == "F4":
            return _pad([-2.0 * p["a"] * z, blaschke_deriv(p["alpha"], z)], self.n)
        if f == "F5":
            e, d = p["eps"], p["delta"]
            Me, Md = (z + e) / (1 + e * z), (z + d) / (1 + d * z)
            dMe, dMd = (1 - e * e) / (1 + e * z) ** 2, (1 - d * d) / (1 + d * z) ** 2
            return _pad([one, dMe * Md + Me * dMd], self.n)
        if f == "F6":
            return _pad([(1 - p["eps"]) * one, one], self.n)
        if f in ("F7", "F8"):
            return _pad([p["slope"] * one, one], self.n)
        raise ArgumentError(f"unknown family {f}")

    def to_json(self):
        def enc(v):
            if isinstance(v, complex):
                return [v.real, v.imag]
            if isinstance(v, (tuple, list)):
                return [enc(x) for x in v]
            return v
        return {"family": self.family, "dim": self.n,
                "params": {k: enc(v) for k, v in self.params.items()}}


@dataclass(frozen=True, eq=False)
class PolynomialDisc(AnalyticDisc):
    """Coordinates are polynomials; ``coeffs[j, k]`` multiplies zeta^k in coordinate j.

    With ``poles`` given, coordinate j is divided by (1 - poles[j] zeta), |poles[j]| < 1;
    zero poles (the default) give plain polynomials.
    """

    coeffs: np.ndarray
    poles: np.ndarray | None = None
    kind = "polynomial"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2:
            raise ArgumentError("coefficient table must be 2-d (coordinates x degree)")
        if not np.all(np.isfinite(c)):
            raise ArgumentError("coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        p = np.zeros(c.shape[0], dtype=complex) if self.poles is None else \
            np.array(self.poles, dtype=complex).ravel()
        if p.size != c.shape[0] or not np.all(np.abs(p) < 1):
            raise ArgumentError("need one pole parameter per coordinate with |pole| < 1")
        p.flags.writeable = False
        object.__setattr__(self, "poles", p)

    @property
    def dim(self):
        return self.coeffs.shape[0]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def rational(self) -> bool:
        return bool(np.any(self.poles != 0))

    def values(self, zeta):
        zeta = np.asarray(zeta, dtype=complex).ravel()
        v = _kernels.poly_eval(self.coeffs, zeta)
        if self.rational:
            v = v / (1.0 - zeta[:, None] * self.poles[None, :])
        return v

    def derivatives(self, zeta):
        zeta = np.asarray(zeta, dtype=complex).ravel()
        k = np.arange(1, self.coeffs.shape[1])
        dc = self.coeffs[:, 1:] * k[None, :]
        if dc.shape[1] == 0:
            dc = np.zeros((self.dim, 1), dtype=complex)
        d = _kernels.poly_eval(dc, zeta)
        if self.rational:
            den = 1.0 - zeta[:, None] * self.poles[None, :]
            d = (d * den + self.poles[None, :] * _kernels.poly_eval(self.coeffs, zeta)) / den**2
        return d

    def dilate(self, rho: float) -> "PolynomialDisc":
        """zeta -> phi(rho zeta)."""
        return PolynomialDisc(self.coeffs * rho ** np.arange(self.degree + 1)[None, :],
                              self.poles * rho)

    def to_json(self):
        out = {"poly": [[[float(c.real), float(c.imag)] for c in row] for row in self.coeffs]}
        if self.rational:
            out["poles"] = [[float(c.real), float(c.imag)] for c in self.poles]
        return out


@dataclass(frozen=True, eq=False)
class MobiusComposite(AnalyticDisc):
    """phi_j(zeta) = T_{a_j}(b_j zeta) with |a_j| < 1, |b_j| <= 1 (maps into the polydisc)."""

    centers: np.ndarray
    multipliers: np.ndarray
    kind = "mobius"

    def __post_init__(self):
        a = np.array(self.centers, dtype=complex).ravel()
        b = np.array(self.multipliers, dtype=complex).ravel()
        if a.shape != b.shape:
            raise ArgumentError("centers and multipliers must have equal length")
        if np.any(np.abs(a) >= 1) or np.any(np.abs(b) > 1):
            raise ArgumentError("need |a_j| < 1 and |b_j| <= 1")
        object.__setattr__(self, "centers", a)
        object.__setattr__(self, "multipliers", b)

    @property
    def dim(self):
        return self.centers.size

    def values(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()[:, None]
        return mobius_shift(self.centers[None, :], self.multipliers[None, :] * z)

    def derivatives(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()[:, None]
        b = self.multipliers[None, :]
        return b * mobius_shift_deriv(self.centers[None, :], b * z)

    def to_json(self):
        enc = lambda v: [[float(x.real), float(x.imag)] for x in v]
        return {"mobius": {"centers": enc(self.centers), "multipliers": enc(self.multipliers)}}


def ball_automorphism(a: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """The involutive ball automorphism exchanging 0 and a, applied to rows of Z."""
    a = np.asarray(a, dtype=complex)
    Z = np.atleast_2d(np.asarray(Z, dtype=complex))
    aa = float(np.vdot(a, a).real)
    inner = Z @ np.conj(a)  # <z, a>
    if aa == 0.0:
        return -Z
    P = inner[:, None] * a[None, :] / aa
    Q = Z - P
    s = math.sqrt(1.0 - aa)
    return (a[None, :] - P - s * Q) / (1.0 - inner)[:, None]


@dataclass(frozen=True, eq=False)
class BallGeodesic(AnalyticDisc):
    """zeta -> Phi_z(zeta u) for the involution Phi_z of the ball and a unit vector u."""

    base: np.ndarray
    direction: np.ndarray
    kind = "ball-geodesic"

    def __post_init__(self):
        z = np.array(self.base, dtype=complex).ravel()
        u = np.array(self.direction, dtype=complex).ravel()
        if np.linalg.norm(z) >= 1:
            raise ArgumentError("base point must lie in the ball")
        nu = np.linalg.norm(u)
        if nu == 0:
            raise ArgumentError("direction must be nonzero")
        object.__setattr__(self, "base", z)
        object.__setattr__(self, "direction", u / nu)

    @property
    def dim(self):
        return self.base.size

    def values(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()
        return ball_automorphism(self.base, z[:, None] * self.direction[None, :])

    def derivatives(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()
        h = 1e-6
        return (self.values(z + h) - self.values(z - h)) / (2 * h)

    def to_json(self):
        enc = lambda v: [[float(x.real), float(x.imag)] for x in v]
        return {"ball_geodesic": {"base": enc(self.base), "direction": enc(self.direction)}}


@dataclass(frozen=True, eq=False)
class Reparametrized(AnalyticDisc):
    """zeta -> inner((zeta + shift) / (1 + conj(shift) zeta))."""

    inner: AnalyticDisc
    shift: complex
    kind = "reparametrized"

    @property
    def dim(self):
        return self.inner.dim

    def values(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()
        return self.inner.values(mobius_shift(self.shift, z))

    def derivatives(self, zeta):
        z = np.asarray(zeta, dtype=complex).ravel()
        return self.inner.derivatives(mobius_shift(self.shift, z)) * \
            mobius_shift_deriv(self.shift, z)[:, None]

    def to_json(self):
        s = complex(self.shift)
        return {"reparam": {"shift": [s.real, s.imag], "inner": self.inner.to_json()}}


@dataclass(frozen=True, eq=False)
class Rotated(AnalyticDisc):
    """Coordinate j of the inner disc multiplied by the unimodular phases[j]."""

    inner: AnalyticDisc
    phases: tuple
    kind = "rotated"

    def __post_init__(self):
        ph = tuple(complex(x) for x in self.phases)
        if len(ph) != self.inner.dim or any(abs(abs(x) - 1) > 1e-12 for x in ph):
            raise ArgumentError("phases must be unimodular, one per coordinate")
        object.__setattr__(self, "phases", ph)

    @property
    def dim(self):
        return self.inner.dim

    def values(self, zeta):
        return self.inner.values(zeta) * np.array(self.phases)[None, :]

    def derivatives(self, zeta):
        return self.inner.derivatives(zeta) * np.array(self.phases)[None, :]

    def to_json(self):
        return {"rotated": {"phases": [[x.real, x.imag] for x in self.phases],
                            "inner": self.inner.to_json()}}


@dataclass(frozen=True, eq=False)
class ConstantDisc(AnalyticDisc):
    point: np.ndarray
    kind = "constant"

    @property
    def dim(self):
        return len(self.point)

    def values(self, zeta):
        z = np.asarray(zeta).ravel()
        return np.tile(np.asarray(self.point, dtype=complex), (z.size, 1))

    def derivatives(self, zeta):
        return np.zeros((np.asarray(zeta).size, self.dim), dtype=complex)

    def to_json(self):
        return {"constant": [[float(c.real), float(c.imag)] for c in np.asarray(self.point, complex)]}


def disc_from_json(data: dict) -> AnalyticDisc:
    dec = lambda v: complex(v[0], v[1]) if isinstance(v, list) else v
    if "family" in data:
        raw = data.get("params", {})
        p = {}
        for k, v in raw.items():
            if k in ("centers", "multipliers"):
                p[k] = tuple(dec(x) for x in v)
            elif k == "c":
                p[k] = dec(v)
            else:
                p[k] = v
        return ExplicitDisc(data["family"], p, int(data.get("dim", 2)))
    if "poly" in data:
        poles = data.get("poles")
        return PolynomialDisc(np.array([[complex(re, im) for re, im in row] for row in data["poly"]]),
                              None if poles is None else [complex(re, im) for re, im in poles])
    if "mobius" in data:
        m = data["mobius"]
        return MobiusComposite([dec(x) for x in m["centers"]], [dec(x) for x in m["multipliers"]])
    if "ball_geodesic" in data:
        g = data["ball_geodesic"]
        return BallGeodesic([dec(x) for x in g["base"]], [dec(x) for x in g["direction"]])
    if "reparam" in data:
        r = data["reparam"]
        return Reparametrized(disc_from_json(r["inner"]), dec(r["shift"]))
    if "rotated" in data:
        r = data["rotated"]
        return Rotated(disc_from_json(r["inner"]), tuple(dec(x) for x in r["phases"]))
    if "constant" in data:
        return ConstantDisc(np.array([dec(x) for x in data["constant"]]))
    raise ArgumentError("unrecognized disc description")


# --------------------------------------------------------------------------
# family constructors


def f7_design_constant(mu: float) -> float:
    """Largest C with F_mu(x_mu) >= eps / 2."""
    if mu <= 1:
        raise ArgumentError("F7 needs mu > 1")
    gap = mu ** (1.0 / (1.0 - mu)) - mu ** (mu / (1.0 - mu))
    return (0.5 / gap) ** ((mu - 1.0) / mu)


def f7_critical_constant(mu: float) -> float:
    """C at which the minimum of F_mu touches zero (the disc stops being contained)."""
    if mu == 1.0:
        return 1.0
    gap = mu ** (1.0 / (1.0 - mu)) - mu ** (mu / (1.0 - mu))
    return (1.0 / gap) ** ((mu - 1.0) / mu)


def _need(cond, msg):
    if not cond:
        raise RangeError(msg)


def paper_disc(family: str, n: int = 2, **params) -> ExplicitDisc:
    """Build a family disc, validating its parameter region and deriving constants."""
    if family not in FAMILIES:
        raise ArgumentError(f"unknown family {family!r}")
    if n < 2:
        raise ArgumentError("family discs need n >= 2")
    p = dict(params)
    if family == "F1":
        c = complex(p.get("c", 0))
        centers = tuple(complex(x) for x in p.get("centers", (0j,) * (n - 1)))
        mult = p.get("multipliers")
        if mult is None:
            mult = (1 + 0j,) + (0j,) * (n - 2)
        mult = tuple(complex(x) for x in mult)
        _need(len(centers) == n - 1 and len(mult) == n - 1, "F1 needs n-1 centers and multipliers")
        _need(abs(c) < 1, "F1 needs |c| < 1")
        _need(all(abs(a) < 1 for a in centers) and all(abs(b) <= 1 for b in mult),
              "F1 needs |center| < 1 and |multiplier| <= 1")
        return ExplicitDisc("F1", {"c": c, "centers": centers, "multipliers": mult}, n)
    eps = float(p.get("eps", 0.0))
    _need(0 < eps < 1, "eps must lie in (0, 1)")
    if family == "F2":
        _need(eps + math.sqrt(eps) < 1, "F2 needs eps + sqrt(eps) < 1")
        return ExplicitDisc("F2", {"eps": eps, "slope": math.sqrt(eps)}, n)
    if family == "F3":
        mu, delta = float(p["mu"]), float(p["delta"])
        _need(0.5 < mu <= 2, "F3 needs 1/2 < mu <= 2")
        _need(0 < delta <= eps, "F3 needs 0 < delta <= eps")
        if mu > 1:
            _need(delta > (1 - 1 / (2 * mu)) * eps,
                  "F3 with mu > 1 needs delta > (1 - 1/(2 mu)) eps (first-degree case)")
        slope = eps ** (1 - 1 / (2 * mu))
        alpha = (eps - delta) / slope
        _need(alpha < 1, "F3 needs alpha < 1")
        _need(eps + slope < 1, "F3 needs eps + eps^(1-1/(2mu)) < 1")
        return ExplicitDisc("F3", {"mu": mu, "eps": eps, "delta": delta, "slope": slope,
                                   "alpha": alpha}, n)
    if family == "F4":
        mu, delta = float(p["mu"]), float(p["delta"])
        _need(1 < mu <= 2, "F4 needs 1 < mu <= 2")
        _need(0 < delta <= (1 - 1 / (2 * mu)) * eps,
              "F4 needs 0 < delta <= (1 - 1/(2 mu)) eps (second-degree case)")
        a0 = p.get("a0")
        a0 = f4_default_a0(mu) if a0 is None else float(a0)
        _need(a0 > 0, "F4 needs a0 > 0")
        nu = math.ceil(mu)
        a = a0 * eps ** (1 - nu / (2 * mu))
        alpha = ((eps - delta) / a) ** (1.0 / nu)
        _need(alpha < 1, "F4 needs alpha < 1 (eps too large for a0)")
        _need(delta + a < 1, "F4 needs delta + a < 1")
        return ExplicitDisc("F4", {"mu": mu, "eps": eps, "delta": delta, "a0": a0, "nu": nu,
                                   "a": a, "alpha": alpha}, n)
    if family == "F5":
        delta = float(p["delta"])
        _need(0 < delta < 1, "F5 needs 0 < delta < 1")
        return ExplicitDisc("F5", {"eps": eps, "delta": delta}, n)
    if family == "F6":
        return ExplicitDisc("F6", {"eps": eps}, n)
    if family == "F7":
        mu = float(p["mu"])
        _need(1 < mu <= 2, "F7 needs 1 < mu <= 2")
        C = p.get("C")
        C = f7_design_constant(mu) if C is None else float(C)
        _need(0 < C < f7_critical_constant(mu), "F7 constant C outside (0, C_crit)")
        slope = C * eps ** (1 - 1 / mu)
        _need(eps + slope < 1, "F7 needs eps + C eps^(1-1/mu) < 1")
        return ExplicitDisc("F7", {"mu": mu, "eps": eps, "C": C, "slope": slope}, n)
    # F8
    mu = float(p["mu"])
    _need(mu >= 1, "F8 needs mu >= 1")
    _need(n == 2, "F8 lives in the two-dimensional G-minus model")
    C = float(p.get("C", 1.0))
    _need(0 < C < f7_critical_constant(mu) or C == 1.0, "F8 constant C outside (0, C_crit)")
    slope = C * eps ** (1 - 1 / mu) / SQRT2
    _need(eps + slope < 1, "F8 needs eps + C eps^(1-1/mu)/sqrt 2 < 1")
    return ExplicitDisc("F8", {"mu": mu, "eps": eps, "C": C, "slope": slope}, n)


# --------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class ContainmentCertificate:
    kind: str  # "analytic" | "grid"
    domain: dict
    disc: dict
    inequality: str | None = None
    samples: int = 0
    worst_margin: float | None = None  # max of the defining margin over samples (< 0 inside)
    radii: tuple = ()
    angles: int = 0
    tau: float = 0.0
    details: dict = field(default_factory=dict)
    ok: bool = True

    def to_json(self):
        return {"kind": self.kind, "domain": self.domain, "disc": self.disc,
                "inequality": self.inequality, "samples": self.samples,
                "worst_margin": self.worst_margin, "radii": list(self.radii),
                "angles": self.angles, "tau": self.tau, "details": self.details, "ok": True}


@dataclass(frozen=True)
class ContainmentFailure:
    mode: str
    reason: str
    witness_zeta: complex | None = None
    witness_point: CPoint | None = None
    worst_margin: float | None = None
    ok: bool = False

    def to_json(self):
        return {"mode": self.mode, "reason": self.reason,
                "witness_zeta": None if self.witness_zeta is None else
                [self.witness_zeta.real, self.witness_zeta.imag],
                "witness_point": None if self.witness_point is None else self.witness_point.to_json(),
                "worst_margin": self.worst_margin, "ok": False}


def default_radii() -> np.ndarray:
    """Boundary-approaching circles 1 - 2^-k plus interior circles 2^-k and j/32."""
    outer = 1.0 - 2.0 ** -np.arange(1, 21)
    inner = 2.0 ** -np.arange(1, 31)
    mid = np.arange(1, 32) / 32.0
    return np.unique(np.concatenate([inner, mid, outer]))


def grid_points(radii=None, angles: int = 4096) -> np.ndarray:
    r = default_radii() if radii is None else np.asarray(radii, dtype=float)
    th = 2 * np.pi * (np.arange(angles) + 0.5) / angles
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel()


def _grid_verify(disc, domain, radii, angles, tau, chunk=1 << 18):
    pts = grid_points(radii, angles)
    worst = -np.inf
    arg = None
    for s in range(0, pts.size, chunk):
        zz = pts[s:s + chunk]
        m = domain.margins(disc.values(zz))
        k = int(np.argmax(m))
        if m[k] > worst:
            worst, arg = float(m[k]), zz[k]
    return worst, arg, pts.size


def _avoidance(disc, domain):
    """Minimum distance from the disc image to the excluded points of a punctured domain."""
    out = np.inf
    for p in domain.excluded:
        if isinstance(disc, PolynomialDisc) and np.any(disc.coeffs[0, 1:] != 0):
            j = 0
            # zeros of N_j(zeta) - p_j (1 - c_j zeta)
            c = np.array(disc.coeffs[j], dtype=complex)
            c[0] -= p[j]
            if c.size < 2:
                c = np.append(c, 0)
            c[1] += p[j] * disc.poles[j]
            roots = np.roots(c[::-1]) if np.any(c[1:] != 0) else np.array([])
            roots = roots[np.abs(roots) < 1]
            if roots.size:
                d = np.linalg.norm(disc.values(roots) - p.coords[None, :], axis=1)
                out = min(out, float(d.min()))
            # off the preimage of the first coordinate the disc stays away from p
        else:
            pts = grid_points(None, 1024)
            out = min(out, float(np.linalg.norm(disc.values(pts) - p.coords[None, :], axis=1).min()))
    return out


def verify_containment(disc: AnalyticDisc, domain: Domain, mode: str = "analytic",
                       radii=None, angles: int = 4096, tau: float | None = None):
    """Certify disc(D) inside domain; returns a certificate or a failure report."""
    if disc.dim != domain.dim:
        raise ArgumentError(f"disc dimension {disc.dim} != domain dimension {domain.dim}")
    tau = 1e-12 * domain.scale if tau is None else float(tau)
    if mode == "analytic":
        return _analytic_verify(disc, domain)
    if mode != "grid":
        raise ArgumentError(f"unknown verification mode {mode!r}")
    r = default_radii() if radii is None else np.asarray(radii, dtype=float)
    worst, arg, count = _grid_verify(disc, domain, r, angles, tau)
    details = {}
    if isinstance(domain, Punctured):
        gap = _avoidance(disc, domain)
        details["excluded_distance"] = gap
        if not gap > 0:
            return ContainmentFailure("grid", "disc passes through an excluded point", None, None, worst)
    if not (worst <= -tau):
        wp = CPoint(disc.values(np.array([arg]))[0]) if arg is not None else None
        return ContainmentFailure("grid", f"margin {worst:.3e} exceeds -tau", complex(arg), wp, worst)
    return ContainmentCertificate("grid", domain_to_json(domain), disc.to_json(), None, count,
                                  worst, tuple(float(x) for x in r), angles, tau, details)


# --------------------------------------------------------------------------
# analytic verifiers


def _domain_mu(domain):
    return getattr(domain, "mu", None)


def _inherits(domain, mu_family, kinds):
    """Target is one of ``kinds`` with exponent <= the family's (containment is inherited)."""
    return isinstance(domain, kinds) and _domain_mu(domain) <= mu_family + 1e-15


def _cert(disc, domain, ineq, **details):
    return ContainmentCertificate("analytic", domain_to_json(domain), disc.to_json(), ineq,
                                  details=details)


def _fail(reason):
    return ContainmentFailure("analytic", reason)


def f_mu_minimum(mu: float, C: float, eps: float) -> tuple[float, float]:
    """Minimum over 0 < x <= 1 of F(x) = x^mu - C eps^(1-1/mu) x + eps, and its location."""
    if mu == 1.0:
        # F is affine: x (1 - C) + eps
        x = 1.0 if C > 1 else 0.0
        return x * (1 - C) + eps, x
    xm = (C / mu) ** (1.0 / (mu - 1.0)) * eps ** (1.0 / mu)
    x = min(xm, 1.0)
    return x**mu - C * eps ** (1 - 1 / mu) * x + eps, x


def _tau_case1_holds(ratio, mu):
    """tau <= r + (r + 1) tau^mu + tau^(2 mu) for all tau > 0 when 1/2 < mu <= 1 and r > 0.

    tau <= 1: (r + 1) tau^mu >= tau^mu >= tau;  tau >= 1: tau^(2 mu) >= tau.
    """
    return 0.5 < mu <= 1.0 and ratio > 0


def _tau_case21_holds(mu):
    """Case mu > 1, delta/eps > 1 - 1/(2 mu): derivative bound of the right side exceeds 1."""
    t0 = 1.0 - 1.0 / (2.0 * mu)
    deriv = 2 * mu * t0 ** (mu - 1) * (1 - 1 / (4 * mu) + t0**mu)
    return deriv > 1.0 and t0 ** mu >= 0.5 - 1e-15, deriv


def _f4_cells_ok(mu, delta, a, alpha, rl, rh, tl, th):
    """Interval check on cells [rl, rh] x [tl, th] of polar coordinates (theta in [pi/4, 3pi/4])."""
    # upper bound of Re phi1 = -delta - a r^2 cos(2 theta)
    c2 = np.where((tl <= np.pi / 2) & (th >= np.pi / 2), 1.0,
                  np.maximum(-np.cos(2 * tl), -np.cos(2 * th)))
    lhs = -delta + a * rh**2 * np.maximum(c2, 0.0)
    # lower bound of |B_alpha| = r m(r e^{i theta}, alpha); m increases with theta in [0, pi]
    c = np.cos(tl)
    rs = np.clip(alpha * c, rl, rh)
    num = np.maximum(rs**2 - 2 * alpha * c * rs + alpha**2, 0.0)
    den = np.maximum(1 - 2 * alpha * c * rl + alpha**2 * rl**2, 1 - 2 * alpha * c * rh + alpha**2 * rh**2)
    rhs = rl**mu * (num / den) ** (mu / 2.0)
    slack = 1e-13 * (delta + a)
    return lhs + slack < rhs * (1 - 1e-12)


def f4_interval_certify(mu, eps, delta, a, alpha, max_depth=24, max_cells=2_000_000):
    """Certify -delta - a Re(zeta^2) < |B_alpha(zeta)|^mu on the unit disc by subdivision.

    Only the sector |Im zeta| > |Re zeta| needs work (elsewhere Re phi1 <= -delta);
    by conjugation symmetry theta in [pi/4, 3pi/4] suffices.  Returns (ok, cells).
    """
    rl = np.linspace(0, 1, 65)[:-1]
    rh = rl + 1 / 64
    tl_ = np.linspace(np.pi / 4, 3 * np.pi / 4, 9)[:-1]
    th_ = tl_ + np.pi / 16
    RL, TL = np.meshgrid(rl, tl_, indexing="ij")
    RH, TH = np.meshgrid(rh, th_, indexing="ij")
    cells = [RL.ravel(), RH.ravel(), TL.ravel(), TH.ravel()]
    total = 0
    for _ in range(max_depth):
        ok = _f4_cells_ok(mu, delta, a, alpha, *cells)
        total += ok.size
        bad = ~ok
        if not bad.any():
            return True, total
        if total > max_cells:
            return False, total
        r0, r1, t0, t1 = (x[bad] for x in cells)
        rm, tm = 0.5 * (r0 + r1), 0.5 * (t0 + t1)
        cells = [np.concatenate(v) for v in (
            (r0, rm, r0, rm), (rm, r1, rm, r1), (t0, t0, tm, tm), (tm, tm, t1, t1))]
    return False, total


def _f4_params_ok(mu, eps, delta, a0):
    nu = math.ceil(mu)
    a = a0 * eps ** (1 - nu / (2 * mu))
    alpha = ((eps - delta) / a) ** (1.0 / nu)
    if alpha >= 1 or delta + a >= 1:
        return False
    return f4_interval_certify(mu, eps, delta, a, alpha)[0]


@lru_cache(maxsize=None)
def f4_default_a0(mu: float) -> float:
    """Largest power of two a0 for which F4 certifies over an eps/delta sweep (cached per mu)."""
    if not (1 < mu <= 2):
        raise ArgumentError("F4 needs 1 < mu <= 2")
    eps_grid = np.logspace(-8, -2, 4)
    ratios = (1e-3, 0.25, 0.5, 1 - 1 / (2 * mu))
    a0 = 1.0
    for _ in range(60):
        if all(_f4_params_ok(mu, e, r * e, a0) for e in eps_grid for r in ratios):
            return a0
        a0 *= 0.5
    raise RangeError(f"no admissible a0 found for mu={mu}")


def _analytic_verify(disc, domain):
    G = (GPlain, GTilde)
    if isinstance(disc, ConstantDisc):
        m = domain.margin(disc.point)
        return _cert(disc, domain, "constant point inside") if m < 0 else _fail("point outside")
    if isinstance(disc, MobiusComposite):
        if isinstance(domain, PolyDisc):
            return _cert(disc, domain, "Moebius coordinates map the disc into itself")
        raise CapabilityError("Moebius composites are certified only for the polydisc")
    if isinstance(disc, BallGeodesic):
        if isinstance(domain, Ball):
            return _cert(disc, domain, "automorphic image of a complex line through the ball")
        raise CapabilityError("ball geodesics are certified only for the ball")
    if isinstance(disc, Rotated):
        symmetric = isinstance(domain, (PolyDisc, Ball)) or (
            isinstance(domain, (GPlain, GTilde, GMinus, GPsi)) and abs(disc.phases[0] - 1) <= 1e-15)
        if not symmetric:
            raise CapabilityError("this rotation is not a symmetry of the domain")
        inner = _analytic_verify(disc.inner, domain)
        if not inner.ok:
            return inner
        return _cert(disc, domain, f"rotation of z' (a symmetry) applied to: {inner.inequality}")
    if isinstance(disc, Reparametrized):
        inner = _analytic_verify(disc.inner, domain)
        if not inner.ok:
            return inner
        return _cert(disc, domain, f"reparametrization of: {inner.inequality}")
    if not isinstance(disc, ExplicitDisc):
        raise CapabilityError(f"no analytic verifier for {disc.kind} discs")
    f, p = disc.family, disc.params
    if f == "F1":
        c = complex(p["c"])
        if isinstance(domain, (GPlain, GTilde, GPsi)):
            ok = c.real < 0 and abs(c) < 1
            return _cert(disc, domain, "Re c < 0 <= right side") if ok else _fail("Re c >= 0")
        if isinstance(domain, GMinus):
            ok = c.real < -abs(c.imag) and abs(c) < 1
            return _cert(disc, domain, "Re c < -|Im c|") if ok else _fail("Re c >= -|Im c|")
        if isinstance(domain, PolyDisc):
            return _cert(disc, domain, "|c| < 1") if abs(c) < 1 else _fail("|c| >= 1")
        raise CapabilityError(f"F1 has no verifier for {domain.variant}")
    if f == "F2":
        if not _inherits(domain, 2.0, G):
            raise CapabilityError(f"F2 has no verifier for {domain.variant}")
        e = p["eps"]
        # |zeta|^2 - Re phi1 = (x - sqrt(e)/2)^2 + y^2 + 3e/4 > 0
        ok = e > 0 and e + math.sqrt(e) < 1
        return _cert(disc, domain, "(x - sqrt(eps)/2)^2 + 3 eps/4 > 0") if ok else _fail("eps range")
    if f == "F3":
        mu, e, d = p["mu"], p["eps"], p["delta"]
        if not _inherits(domain, mu, G):
            raise CapabilityError(f"F3 has no verifier for {domain.variant}")
        if not (p["alpha"] < 1 and e + p["slope"] < 1):
            return _fail("polydisc bound fails")
        if mu <= 1:
            ok = _tau_case1_holds(d / e, mu)
            return _cert(disc, domain, "tau <= d/e + (d/e + 1) tau^mu + tau^(2mu)") if ok \
                else _fail("first-degree inequality")
        ok, deriv = _tau_case21_holds(mu)
        ok = ok and d > (1 - 1 / (2 * mu)) * e
        return _cert(disc, domain, "tau <= (1 + tau^mu)(1 - 1/(2mu) + tau^mu)",
                     derivative_bound=deriv) if ok else _fail("first-degree case needs larger delta")
    if f == "F4":
        mu = p["mu"]
        if not _inherits(domain, mu, G):
            raise CapabilityError(f"F4 has no verifier for {domain.variant}")
        ok, cells = f4_interval_certify(mu, p["eps"], p["delta"], p["a"], p["alpha"])
        if ok and p["delta"] + p["a"] < 1 and p["alpha"] < 1:
            return _cert(disc, domain, "interval subdivision of -d - a Re z^2 < |B_a(z)|^mu "
                         "on the sector |Im z| > |Re z|", cells=cells)
        return _fail("second-degree interval check failed")
    if f == "F5":
        if not _inherits(domain, 0.5, G):
            raise CapabilityError(f"F5 has no verifier for {domain.variant}")
        e, d = p["eps"], p["delta"]
        # (1 - x^2)(d e (x^2 + 1) + (d + e) x) > 0 on [0, 1): every factor is positive
        ok = 0 < e < 1 and 0 < d < 1
        return _cert(disc, domain, "(1 - x^2)(d e (x^2 + 1) + (d + e) x) > 0") if ok \
            else _fail("parameters outside (0, 1)")
    if f == "F6":
        if not _inherits(domain, 1.0, G):
            raise CapabilityError(f"F6 has no verifier for {domain.variant}")
        e = p["eps"]
        ok = 0 < e < 1
        return _cert(disc, domain, "(1 - e) x - e < |zeta| <= |zeta|^mu") if ok else _fail("eps")
    if f == "F7":
        mu = p["mu"]
        if not _inherits(domain, mu, G):
            raise CapabilityError(f"F7 has no verifier for {domain.variant}")
        val, x = f_mu_minimum(mu, p["C"], p["eps"])
        ok = val > 0 and p["eps"] + p["slope"] < 1
        return _cert(disc, domain, "F_mu(x_mu) > 0 at the critical point", minimum=val, at=x) \
            if ok else _fail(f"F_mu minimum {val:.3e} <= 0")
    if f == "F8":
        mu = p["mu"]
        if not (isinstance(domain, GMinus) and domain.mu <= mu + 1e-15):
            raise CapabilityError(f"F8 has no verifier for {domain.variant}")
        # C e^(1-1/mu) t / sqrt 2 < e + (t/sqrt 2)^mu: F_mu with the same C in s = t / sqrt 2
        val, s = f_mu_minimum(mu, p.get("C", 1.0), p["eps"])
        ok = val > 0 and p["eps"] + p["slope"] < 1
        return _cert(disc, domain, "C e^(1-1/mu) t 2^(-1/2) < e + t^mu 2^(-mu/2)", minimum=val) \
            if ok else _fail("minus-model inequality")
    raise CapabilityError(f"no verifier for family {f}")


def has_analytic_verifier(disc: AnalyticDisc, domain: Domain) -> bool:
    try:
        _analytic_verify(disc, domain)
        return True
    except CapabilityError:
        return False


def interpolation_error(disc: AnalyticDisc, z, alpha: complex, w) -> float:
    """max(||phi(0) - z||, ||phi(alpha) - w||)."""
    vals = disc.values(np.array([0.0, alpha], dtype=complex))
    z = as_point(z).coords
    w = as_point(w).coords
    return float(max(np.linalg.norm(vals[0] - z), np.linalg.norm(vals[1] - w)))
