"""Lower bounds for the Sibony metric of G_mu at the normal points p_eps.

The main test function glues two logarithmically plurisubharmonic pieces,

    inner:  log(f(z1) + |z'|^2),   f(zeta) = eps^(2/mu) |(zeta + eps)/(zeta - eps)|^2
    outer:  log(L |z'|^(2 + alpha))

along the collar (c1/2) eps^(1/mu) <= |z'| <= c1 eps^(1/mu), where the outer
piece dominates.  After subtracting L' the exponential is bounded by 1 and
vanishes at p_eps, and its Levi form at p_eps is computed in closed form.

Admissibility (log-plurisubharmonicity and the bound by 1) is checked by
sampling, so all bounds produced here are graded numeric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import LOWER, NUMERIC, Bound
from .domains import GPlain, as_point
from .errors import ArgumentError, ConstructionError, NumericError

__all__ = ["CandidateFunction", "LeviEvaluation", "sibony_candidate", "levi_form",
           "sibony_lower", "find_c1", "sample_g", "admissibility", "default_alpha",
           "CANDIDATES"]


@dataclass(frozen=True)
class LeviEvaluation:
    point: tuple
    direction: tuple
    value: float
    method: str  # "closed-form" | "finite-difference"


def _g(zeta, eps):
    return (zeta + eps) / (zeta - eps)


def _dg(zeta, eps):
    return -2.0 * eps / (zeta - eps) ** 2


@dataclass(frozen=True)
class CandidateFunction:
    mu: float
    eps: float
    alpha: float
    n: int
    c1: float
    c2: float
    c3: float
    L: float
    Lp: float

    @property
    def r_in(self):
        """Outer edge of the inner region, c1 eps^(1/mu)."""
        return self.c1 * self.eps ** (1.0 / self.mu)

    def f(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return self.eps ** (2.0 / self.mu) * np.abs(_g(zeta, self.eps)) ** 2

    def f_levi(self, zeta) -> np.ndarray:
        """d^2 f / dzeta dzeta-bar = eps^(2/mu) |g'(zeta)|^2 (g holomorphic)."""
        zeta = np.asarray(zeta, dtype=complex)
        return self.eps ** (2.0 / self.mu) * np.abs(_dg(zeta, self.eps)) ** 2

    def branches(self, Z):
        """(inner, outer) raw log-branches before the -L' shift; inner is nan outside its region."""
        Z = np.atleast_2d(np.asarray(Z, dtype=complex))
        r2 = np.sum(np.abs(Z[:, 1:]) ** 2, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            outer = math.log(self.L) + (1 + self.alpha / 2) * np.log(r2)
            in_region = np.sqrt(r2) <= self.r_in
            inner = np.where(in_region, np.log(self.f(Z[:, 0]) + r2), np.nan)
        return inner, outer

    def u(self, Z) -> np.ndarray:
        inner, outer = self.branches(Z)
        raw = np.where(np.isnan(inner), outer, np.fmax(inner, outer))
        return raw - self.Lp

    def __call__(self, Z) -> np.ndarray:
        return np.exp(self.u(Z))

    def levi_at_p(self, X) -> float:
        """Levi form of e^u at p_eps: e^(-L') (f''(-eps) |X1|^2 + |X'|^2), f'' = eps^(2/mu-2)/4."""
        X = np.asarray(X, dtype=complex).ravel()
        fpp = 0.25 * self.eps ** (2.0 / self.mu - 2.0)
        return math.exp(-self.Lp) * (fpp * abs(X[0]) ** 2 + float(np.sum(np.abs(X[1:]) ** 2)))

    def log_hessian(self, z) -> np.ndarray:
        """Complex Hessian of the active branch of u at z (closed form)."""
        z = np.asarray(z, dtype=complex).ravel()
        inner, outer = self.branches(z[None, :])
        n = self.n
        if not np.isnan(inner[0]) and inner[0] >= outer[0]:
            s = self.eps ** (1.0 / self.mu)
            h = np.concatenate([[s * _g(z[0], self.eps)], z[1:]])
            D = np.zeros((n, n), dtype=complex)  # D[i, k] = d h_k / d z_i
            D[0, 0] = s * _dg(z[0], self.eps)
            D[1:, 1:] = np.eye(n - 1)
            weight = 1.0
        else:
            h = z[1:].copy()
            D = np.zeros((n, n - 1), dtype=complex)
            D[1:, :] = np.eye(n - 1)
            weight = 1 + self.alpha / 2
        # (S A - b b^*) / S^2 rewritten by the Lagrange identity as a sum of
        # outer products of c_kl = h_k D[:, l] - h_l D[:, k]; avoids cancellation
        S = float(np.sum(np.abs(h) ** 2))
        H = np.zeros((n, n), dtype=complex)
        m = h.size
        for k in range(m):
            for l in range(k + 1, m):
                c = h[k] * D[:, l] - h[l] * D[:, k]
                H += np.outer(c, c.conj())
        return weight * H / S**2

    def to_json(self):
        return {k: getattr(self, k) for k in ("mu", "eps", "alpha", "n", "c1", "c2", "c3", "L", "Lp")}


# --------------------------------------------------------------------------
# construction


def sample_g(mu, n, count, rng, eps=None):
    """Points of G_mu: half uniform in the polydisc, half concentrated at scale eps^(1/mu) near p_eps."""
    dom = GPlain(mu, n)
    out = []
    need = count
    while need > 0:
        k = 4 * need
        Z = (rng.uniform(0, 1, (k, n)) ** 0.5) * np.exp(2j * np.pi * rng.uniform(size=(k, n)))
        if eps is not None:
            near = rng.uniform(size=k) < 0.5
            r = eps ** (1.0 / mu)
            W = (rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))) * r
            W[:, 0] = W[:, 0] * r ** (mu - 1) * 2 - eps
            Z = np.where(near[:, None], W, Z)
        Z = Z[dom.margins(Z) < 0]
        out.append(Z[:need])
        need -= len(out[-1])
    return np.concatenate(out)


def find_c1(mu, n, eps, samples=20_000, seed=0, iters=50):
    """Largest c with: |z'| <= c eps^(1/mu), z in G_mu  =>  Re z1 <= eps/2 (sampled).

    On G_mu the supremum of Re z1 at fixed z' is min(sum |z_j|^mu, 1), so the
    implication is checked on sampled directions of z' including the equal split.
    """
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(samples, n - 1)) + 1j * rng.normal(size=(samples, n - 1))
    U = np.concatenate([U, np.ones((1, n - 1))])
    U /= np.linalg.norm(U, axis=1)[:, None]
    t = rng.uniform(size=(U.shape[0], 1))
    M = np.abs(U)

    def ok(c):
        r = c * eps ** (1.0 / mu)
        sup_re = np.minimum(np.sum((np.vstack([M, M * t]) * r) ** mu, axis=1), 1.0)
        return bool(np.all(sup_re <= eps / 2))

    lo, hi = 0.0, 2.0
    while ok(hi):
        hi *= 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def default_alpha(eps: float) -> float:
    """Gluing exponent 1 / log(1/eps): keeps eps^(-alpha/mu) (hence L) bounded as eps -> 0."""
    return 1.0 / math.log(1.0 / eps)


def sibony_candidate(mu: float, eps: float, alpha: float | None = None, c1: float | None = None,
                     n: int = 2, samples: int = 10_000, seed: int = 0,
                     check: bool = True) -> CandidateFunction:
    """Build the glued test function and (optionally) run the sampled admissibility checks."""
    if not mu > 1:
        raise ArgumentError("the glued candidate needs mu > 1")
    if not mu <= 2:
        raise ArgumentError("G_mu is defined for mu <= 2")
    if not (0 < eps < 0.5):
        raise ArgumentError("need 0 < eps < 1/2")
    alpha = default_alpha(eps) if alpha is None else float(alpha)
    if not alpha > 0:
        raise ArgumentError("alpha must be positive")
    if c1 is None:
        c1 = find_c1(mu, n, eps, seed=seed)
    # on Re zeta <= eps/2 the ratio |zeta + eps| / |zeta - eps| is at most 3 (Apollonius circle)
    c2 = 9.0 + c1**2
    c3 = (c1 / 2) ** (2 + alpha)
    L = c2 / c3 * eps ** (-alpha / mu)
    sup_outer = L * (n - 1) ** (1 + alpha / 2)
    sup_inner = max(c2 * eps ** (2 / mu), L * (c1 * eps ** (1 / mu)) ** (2 + alpha))
    Lp = math.log(max(sup_outer, sup_inner))
    cand = CandidateFunction(mu, eps, alpha, n, c1, c2, c3, L, Lp)
    if check:
        report = admissibility(cand, samples=samples, seed=seed)
        if not report["ok"]:
            raise ConstructionError(f"candidate failed admissibility: {report['failed']}",
                                    witness=report)
    return cand


def admissibility(cand: CandidateFunction, samples: int = 10_000, seed: int = 0,
                  seam_tol: float = 1e-6) -> dict:
    """Sampled checks: u <= 0, f bounded by c2 on the inner region, outer dominance on
    the collar, and nonnegative complex Hessian of u away from branch seams."""
    rng = np.random.default_rng(seed)
    Z = sample_g(cand.mu, cand.n, samples, rng, eps=cand.eps)
    u = cand.u(Z)
    worst_u = float(np.nanmax(u))
    r = np.linalg.norm(Z[:, 1:], axis=1)
    inner, outer = cand.branches(Z)
    collar = (r >= cand.r_in / 2) & (r <= cand.r_in)
    # extra collar samples so the check is never vacuous
    k = max(samples // 10, 100)
    ang = np.exp(2j * np.pi * rng.uniform(size=(k, cand.n - 1)))
    rad = rng.uniform(cand.r_in / 2, cand.r_in, size=k)
    dirs = np.abs(rng.normal(size=(k, cand.n - 1))) + 1e-12
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    zr = rad[:, None] * dirs * ang
    sup_re = np.sum(np.abs(zr) ** cand.mu, axis=1)
    z1 = sup_re * rng.uniform(-1, 1, size=k) + 1j * rng.uniform(-1, 1, size=k) * 0.5
    Zc = np.concatenate([z1[:, None], zr], axis=1)
    Zc = Zc[GPlain(cand.mu, cand.n).margins(Zc) < 0]
    ic, oc = cand.branches(Zc)
    dom_gap = np.concatenate([(outer - inner)[collar], oc - ic])
    collar_ok = bool(np.all(dom_gap >= -1e-12)) if dom_gap.size else False
    region = r <= cand.r_in
    re_ok = bool(np.all(Z[region, 0].real <= cand.eps / 2))
    f_ok = bool(np.all(cand.f(Z[region, 0]) <= 9.0 * cand.eps ** (2 / cand.mu) * (1 + 1e-12)))
    # Hessian check away from the seam between the two branches
    seam = np.abs(np.where(np.isnan(inner), np.inf, inner - outer)) < seam_tol
    pts = Z[~seam & (r > 0)]
    # min eigenvalue relative to the spectral norm at each point: the Hessian scales like
    # |z - p|^-2, so near p an absolute threshold would sit below double precision
    # the tolerance is 1e-8, widened to 64 ulp of the spectral norm where that is larger
    eig_abs, eig_rel, psh_ok = [], [], True
    for z in pts:
        ev = np.linalg.eigvalsh(cand.log_hessian(z))
        top = np.abs(ev).max()
        eig_abs.append(ev.min())
        eig_rel.append(ev.min() / max(top, 1.0))
        psh_ok &= bool(ev.min() >= -max(1e-8, 64 * np.finfo(float).eps * top))
    min_eig = float(min(eig_abs)) if eig_abs else 0.0
    min_rel = float(min(eig_rel)) if eig_rel else 0.0
    checks = {"u_nonpositive": worst_u <= 0, "collar_dominance": collar_ok,
              "inner_region_re": re_ok, "f_bound": f_ok, "log_psh": psh_ok}
    return {"ok": all(checks.values()), "failed": [k for k, v in checks.items() if not v],
            "checks": checks, "worst_u": worst_u, "min_collar_gap": float(dom_gap.min()),
            "min_eigenvalue": min_eig, "min_relative_eigenvalue": min_rel,
            "samples": int(Z.shape[0]), "collar_samples": int(dom_gap.size),
            "seam_excluded": int(seam.sum())}


# --------------------------------------------------------------------------
# Levi forms


def levi_form(fn, z, X, scale: float = 1.0, closed_form=None) -> LeviEvaluation:
    """(d dbar fn)(z)(X, X-bar).

    ``closed_form(z, X)`` is used when given; otherwise the Laplacian of
    lam -> fn(z + lam X) at 0 is taken by the five-point stencil with step
    h = 1e-5 * scale and one Richardson extrapolation, divided by 4.
    """
    zc = as_point(z).coords
    Xc = np.asarray(X, dtype=complex).ravel()
    if closed_form is not None:
        return LeviEvaluation(tuple(zc), tuple(Xc), float(closed_form(zc, Xc)), "closed-form")
    h = 1e-5 * scale
    steps = np.array([1, -1, 1j, -1j])

    def lap(hh):
        P = zc[None, :] + (hh * steps)[:, None] * Xc[None, :]
        vals = np.asarray(fn(np.vstack([zc[None, :], P])), dtype=float).ravel()
        return (vals[1:].sum() - 4 * vals[0]) / hh**2

    d1, d2 = lap(h), lap(h / 2)
    val = (4 * d2 - d1) / 3 / 4
    if not math.isfinite(val):
        raise NumericError("non-finite second differences")
    return LeviEvaluation(tuple(zc), tuple(Xc), float(val), "finite-difference")


# --------------------------------------------------------------------------
# bounds


CANDIDATES = ("glued", "vertical", "moebius")


def sibony_lower(mu: float, eps: float, X, n: int = 2, alpha: float | None = None,
                 samples: int = 10_000, seed: int = 0, check: bool = True,
                 candidates=CANDIDATES) -> Bound:
    """Numeric lower bound for S_{G_mu}(p_eps; X): best of the registered test functions.

    glued      the candidate above, Levi form e^(-L') (eps^(2/mu-2)|X1|^2/4 + |X'|^2)
    vertical   |z'|^2 / (n - 1), Levi form |X'|^2 / (n - 1)
    moebius    |(z1 + eps)/(1 + eps z1)|^2, Levi form |X1|^2 / (1 - eps^2)^2

    ``candidates`` restricts the maximum to a subset; each one alone is a valid bound.
    """
    X = np.asarray(X, dtype=complex).ravel()
    if X.size != n:
        raise ArgumentError("vector dimension mismatch")
    unknown = set(candidates) - set(CANDIDATES)
    if unknown or not candidates:
        raise ArgumentError(f"unknown candidates {sorted(unknown)}")
    vals, consts = {}, None
    if "glued" in candidates:
        cand = sibony_candidate(mu, eps, alpha=alpha, n=n, samples=samples, seed=seed, check=check)
        vals["glued"] = math.sqrt(cand.levi_at_p(X))
        consts = cand.to_json()
    elif not mu > 1:
        raise ArgumentError("mu must exceed 1")
    if "vertical" in candidates:
        vals["vertical"] = math.sqrt(float(np.sum(np.abs(X[1:]) ** 2)) / (n - 1))
    if "moebius" in candidates:
        vals["moebius"] = abs(X[0]) / (1 - eps * eps)
    best = max(vals, key=vals.get)
    return Bound("S", vals[best], LOWER, NUMERIC, m=None, family=best,
                 details={"candidates": vals, "constants": consts})
