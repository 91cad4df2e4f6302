"""Certified lower bounds.

Two mechanisms are implemented.  Coordinate projections onto the unit disc
contract every invariant, which gives bounds valid for all chain lengths.
The square-root substitution handles the normal points p_t of the G-type
models: a disc through p_eps is pushed into a half plane by an explicit
branch of the square root and the Schwarz lemma is applied there.
"""

from __future__ import annotations

import math

import numpy as np

from .bounds import CERTIFIED, LOWER, Bound
from .domains import (Ball, Domain, GMinus, GPlain, GPsi, GTilde, PolyDisc, Punctured,
                      as_point)
from .errors import ArgumentError, CapabilityError, RangeError

__all__ = ["mobius", "projection_lower", "projection_kr_lower", "sqrt_trick_lower",
           "sqrt_trick_kr_lower", "sqrt_trick_beta", "localize_lower", "ball_lempert",
           "ball_kr"]


def mobius(zeta, eta) -> float:
    """Pseudohyperbolic distance |(zeta - eta) / (1 - zeta conj(eta))| on the unit disc."""
    a, b = complex(zeta), complex(eta)
    if abs(a) >= 1 or abs(b) >= 1:
        raise ArgumentError("pseudohyperbolic distance needs points of the open unit disc")
    return abs(a - b) / abs(1 - a * b.conjugate())


def ball_lempert(z, w) -> float:
    """|Phi_z(w)| for the unit ball, via 1 - |Phi_z(w)|^2 = (1-|z|^2)(1-|w|^2)/|1-<w,z>|^2."""
    z, w = np.asarray(z, complex), np.asarray(w, complex)
    num = (1 - np.vdot(z, z).real) * (1 - np.vdot(w, w).real)
    den = abs(1 - np.vdot(z, w)) ** 2
    s = 1 - num / den
    # the cancellation form loses precision for close points; use the direct form then
    if s < 1e-6:
        from .discs import ball_automorphism
        return float(np.linalg.norm(ball_automorphism(z, w[None, :])[0]))
    return math.sqrt(max(s, 0.0))


def ball_kr(z, X) -> float:
    """Kobayashi-Royden metric of the unit ball."""
    z, X = np.asarray(z, complex), np.asarray(X, complex)
    r = 1 - np.vdot(z, z).real
    return math.sqrt(np.vdot(X, X).real / r + abs(np.vdot(z, X)) ** 2 / r**2)


def _disc_projections(domain: Domain):
    """True when every coordinate projection maps the domain into the unit disc."""
    base = domain.base if isinstance(domain, Punctured) else domain
    return isinstance(base, (PolyDisc, Ball, GPlain, GTilde, GMinus, GPsi))


def _pair(domain, z, w):
    z, w = as_point(z, domain.dim), as_point(w, domain.dim)
    for p, name in ((z, "z"), (w, "w")):
        if domain.margin(p) >= 0:
            raise ArgumentError(f"{name} is not in the domain")
    return z, w


def projection_lower(domain: Domain, z, w) -> Bound:
    """max_j m(z_j, w_j); valid for ell^(m) at every m (and for the ball, its exact value)."""
    if not _disc_projections(domain):
        raise CapabilityError(f"no disc-valued coordinate projections on {domain.variant}")
    z, w = _pair(domain, z, w)
    vals = [mobius(a, b) for a, b in zip(z.coords, w.coords)]
    j = int(np.argmax(vals))
    value, how = vals[j], f"coordinate {j + 1}"
    if isinstance(domain, Ball):
        bv = ball_lempert(z.coords, w.coords)
        if bv > value:
            value, how = bv, "ball automorphism"
    return Bound("ell", value, LOWER, CERTIFIED, m=None, family="projection",
                 details={"projection": how, "coordinates": vals})


def projection_kr_lower(domain: Domain, z, X) -> Bound:
    """max_j |X_j| / (1 - |z_j|^2); a norm in X, so it bounds the Busemann metric too."""
    if not _disc_projections(domain):
        raise CapabilityError(f"no disc-valued coordinate projections on {domain.variant}")
    z = as_point(z, domain.dim)
    if domain.margin(z) >= 0:
        raise ArgumentError("z is not in the domain")
    X = np.asarray(X, dtype=complex).ravel()
    if X.size != domain.dim:
        raise ArgumentError("vector dimension mismatch")
    vals = np.abs(X) / (1 - np.abs(z.coords) ** 2)
    value, how = float(vals.max()), f"coordinate {int(vals.argmax()) + 1}"
    if isinstance(domain, Ball):
        bv = ball_kr(z.coords, X)
        if bv > value:
            value, how = bv, "ball metric"
    return Bound("kappa", value, LOWER, CERTIFIED, m=None, family="projection",
                 details={"projection": how})


def sqrt_trick_beta(domain: Domain, eps: float) -> tuple[float, float]:
    """(beta, base) for the square-root substitution at p_eps.

    On G~_mu the remaining coordinates are bounded on the small disc by
    |z_j|^mu <= eps, so the first coordinate lies in Re z1 < base + |Im z1|^mu
    with base = (n-1) eps.  For the modulus domains the coordinate bound is
    C beta^2 with C = 2(n-1), and base = eps.
    """
    if isinstance(domain, (GTilde, GPlain)):
        mu, n = domain.mu, domain.n
        if mu <= 0.5:
            raise RangeError("the square-root substitution needs mu > 1/2")
        return math.sqrt(eps ** (1.0 / mu) / 2.0), (n - 1) * eps
    if isinstance(domain, GPsi):
        return domain.modulus.solve_beta(eps, 2.0 * (domain.n - 1)), eps
    raise CapabilityError(f"square-root lower bounds are not available on {domain.variant}")


def _sqrt_pre(domain, delta, eps):
    if not (0 < delta < eps <= 0.5):
        raise RangeError("need 0 < delta < eps <= 1/2")
    beta, base = sqrt_trick_beta(domain, eps)
    if not beta < 1:
        raise RangeError(f"eps too large: beta = {beta:.4g} >= 1")
    return beta, base


def sqrt_trick_lower(domain: Domain, delta: float, eps: float) -> Bound:
    """Certified lower bound for ell(p_delta, p_eps) on G~_mu (mu > 1/2), G_mu or G_psi.

    beta (sqrt(A) - sqrt(B)) / (sqrt(A) + sqrt(B)) with A = base + eps and
    B = base + delta; for n = 2 on G~_mu this is A = 2 eps, B = eps + delta.
    """
    beta, base = _sqrt_pre(domain, delta, eps)
    A, B = math.sqrt(base + eps), math.sqrt(base + delta)
    factor = (A - B) / (A + B)
    return Bound("ell", beta * factor, LOWER, CERTIFIED, m=1, family="sqrt-trick",
                 details={"beta": beta, "factor": factor, "base": base,
                          "steps": ["restrict to |zeta| < beta-disc where |z_j| stays small",
                                    "square root maps the half plane piece into a sector",
                                    "Schwarz lemma on the composed disc"]})


def sqrt_trick_kr_lower(domain: Domain, eps: float) -> Bound:
    """Certified lower bound beta / (4 n' eps) for kappa(p_eps; (1, 0, ...)).

    n' = n on G~_mu (base (n-1) eps), n' = 2 on G_psi; 1/(8 eps) when n = 2.
    """
    if not (0 < eps <= 0.5):
        raise RangeError("need 0 < eps <= 1/2")
    beta, base = sqrt_trick_beta(domain, eps)
    if not beta < 1:
        raise RangeError(f"eps too large: beta = {beta:.4g} >= 1")
    shift = base + eps  # the square root is taken around -shift
    const = 1.0 / (4.0 * shift)
    return Bound("kappa", beta * const, LOWER, CERTIFIED, m=1, family="sqrt-trick",
                 details={"beta": beta, "schwarz_constant": const})


def localize_lower(gap_lower: float, inner_lower: float) -> float:
    """Product bound ell_D(D cap V, D minus U) * ell_{D cap U}(z, w) <= ell_D(z, w)."""
    if not (0 < gap_lower <= 1):
        raise ArgumentError("gap_lower must lie in (0, 1]")
    if inner_lower < 0:
        raise ArgumentError("inner_lower must be nonnegative")
    return gap_lower * inner_lower
