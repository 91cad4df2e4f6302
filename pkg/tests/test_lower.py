import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lempert_lab.bounds import CERTIFIED, LOWER
from lempert_lab.domains import Ball, GPlain, GPsi, GTilde, Modulus, PolyDisc, normal_point
from lempert_lab.errors import ArgumentError, CapabilityError, RangeError
from lempert_lab.lower import (ball_kr, ball_lempert, localize_lower, mobius, projection_kr_lower,
                               projection_lower, sqrt_trick_beta, sqrt_trick_kr_lower,
                               sqrt_trick_lower)

unit = st.complex_numbers(max_magnitude=0.95, allow_nan=False, allow_infinity=False)


def _sqrt_oracle(mu, delta, eps):
    beta = math.sqrt(eps ** (1 / mu) / 2)
    A, B = math.sqrt(2 * eps), math.sqrt(eps + delta)
    return beta * (A - B) / (A + B)


class TestMobius:
    def test_values(self):
        assert mobius(0, 0.5) == pytest.approx(0.5)
        assert mobius(-0.01, -0.005) == pytest.approx(0.005 / (1 - 5e-5), rel=1e-14)

    def test_outside(self):
        with pytest.raises(ArgumentError):
            mobius(1.0, 0)

    @settings(max_examples=100)
    @given(unit, unit, unit)
    def test_invariant_under_automorphisms(self, a, z, w):
        phi = lambda u: (u - a) / (1 - a.conjugate() * u)
        assert mobius(phi(z), phi(w)) == pytest.approx(mobius(z, w), abs=1e-9)

    @settings(max_examples=100)
    @given(unit, unit)
    def test_symmetric(self, z, w):
        assert mobius(z, w) == pytest.approx(mobius(w, z), abs=1e-12)


class TestProjection:
    def test_polydisc_is_max_of_coordinates(self):
        b = projection_lower(PolyDisc(2), [0, 0.1], [0.3, 0.2])
        assert b.value == pytest.approx(0.3)
        assert b.grade == CERTIFIED and b.direction == LOWER and b.m is None

    def test_ball_exact(self):
        z, w = np.array([0.3, 0.1j]), np.array([-0.2, 0.4])
        # oracle via an automorphism taking z to 0: |phi_z(w)|
        zz = np.vdot(z, z).real
        P = np.outer(z, z.conj()) / zz
        s = math.sqrt(1 - zz)
        phi = (z - P @ w - s * (w - P @ w)) / (1 - np.vdot(z, w))
        assert ball_lempert(z, w) == pytest.approx(np.linalg.norm(phi), rel=1e-12)
        assert projection_lower(Ball(2), z, w).value == pytest.approx(np.linalg.norm(phi))

    def test_ball_close_points(self):
        z = np.array([0.3, 0.1])
        w = z + 1e-9
        assert 0 < ball_lempert(z, w) < 1e-8

    def test_normal_points(self):
        D = GTilde(2, 2)
        b = projection_lower(D, normal_point(D, 0.005), normal_point(D, 0.01))
        assert b.value == pytest.approx(mobius(-0.005, -0.01))

    def test_point_outside(self):
        with pytest.raises(ArgumentError):
            projection_lower(PolyDisc(2), [0, 0], [1.2, 0])

    def test_kr_projection(self):
        b = projection_kr_lower(PolyDisc(2), [0.5, 0], [1, 0])
        assert b.value == pytest.approx(1 / 0.75)

    def test_kr_ball(self):
        z, X = np.array([0.6, 0]), np.array([1, 0])
        # radial direction: 1 / (1 - |z|^2)
        assert ball_kr(z, X) == pytest.approx(1 / 0.64)
        assert ball_kr(z, np.array([0, 1])) == pytest.approx(1 / math.sqrt(0.64))


class TestSqrtTrick:
    @pytest.mark.parametrize("mu, value", [(2.0, 0.016054245766886036), (1.5, 0.010937630)])
    def test_frozen_values(self, mu, value):
        b = sqrt_trick_lower(GTilde(mu, 2), 0.005, 0.01)
        assert b.value == pytest.approx(value, rel=1e-7)
        assert b.value == pytest.approx(_sqrt_oracle(mu, 0.005, 0.01), rel=1e-14)
        assert b.certified

    def test_kr_value(self):
        # beta / (8 eps) with beta = sqrt(eps^(1/2) / 2) at mu = 2
        b = sqrt_trick_kr_lower(GTilde(2, 2), 0.01)
        assert b.value == pytest.approx(math.sqrt(0.05) / 0.08)
        assert b.value == pytest.approx(2.7950850, rel=1e-7)

    def test_range(self):
        with pytest.raises(RangeError):
            sqrt_trick_lower(GTilde(2, 2), 0.01, 0.005)
        with pytest.raises(RangeError):
            sqrt_trick_beta(GTilde(0.5, 2), 0.01)

    def test_capability(self):
        with pytest.raises(CapabilityError):
            sqrt_trick_lower(PolyDisc(2), 0.005, 0.01)

    def test_higher_dimension_base(self):
        beta, base = sqrt_trick_beta(GTilde(2, 3), 0.01)
        assert base == pytest.approx(0.02)

    def test_modulus_domain(self):
        D = GPsi(Modulus("power", 1.0, 2.0), 2)
        beta, base = sqrt_trick_beta(D, 0.01)
        assert 0 < beta < 1 and base == 0.01
        # bound solves C beta^2 psi... at the root: psi(2 beta^2) = eps for psi(t) = t^2
        assert (2 * beta**2) ** 2 == pytest.approx(0.01, rel=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.55, 2.0), st.floats(1e-6, 0.4), st.floats(0.05, 0.95))
    def test_below_projection_free_upper(self, mu, eps, frac):
        # the bound never exceeds the trivial bound given by the first-coordinate disc
        b = sqrt_trick_lower(GTilde(mu, 2), frac * eps, eps)
        assert 0 < b.value < 1

    @settings(max_examples=40, deadline=None)
    @given(st.floats(1e-6, 0.2))
    def test_monotone_in_delta(self, eps):
        D = GTilde(2, 2)
        vals = [sqrt_trick_lower(D, f * eps, eps).value for f in (0.1, 0.3, 0.6, 0.9)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestLocalize:
    def test_product(self):
        assert localize_lower(0.5, 0.2) == pytest.approx(0.1)

    def test_invalid(self):
        with pytest.raises(ArgumentError):
            localize_lower(0, 0.2)
        with pytest.raises(ArgumentError):
            localize_lower(0.5, -1)
