import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lempert_lab.domains import (Ball, CPoint, GMinus, GPlain, GPsi, GTilde, Modulus, PolyDisc,
                                 Punctured, QuadImage, QuadraticForm, boundary_data, contains,
                                 domain_from_json, domain_to_json, normal_point,
                                 normalize_quadratic)
from lempert_lab.errors import ArgumentError, CapabilityError, ConstructionError


def _random_points(rng, count, n=2):
    r = rng.uniform(size=(count, n)) ** 0.5
    return r * np.exp(2j * np.pi * rng.uniform(size=(count, n)))


class TestCPoint:
    def test_rejects_nan(self):
        with pytest.raises(ArgumentError):
            CPoint([0.1, np.nan])

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            CPoint([0, 0]) + CPoint([1, 2, 3])

    @given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False), min_size=1, max_size=4))
    def test_json_roundtrip(self, coords):
        p = CPoint(coords)
        assert CPoint.from_json(json.loads(json.dumps(p.to_json()))) == p

    def test_immutable(self):
        p = CPoint([1, 2])
        with pytest.raises(ValueError):
            p.coords[0] = 5


class TestContains:
    def test_gtilde_normal_point(self):
        m = contains(GTilde(2, 2), [-0.01, 0])
        assert m.inside and m.margin == pytest.approx(-0.01, abs=1e-15)

    def test_gplain_outside(self):
        # 0.01 > 0.05^2
        assert not contains(GPlain(2, 2), [0.01, 0.05]).inside

    def test_polydisc_outside(self):
        assert not contains(PolyDisc(2), [0.5, 1.2]).inside

    def test_dimension_error(self):
        with pytest.raises(ArgumentError):
            contains(GPlain(2, 2), [0.1, 0.1, 0.1])

    def test_mu_ranges(self):
        with pytest.raises(ArgumentError):
            GPlain(2.5, 2)
        with pytest.raises(ArgumentError):
            GMinus(0.9)

    def test_monotone_in_mu(self):
        rng = np.random.default_rng(1)
        Z = _random_points(rng, 10_000)
        for mu, mu2 in [(2.0, 1.5), (1.5, 0.75), (0.75, 0.3)]:
            a = GPlain(mu, 2).margins(Z) < 0
            b = GPlain(mu2, 2).margins(Z) < 0
            assert np.all(b[a])

    def test_plain_inside_tilde(self):
        rng = np.random.default_rng(2)
        Z = _random_points(rng, 10_000)
        for mu in (0.5, 1.0, 2.0):
            a = GPlain(mu, 2).margins(Z) < 0
            assert np.all((GTilde(mu, 2).margins(Z) < 0)[a])

    def test_minus_model(self):
        D = GMinus(2.0)
        assert contains(D, [-0.01, 0]).inside
        assert not contains(D, [-0.01 + 0.02j, 0]).inside

    def test_gpsi(self):
        D = GPsi(Modulus("power", 1.0, 2.0), 2)
        assert contains(D, [-0.01, 0.3]).inside
        assert not contains(D, [0.2, 0.3]).inside

    def test_punctured_excludes_point(self):
        D = Punctured(Ball(2), ((0.0, 0.0),))
        assert not contains(D, [0, 0]).inside
        assert contains(D, [1e-9, 0]).inside


class TestNormalPoint:
    def test_g_variants(self):
        assert normal_point(GTilde(2, 2), 0.01) == CPoint([-0.01, 0])
        assert normal_point(GMinus(2), 0.5) == CPoint([-0.5, 0])

    def test_inside_all_variants(self):
        for D in (GPlain(0.3, 2), GTilde(1.0, 3), GMinus(1.5), GPlain(2, 2)):
            for t in (1e-9, 1e-3, 0.5, 0.999):
                assert contains(D, normal_point(D, t)).inside

    def test_range(self):
        with pytest.raises(ArgumentError):
            normal_point(GPlain(1, 2), 1.0)
        with pytest.raises(ArgumentError):
            normal_point(GPlain(1, 2), 0.0)

    def test_polydisc(self):
        assert normal_point(PolyDisc(2), 0.25) == CPoint([0.75, 0])


class TestBoundaryData:
    def test_polydisc(self):
        b = boundary_data(PolyDisc(2), [0.3, 0])
        assert b.gap == pytest.approx(0.7, abs=1e-12)

    def test_ball(self):
        b = boundary_data(Ball(2), [0.6, 0])
        assert b.gap == pytest.approx(0.4, abs=1e-12)
        assert np.linalg.norm(b.inner_normal) == pytest.approx(1.0)

    def test_closed_form_random(self):
        rng = np.random.default_rng(3)
        for z in _random_points(rng, 50) * 0.9:
            assert boundary_data(PolyDisc(2), z).gap == pytest.approx(1 - np.abs(z).max(), abs=1e-12)
            if np.linalg.norm(z) < 1:
                assert boundary_data(Ball(2), z).gap == pytest.approx(1 - np.linalg.norm(z),
                                                                     abs=1e-12)

    def test_gtilde_against_grid_oracle(self):
        z = np.array([-0.01, 0])
        b = boundary_data(GTilde(2, 2), z)
        # oracle: boundary Re z1 = (Im z1)^2 + |z2|^2 parametrized by (y, r)
        y = np.linspace(-0.2, 0.2, 801)[:, None]
        r = np.linspace(0, 0.2, 401)[None, :]
        d = np.sqrt((y**2 + r**2 + 0.01) ** 2 + y**2 + r**2)
        assert 0 < b.gap <= 0.01 + 1e-12
        assert b.gap == pytest.approx(d.min(), abs=1e-6)
        assert np.allclose(b.inner_normal, [-1, 0], atol=1e-3)
        assert b.grade == "converged"
        # the nearest point is at the reported distance and inner normal points inward
        assert np.linalg.norm(z - b.nearest.coords) == pytest.approx(b.gap, rel=1e-9)
        assert contains(GTilde(2, 2), b.nearest.coords + 1e-4 * b.inner_normal).inside

    def test_outside_point(self):
        with pytest.raises(ArgumentError):
            boundary_data(PolyDisc(2), [1.5, 0])

    def test_unsupported(self):
        with pytest.raises(CapabilityError):
            boundary_data(GPsi(Modulus(), 2), [-0.1, 0])


class TestQuadratic:
    def test_model_form(self):
        q = normalize_quadratic(QuadraticForm(), samples=20_000)
        assert q.alpha1 == 1.0 and q.alpha2 == 0
        W = np.array([[0.01, 0.02]])
        assert np.allclose(q.to_original(W), [[0.01 + 1e-4, 0.02]])
        assert q.radius > 0 and q.worst_margin < 0

    def test_with_pure_term(self):
        q = normalize_quadratic(QuadraticForm(a22=1.0), samples=20_000)
        W = np.array([[0.01, 0.02]])
        a1 = q.alpha1
        assert np.allclose(q.to_original(W), [[0.01 + a1 * 1e-4 - 4e-4, 0.02]])

    def test_inverse(self):
        q = normalize_quadratic(QuadraticForm(a11=0.3, c=0.2 + 0.1j, a22=0.5j), samples=20_000)
        rng = np.random.default_rng(4)
        W = _random_points(rng, 100) * q.radius * 0.5
        assert np.allclose(q.to_normalized(q.to_original(W)), W, atol=1e-12)

    def test_degenerate(self):
        with pytest.raises(ArgumentError):
            normalize_quadratic(QuadraticForm(b22=-0.5))

    def test_quad_image_domain(self):
        q = normalize_quadratic(QuadraticForm(a22=0.5), samples=20_000)
        D = QuadImage(q)
        assert contains(D, q.to_original([[-0.001, 0]])[0]).inside

    def test_construction_error_type(self):
        assert issubclass(ConstructionError, Exception)


class TestSerialization:
    @pytest.mark.parametrize("D", [PolyDisc(3), Ball(2), GPlain(1.5, 2), GTilde(0.75, 3),
                                   GMinus(2.0), GPsi(Modulus("log", 0.5), 2),
                                   Punctured(Ball(2), ((0, 0),))])
    def test_roundtrip(self, D):
        data = json.loads(json.dumps(domain_to_json(D)))
        D2 = domain_from_json(data)
        assert domain_to_json(D2) == domain_to_json(D)

    def test_bad_variant(self):
        with pytest.raises(ArgumentError):
            domain_from_json({"variant": "Torus"})


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(1e-6, 0.99))
def test_normal_point_inside_property(mu, t):
    assert contains(GTilde(mu, 2), normal_point(GTilde(mu, 2), t)).inside
