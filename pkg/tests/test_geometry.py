"""Curvature: Christoffel symbols, both Ricci routes, operators."""

import random

import pytest
import sympy as sp

from riccisym.expr import Verdict, equals_zero
from riccisym.geometry import (
    Chart,
    MetricFamily,
    SingularMetricError,
    conformal_base_ricci,
    generic_metric,
    warped_fiber_ricci_coefficient,
)

theta, phi = sp.symbols("theta phi")


@pytest.fixture(scope="module")
def sphere():
    chart = Chart((theta, phi))
    return MetricFamily(chart, {(0, 0): 1, (1, 1): sp.sin(theta) ** 2})


def random_polynomial_metric(rng, coords, degree=2):
    """Identity plus a small random rational polynomial perturbation
    (diagonally dominant, hence nondegenerate on the probe box)."""
    n = len(coords)
    monomials = [sp.Integer(1)]
    monomials += list(coords)
    if degree >= 2:
        monomials += [a * b for i, a in enumerate(coords) for b in coords[i:]]

    def poly(scale):
        return sp.Add(
            *[
                sp.Rational(rng.randint(-2, 2), rng.randint(8, 16)) * mono
                for mono in monomials
            ]
        ) * scale

    entries = {}
    for i in range(n):
        for j in range(i, n):
            base = sp.Integer(1) if i == j else sp.Integer(0)
            entries[(i, j)] = base + poly(sp.Rational(1, 4))
    return MetricFamily(Chart(tuple(coords)), entries, check_nondegenerate=False)


class TestMetricFamily:
    def test_symmetric_mirrored_access(self, sphere):
        assert sphere.g(0, 1) == sphere.g(1, 0) == 0

    def test_det_and_inverse(self, sphere):
        assert sp.simplify(sphere.det - sp.sin(theta) ** 2) == 0
        prod = sphere.matrix() * sphere.inverse
        assert sp.simplify(prod - sp.eye(2)) == sp.zeros(2, 2)

    def test_singular_metric_rejected(self):
        chart = Chart((theta, phi))
        with pytest.raises(SingularMetricError):
            MetricFamily(chart, {(0, 0): 1, (0, 1): 1, (1, 1): 1})

    def test_index_out_of_range(self):
        chart = Chart((theta, phi))
        with pytest.raises(Exception):
            MetricFamily(chart, {(0, 3): 1})


class TestCurvature:
    def test_euclidean_flat(self):
        x1, x2 = sp.symbols("x1 x2")
        flat = MetricFamily(Chart((x1, x2)), {(0, 0): 1, (1, 1): 1})
        assert flat.ricci == sp.zeros(2, 2)
        assert flat.ricci_oracle == sp.zeros(2, 2)

    def test_sphere_is_einstein(self, sphere):
        # unit round 2-sphere: Ric = g
        for i in range(2):
            for j in range(2):
                assert sp.simplify(sphere.ricci[i, j] - sphere.g(i, j)) == 0

    def test_oracle_agrees_on_sphere(self, sphere):
        for i in range(2):
            for j in range(2):
                diff = sphere.ricci[i, j] - sphere.ricci_oracle[i, j]
                assert sp.simplify(diff) == 0

    def test_oracle_agrees_on_random_metrics_smoke(self):
        rng = random.Random(5)
        coords = sp.symbols("x1 x2")
        for _ in range(5):
            metric = random_polynomial_metric(rng, coords)
            for i in range(2):
                for j in range(i, 2):
                    check = equals_zero(
                        metric.ricci[i, j] - metric.ricci_oracle[i, j]
                    )
                    assert check.is_zero

    def test_scaling_invariance_of_ricci(self, sphere):
        scaled = sphere.scaled(7)
        for i in range(2):
            for j in range(2):
                assert sp.simplify(scaled.ricci[i, j] - sphere.ricci[i, j]) == 0


class TestOperators:
    def test_hessian_symmetric(self, sphere):
        h = sphere.hessian(sp.cos(theta) * sp.sin(phi))
        assert sp.simplify(h[0, 1] - h[1, 0]) == 0

    def test_laplacian_eigenfunction(self, sphere):
        # cos(theta) is a first spherical harmonic: Lap f = -2 f
        f = sp.cos(theta)
        assert sp.simplify(sphere.laplacian(f) + 2 * f) == 0


class TestGenericMetric:
    def test_entries_are_fields(self):
        chart = Chart(sp.symbols("x1 x2"))
        m = generic_metric(chart)
        assert len(m.fields) == 3
        assert m.g(0, 1) == m.g(1, 0)
        assert m.g(1, 1).func.__name__ == "g22"


class TestWarpedBlockFormulas:
    """The displayed warped-product curvature blocks against the engine's
    general Ricci routine applied to the explicit product metric."""

    def test_base_block_matches_full_metric(self):
        # n = 1 base, fiber = unit 2-sphere: coordinates (x, theta, phi)
        x = sp.Symbol("x")
        t = sp.Symbol("t")
        psi = sp.Function("psi")(x, t)
        fphi = sp.Function("phi")(x, t)
        full = MetricFamily(
            Chart((x, theta, phi), t),
            {
                (0, 0): psi**-2,
                (1, 1): fphi**2,
                (2, 2): fphi**2 * sp.sin(theta) ** 2,
            },
            fields=(psi, fphi),
            check_nondegenerate=False,
        )
        base = conformal_base_ricci((x,), psi, fphi, 2)
        assert equals_zero(full.ricci[0, 0] - base[0, 0]).is_zero

    def test_fiber_block_matches_full_metric(self):
        x = sp.Symbol("x")
        t = sp.Symbol("t")
        psi = sp.Function("psi")(x, t)
        fphi = sp.Function("phi")(x, t)
        full = MetricFamily(
            Chart((x, theta, phi), t),
            {
                (0, 0): psi**-2,
                (1, 1): fphi**2,
                (2, 2): fphi**2 * sp.sin(theta) ** 2,
            },
            fields=(psi, fphi),
            check_nondegenerate=False,
        )
        # fiber block = coefficient * g_can; entry (1,1) has g_can = 1
        coeff = warped_fiber_ricci_coefficient((x,), psi, fphi, 2, 1)
        assert equals_zero(full.ricci[1, 1] - coeff).is_zero
        assert equals_zero(
            full.ricci[2, 2] - coeff * sp.sin(theta) ** 2
        ).is_zero

    def test_mixed_block_vanishes(self):
        x = sp.Symbol("x")
        t = sp.Symbol("t")
        psi = sp.Function("psi")(x, t)
        fphi = sp.Function("phi")(x, t)
        full = MetricFamily(
            Chart((x, theta, phi), t),
            {
                (0, 0): psi**-2,
                (1, 1): fphi**2,
                (2, 2): fphi**2 * sp.sin(theta) ** 2,
            },
            fields=(psi, fphi),
            check_nondegenerate=False,
        )
        assert equals_zero(full.ricci[0, 1]).is_zero
        assert equals_zero(full.ricci[0, 2]).is_zero
