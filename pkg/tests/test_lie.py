"""Symmetry checks, Lie brackets, determining equations (n = 2)."""

import pytest
import sympy as sp

from riccisym.expr import MonomialKey
from riccisym.flow import FlowSystem
from riccisym.geometry import Chart, generic_metric
from riccisym.jets import PointGenerator
from riccisym.lie import (
    check_symmetry,
    commutator,
    determining_monomial_system,
    generators_equal,
    generic_generator,
    monomial_coefficient,
    scaling_generator,
    spatial_generator,
    time_translation,
)

x1, x2, t = sp.symbols("x1 x2 t")


@pytest.fixture(scope="module")
def flow():
    return FlowSystem(generic_metric(Chart((x1, x2), t)))


class TestSymmetryChecks:
    def test_time_translation(self, flow):
        verdict = check_symmetry(time_translation(flow), flow)
        assert verdict
        assert all(c.is_zero for c in verdict.entries.values())

    def test_scaling(self, flow):
        assert check_symmetry(scaling_generator(flow), flow)

    def test_rotation_field(self, flow):
        assert check_symmetry(spatial_generator(flow, (-x2, x1)), flow)

    def test_bare_time_scaling_rejected_with_witness(self, flow):
        # t d/dt without the compensating metric scaling is not a symmetry
        bad = PointGenerator(flow.space, t, (sp.Integer(0),) * 2, {})
        verdict = check_symmetry(bad, flow)
        assert not verdict
        assert verdict.failing_entry is not None
        assert verdict.witness_value is not None
        assert abs(verdict.witness_value) > 1e-9

    def test_time_dependent_spatial_component_rejected(self, flow):
        with pytest.raises(Exception):
            spatial_generator(flow, (t * x1, x2))


class TestBrackets:
    def test_time_translation_and_scaling(self, flow):
        x_1 = time_translation(flow)
        x_2 = scaling_generator(flow)
        assert generators_equal(commutator(x_1, x_2), x_1)

    def test_time_translation_commutes_with_spatial(self, flow):
        x_1 = time_translation(flow)
        x_xi = spatial_generator(flow, (x1**2, x1 * x2))
        zero = commutator(x_1, x_xi)
        assert zero.is_zero()

    def test_spatial_bracket_is_the_vector_field_bracket(self, flow):
        xi = (x1**2, x1 * x2)
        zeta = (-x2, x1)
        lie_xz = tuple(
            sp.expand(
                xi[0] * sp.diff(zeta[i], x1)
                + xi[1] * sp.diff(zeta[i], x2)
                - zeta[0] * sp.diff(xi[i], x1)
                - zeta[1] * sp.diff(xi[i], x2)
            )
            for i in range(2)
        )
        lhs = commutator(spatial_generator(flow, xi), spatial_generator(flow, zeta))
        rhs = spatial_generator(flow, lie_xz)
        assert generators_equal(lhs, rhs)

    def test_antisymmetry(self, flow):
        a = spatial_generator(flow, (x1, -x2))
        b = scaling_generator(flow)
        total = commutator(a, b) + commutator(b, a)
        assert total.is_zero()

    def test_generators_equal_distinguishes(self, flow):
        assert not generators_equal(
            time_translation(flow), scaling_generator(flow)
        )


class TestDeterminingSystem:
    def test_symmetry_gives_all_zero_coefficients(self, flow):
        system = determining_monomial_system(flow, gen=scaling_generator(flow))
        assert system.equations  # nontrivial split
        assert system.all_zero()

    def test_non_symmetry_leaves_nonzero_coefficient(self, flow):
        bad = PointGenerator(flow.space, t, (sp.Integer(0),) * 2, {})
        system = determining_monomial_system(flow, gen=bad)
        assert not system.all_zero()

    def test_family_labels_partition_equations(self, flow):
        system = determining_monomial_system(flow, gen=scaling_generator(flow))
        families = system.families()
        assert sum(len(v) for v in families.values()) == len(system.equations)

    def test_generic_targeted_extraction(self, flow):
        space = flow.space
        g11 = sp.Symbol("g11")
        key = MonomialKey.of(space.jet(g11, x1, x1))
        system = determining_monomial_system(
            flow, gen=generic_generator(flow), monomials=[key]
        )
        ((got_key, family, coeff),) = system.equations
        assert got_key == key
        assert family == "ddg terms"
        # the coefficient constrains the generic component functions
        names = {f.func.__name__ for f in coeff.atoms(sp.Function)}
        assert names & {"xit", "xi1", "xi2", "eta_g11", "eta_g12", "eta_g22"}

    def test_monomial_coefficient_exact(self, flow):
        space = flow.space
        g11 = sp.Symbol("g11")
        d = space.jet(g11, x1)
        e = (x1 + g11) * d**2 + sp.sin(x2) * d + 7
        assert monomial_coefficient(space, e, MonomialKey.of(d, d)) == x1 + g11
        assert monomial_coefficient(space, e, MonomialKey.of(d)) == sp.sin(x2)
        assert monomial_coefficient(space, e, MonomialKey.of()) == 7
