"""Expression kernel: grammar, canonical form, zero testing, monomials."""

import random

import pytest
import sympy as sp

from riccisym.expr import (
    ExprError,
    MonomialKey,
    ParseError,
    Verdict,
    collect_monomials,
    diff,
    equals_zero,
    eval_numeric,
    parse,
    protected_replace,
    random_expression,
    simplify,
    substitute,
    to_string,
)

x, y, t = sp.symbols("x y t")


class TestParse:
    def test_precedence_and_associativity(self):
        assert parse("1 + 2*3") == 7
        assert parse("2^3^2") == 512  # right-associative
        assert parse("-x^2") == -(x**2)
        assert parse("(1+2)*3") == 9

    def test_decimals_become_rationals(self):
        e = parse("0.5*x")
        assert e == sp.Rational(1, 2) * x
        assert not e.atoms(sp.Float)

    def test_rational_exponents(self):
        assert parse("x^(1/2)") == sp.sqrt(x)
        assert parse("x^(-1/2)") == x ** sp.Rational(-1, 2)

    def test_builtin_functions(self):
        assert parse("sin(x)^2 + cos(x)^2") == 1  # canonical rewrite
        assert parse("exp(log(x))") == x

    def test_unknown_function_application(self):
        e = parse("u(x, y, t)")
        assert e.func.__name__ == "u"
        assert e.args == (x, y, t)

    def test_derivative_operator(self):
        e = parse("D(u(x, t), x)")
        assert isinstance(e, sp.Derivative)
        assert parse("D(x^3, x, 2)") == 6 * x

    def test_errors_carry_position(self):
        with pytest.raises(ParseError):
            parse("1 + * 2")
        with pytest.raises(ParseError):
            parse("sin(x")
        with pytest.raises(ParseError):
            parse("2x")  # no implicit multiplication

    def test_round_trip(self):
        rng = random.Random(7)
        for _ in range(50):
            e = simplify(random_expression(rng, [x, y], depth=3))
            again = parse(to_string(e))
            assert sp.simplify(again - e) == 0


class TestSimplify:
    def test_idempotent_seeded(self):
        rng = random.Random(11)
        for _ in range(100):
            e = random_expression(rng, [x, y], depth=3)
            s = simplify(e)
            assert simplify(s) == s

    def test_trig_rewrite(self):
        assert simplify(sp.sin(x) ** 2 + sp.cos(x) ** 2 - 1) == 0
        assert simplify(sp.cosh(x) ** 2 - sp.sinh(x) ** 2 - 1) == 0

    def test_rational_functions_cancel(self):
        assert simplify((x**2 - 1) / (x - 1) - x - 1) == 0

    def test_diff_produces_jets(self):
        u = sp.Function("u")(x, t)
        assert diff(u, x) == sp.Derivative(u, x)
        assert diff(x**3, x) == 3 * x**2


class TestProtectedReplace:
    def test_function_rule_never_rewrites_inside_derivative(self):
        u = sp.Function("u")(x, t)
        d = u.diff(x)
        e = u + d
        out = protected_replace(e, {u: sp.Symbol("u")})
        assert out == sp.Symbol("u") + d  # the jet atom is untouched

    def test_symbol_rule_acts_inside_derivative_expressions(self):
        k = sp.Symbol("k")
        u = sp.Function("u")(x, t)
        e = k * u.diff(x)
        out = protected_replace(e, {k: sp.Integer(2)})
        assert out == 2 * u.diff(x)

    def test_derivative_key_replaces_whole_atom(self):
        u = sp.Function("u")(x, t)
        d = u.diff(x)
        assert protected_replace(d + x, {d: y}) == y + x


class TestSubstitute:
    def test_bound_function_rewrites_its_jets(self):
        u = sp.Function("u")(x, t)
        e = u.diff(x) + u
        out = substitute(e, {u: x**2 * t})
        assert sp.simplify(out - (2 * x * t + x**2 * t)) == 0

    def test_simultaneous(self):
        out = substitute(x + y, {x: y, y: x})
        assert out == x + y


class TestEqualsZero:
    def test_symbolic_zero(self):
        check = equals_zero(sp.sin(x) ** 2 + sp.cos(x) ** 2 - 1)
        assert check.verdict == Verdict.ZERO_SYMBOLIC

    def test_nonzero_has_witness(self):
        check = equals_zero(x * y - 1)
        assert check.verdict == Verdict.NONZERO
        assert check.witness_value is not None
        point = {sp.Symbol(k): sp.nsimplify(v) for k, v in check.witness.items()}
        val = float((x * y - 1).subs(point))
        assert abs(val - check.witness_value) < 1e-9

    def test_deterministic(self):
        e = sp.sin(x) * y - x
        a = equals_zero(e)
        b = equals_zero(e)
        assert a.witness == b.witness and a.witness_value == b.witness_value

    def test_jet_atoms_are_independent_quantities(self):
        u = sp.Function("u")(x, t)
        e = u.diff(x) - u
        assert equals_zero(e).verdict == Verdict.NONZERO

    def test_eval_numeric(self):
        assert eval_numeric(x**2 + 1, {x: 2}) == pytest.approx(5.0)


class TestMonomials:
    def test_family_labels(self):
        u = sp.Function("u")(x, t)
        k1 = MonomialKey.of(u.diff(x))
        k2 = MonomialKey.of(u.diff(x), u.diff(x, x))
        assert k1.family() == "dg terms"
        assert k2.family() == "dg ddg terms"
        assert MonomialKey.of().family() == "no-derivative terms"

    def test_collect_reconstructs_seeded(self):
        rng = random.Random(23)
        u = sp.Function("u")(x, t)
        jets = [u.diff(x), u.diff(t), u.diff(x, x)]
        for _ in range(100):
            coeffs = [
                random_expression(rng, [x, t], depth=2, allow_division=False)
                for _ in range(4)
            ]
            e = (
                coeffs[0]
                + coeffs[1] * jets[0]
                + coeffs[2] * jets[1] * jets[0]
                + coeffs[3] * jets[2] ** 2
            )
            collected = collect_monomials(e, jets)
            rebuilt = sp.Add(
                *[k.as_expr() * v for k, v in collected.items()]
            )
            assert sp.expand(rebuilt - e) == 0

    def test_non_polynomial_dependence_raises(self):
        u = sp.Function("u")(x, t)
        d = u.diff(x)
        with pytest.raises(ExprError):
            collect_monomials(1 / d, [d])
