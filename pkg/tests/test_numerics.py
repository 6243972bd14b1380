"""Grid evaluation and finite-difference cross-checks."""

import pytest
import sympy as sp

from riccisym.expr import EvalError, ExprError
from riccisym.numerics import Grid, fd_cross_check, grid_eval, grid_residual
from riccisym.reduce import get_solution

x, y, s, t = sp.symbols("x y s t")


class TestGridEval:
    def test_exact_zero(self):
        grid = Grid()
        max_abs, _ = grid_eval([sp.Integer(0), x - x], (s, t), grid.axes())
        assert max_abs == 0.0

    def test_max_and_argmax(self):
        grid = Grid(s_range=(0.0, 1.0), t_range=(0.0, 1.0), s_count=11, t_count=11)
        max_abs, argmax = grid_eval([s * t], (s, t), grid.axes())
        assert max_abs == pytest.approx(1.0)
        assert argmax == (1.0, 1.0)

    def test_domain_violation_raises(self):
        grid = Grid(s_range=(-1.0, 1.0), s_count=5)
        with pytest.raises(EvalError):
            grid_eval([sp.sqrt(s)], (s, t), grid.axes())


class TestGridResidual:
    def test_closed_form_is_zero_to_rounding(self):
        sol = get_solution("warped_hyperbolic")
        report = grid_residual(sol, Grid(params={"k": 1, "m": 2}))
        assert report["max_abs"] < 1e-10

    def test_missing_parameters_rejected(self):
        sol = get_solution("warped_hyperbolic")
        with pytest.raises(ExprError):
            grid_residual(sol, Grid(params={"k": 1}))

    def test_singular_time_excluded(self):
        # 1 - 2 k^2 t vanishes at t = 0.5 for k = 1; the grid drops it
        sol = get_solution("warped_spherical")
        grid = Grid(
            s_range=(0.2, 2.0),
            t_range=(0.0, 0.45),
            params={"k": 1, "m": 2},
        )
        report = grid_residual(sol, grid)
        assert report["max_abs"] < 1e-8

    def test_wrong_profile_detected(self):
        sol = get_solution("warped_hyperbolic")
        broken = sol.__class__(
            sol.name,
            sol.family,
            sol.params,
            sol.k_red,
            sol.time_factor,
            {**sol.profiles, "G": 2 * sol.profiles["G"]},
            sol.domain,
            sol.param_domain,
        )
        report = grid_residual(broken, Grid(params={"k": 1, "m": 2}))
        assert report["max_abs"] > 1e-3


class TestFdCrossCheck:
    def test_polynomial(self):
        report = fd_cross_check(x**3 + x * y, [x, y], trials=50)
        assert report["pass_rate"] == 1.0
        assert report["trials"] == 50

    def test_transcendental(self):
        report = fd_cross_check(sp.exp(x) * sp.sin(y) / (1 + x**2), [x, y])
        assert report["pass_rate"] >= 0.99

    def test_deterministic(self):
        a = fd_cross_check(sp.cos(x * y), [x], trials=30)
        b = fd_cross_check(sp.cos(x * y), [x], trials=30)
        assert a == b

    def test_singular_points_redrawn(self):
        # pole at x = 1 lies inside the sample box; trials still complete
        report = fd_cross_check(1 / (x - 1), [x], trials=20)
        assert report["trials"] == 20

    def test_wrong_derivative_would_fail(self):
        # sanity: loosening the tolerance to gross scale keeps pass_rate
        # meaningful — a coarse step h makes the check visibly inexact
        report = fd_cross_check(sp.exp(5 * x), [x], trials=20, h=0.3, tolerance=1e-6)
        assert report["pass_rate"] < 0.5
