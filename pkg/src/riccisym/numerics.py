"""Floating-point verification layer.

Residuals of closed-form solutions are evaluated analytically (symbolic
derivatives lambdified to doubles) on rectangular grids, so any nonzero
value is pure rounding noise.  A finite-difference harness cross-checks
the symbolic derivative of arbitrary expressions against central
differences at random sample points.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .expr import EvalError, ExprError
from .reduce import ClosedFormSolution, full_flow_residuals

__all__ = ["Grid", "grid_eval", "grid_residual", "fd_cross_check"]

_DEFAULT_SEED = 0x5EED


@dataclass(frozen=True)
class Grid:
    """Rectangular (s, t) grid with parameter values and an exclusion
    radius around singular loci (e.g. zeros of the time factor)."""

    s_range: tuple = (0.2, 2.0)
    t_range: tuple = (0.0, 0.4)
    s_count: int = 50
    t_count: int = 20
    params: dict = field(default_factory=dict)
    exclusion: float = 0.05

    def axes(self):
        return (
            np.linspace(self.s_range[0], self.s_range[1], self.s_count),
            np.linspace(self.t_range[0], self.t_range[1], self.t_count),
        )

    def describe(self) -> dict:
        return {
            "s_range": list(self.s_range),
            "t_range": list(self.t_range),
            "s_count": self.s_count,
            "t_count": self.t_count,
            "params": {str(k): float(v) for k, v in self.params.items()},
            "exclusion": self.exclusion,
        }


def grid_eval(exprs, variables, axes):
    """Evaluate expressions on the tensor grid; returns (max_abs, argmax)."""
    grids = np.meshgrid(*axes, indexing="ij")
    max_abs = 0.0
    argmax = tuple(float(a[0]) for a in axes)
    for e in exprs:
        e = sp.sympify(e)
        if e == 0:
            continue
        f = sp.lambdify(variables, e, modules="numpy")
        with np.errstate(all="ignore"):
            vals = np.broadcast_to(f(*grids), grids[0].shape)
        bad = ~np.isfinite(vals)
        if bad.any():
            idx = tuple(int(i[0]) for i in np.nonzero(bad))
            raise EvalError(
                "domain violation at grid point "
                + str(tuple(float(g[idx]) for g in grids))
            )
        idx = np.unravel_index(np.argmax(np.abs(vals)), vals.shape)
        if abs(float(vals[idx])) > max_abs:
            max_abs = abs(float(vals[idx]))
            argmax = tuple(float(g[idx]) for g in grids)
    return max_abs, argmax


def grid_residual(
    sol: ClosedFormSolution, grid: Grid | None = None, seed: int = _DEFAULT_SEED
) -> dict:
    """Max absolute flow residual of a closed-form solution on a grid."""
    grid = grid or Grid()
    s, t = sp.Symbol("s"), sp.Symbol("t")
    by_name = {str(k): sp.sympify(v) for k, v in grid.params.items()}
    missing = [p for p in sol.params if str(p) not in by_name]
    if missing:
        raise ExprError(f"grid must fix parameters {missing}")
    values = {p: by_name[str(p)] for p in sol.params}
    tf = float(sp.sympify(sol.time_factor).subs(values).subs(t, 0))
    exprs = [e.subs(values) for e in full_flow_residuals(sol)]
    # keep clear of the time-factor singularity
    k_red = float(sp.sympify(sol.k_red).subs(values))
    t_sing = -1.0 / (2.0 * k_red)
    s_axis, t_axis = grid.axes()
    if t_sing >= 0:
        t_axis = t_axis[np.abs(t_axis - t_sing) > grid.exclusion]
    if not len(t_axis):
        raise EvalError("grid excluded entirely by the singular time")
    max_abs, argmax = grid_eval(exprs, (s, t), (s_axis, t_axis))
    return {
        "solution": sol.name,
        "grid": grid.describe(),
        "max_abs": max_abs,
        "argmax": list(argmax),
        "seed": seed,
    }


def fd_cross_check(
    e,
    variables,
    trials: int = 100,
    seed: int = _DEFAULT_SEED,
    h: float = 1e-5,
    tolerance: float = 1e-6,
) -> dict:
    """Central-difference check of the symbolic derivative.

    At each trial every free quantity of ``e`` is drawn uniformly from
    [0.3, 1.3]; for each requested variable the symbolic derivative is
    compared against the second-order central difference with step
    ``h``.  Trials where the expression is singular at the sample point
    are redrawn (smooth-box precondition).
    """
    e = sp.sympify(e)
    variables = [sp.sympify(v) for v in variables]
    free = sorted(e.free_symbols | set(variables), key=sp.default_sort_key)
    f = sp.lambdify(free, e, modules="numpy")
    dfs = {v: sp.lambdify(free, sp.diff(e, v), modules="numpy") for v in variables}
    rng = random.Random(seed)
    per_variable = {str(v): {"pass": 0, "fail": 0} for v in variables}
    passed = 0
    completed = 0
    attempts = 0
    while completed < trials and attempts < 8 * trials:
        attempts += 1
        point = {s: rng.uniform(0.3, 1.3) for s in free}
        args = [point[s] for s in free]
        try:
            with np.errstate(all="raise"):
                ok = True
                for v in variables:
                    exact = float(dfs[v](*args))
                    lo = list(args)
                    hi = list(args)
                    i = free.index(v)
                    lo[i] -= h
                    hi[i] += h
                    fd = (float(f(*hi)) - float(f(*lo))) / (2 * h)
                    if not (np.isfinite(exact) and np.isfinite(fd)):
                        raise FloatingPointError
                    err = abs(fd - exact) / max(1.0, abs(exact), abs(fd))
                    if err < tolerance:
                        per_variable[str(v)]["pass"] += 1
                    else:
                        per_variable[str(v)]["fail"] += 1
                        ok = False
        except (FloatingPointError, OverflowError, ZeroDivisionError, ValueError):
            continue
        completed += 1
        if ok:
            passed += 1
    if completed == 0:
        raise EvalError("no smooth sample points found")
    return {
        "pass_rate": passed / completed,
        "trials": completed,
        "per_variable": per_variable,
        "seed": seed,
        "h": h,
        "tolerance": tolerance,
    }
