"""Jet-space machinery shared by the symmetry modules.

A :class:`JetSpace` fixes a set of independent variables (spatial
coordinates plus a distinguished time symbol) and a set of dependent
variables.  Each dependent variable appears in two guises:

* a *value symbol* (a plain ``Symbol``) used when an expression treats
  the variable as a pointwise quantity (e.g. generator components
  ``eta(t, x, g11)``), and
* a *function application* ``g11(x1, ..., t)`` whose ``Derivative``
  atoms serve as jet coordinates.

The canonical working representation ("mixed form") uses value symbols
for the zeroth-order values and ``Derivative`` atoms of the function
applications for everything of order >= 1, so that all jet coordinates
are structurally independent atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import sympy as sp
from sympy.core.function import AppliedUndef

from .expr import ExprError, protected_replace

__all__ = ["JetSpace", "PointGenerator", "OnShellError"]


class OnShellError(ExprError):
    """A time-derivative jet coordinate has no substitution rule."""


class JetSpace:
    def __init__(
        self,
        spatial: Sequence[sp.Symbol],
        time: sp.Symbol,
        dependents: Sequence[tuple[sp.Symbol, sp.Expr]],
    ):
        self.spatial = tuple(spatial)
        self.time = time
        self.independents = self.spatial + (time,)
        self.dependents = tuple((s, f) for s, f in dependents)
        self.sym_of = {f: s for s, f in self.dependents}
        self.func_of = {s: f for s, f in self.dependents}
        self._funcs = set(self.func_of.values())
        names = [s.name for s in self.independents] + [
            s.name for s, _ in self.dependents
        ]
        if len(set(names)) != len(names):
            raise ExprError("independent and dependent variable names collide")

    # -- representation changes -------------------------------------------

    def to_mixed(self, e: sp.Expr) -> sp.Expr:
        """Replace bare dependent-function applications by value symbols
        (jet Derivative atoms are left untouched)."""
        return protected_replace(sp.sympify(e), self.sym_of)

    def to_function_form(self, e: sp.Expr) -> sp.Expr:
        """Replace value symbols by the function applications."""
        return protected_replace(sp.sympify(e), self.func_of)

    def jet(self, dep: sp.Symbol, *variables: sp.Symbol) -> sp.Expr:
        """The jet coordinate ``Derivative(u(x, t), *variables)`` in
        canonical (sorted) variable order."""
        return self.func_of[dep].diff(*variables)

    def is_jet(self, e: sp.Expr) -> bool:
        return isinstance(e, sp.Derivative) and e.expr in self._funcs

    def jet_atoms(self, e: sp.Expr) -> list[sp.Expr]:
        return sorted(
            (d for d in e.atoms(sp.Derivative) if self.is_jet(d)),
            key=sp.default_sort_key,
        )

    # -- total derivative --------------------------------------------------

    def total_diff(self, e: sp.Expr, v: sp.Symbol, order: int = 1) -> sp.Expr:
        """Total derivative D_v in mixed form: the explicit partial plus
        the chain-rule terms through every dependent value symbol.  Jet
        atoms differentiate to higher jet atoms."""
        for _ in range(order):
            e = sp.diff(e, v) + sp.Add(
                *[f.diff(v) * sp.diff(e, s) for s, f in self.dependents]
            )
        return e

    # -- on-shell substitution --------------------------------------------

    def on_shell(self, e: sp.Expr, rules: Mapping[sp.Expr, sp.Expr]) -> sp.Expr:
        """Eliminate every time-derivative jet coordinate using the
        first-order evolution rules ``{u_value_symbol: RHS}`` (meaning
        ``Derivative(u, t) -> RHS`` with RHS free of time derivatives).

        Mixed and higher time derivatives are rewritten through total
        derivatives of the right-hand sides; the maximal time order
        strictly decreases each pass, so the loop terminates.
        """
        rules = {k: sp.sympify(v) for k, v in rules.items()}
        t = self.time
        for _ in range(16):
            targets = {}
            for d in e.atoms(sp.Derivative):
                if not self.is_jet(d):
                    continue
                vc = dict(d.variable_count)
                if vc.get(t, 0) == 0:
                    continue
                dep = self.sym_of[d.expr]
                if dep not in rules:
                    raise OnShellError(f"no evolution rule for {dep}")
                repl = rules[dep]
                for var, count in vc.items():
                    repl = self.total_diff(
                        repl, var, count - 1 if var == t else count
                    )
                targets[d] = repl
            if not targets:
                return e
            e = protected_replace(e, targets)
        raise OnShellError("on-shell substitution did not terminate")

    # -- point generators and prolongation --------------------------------

    def prolong_coefficient(
        self, gen: "PointGenerator", d: sp.Expr
    ) -> sp.Expr:
        """Second-prolongation coefficient attached to the jet atom ``d``,
        computed in characteristic form:  eta^J = D_J Q + sum_i xi^i u_{J,i}.
        """
        dep = self.sym_of[d.expr]
        variables = []
        for var, count in d.variable_count:
            variables += [var] * count
        if len(variables) > 2:
            raise ExprError("only the second prolongation is implemented")
        key = (dep, tuple(sorted(variables, key=sp.default_sort_key)))
        cached = gen._coeff_cache.get(key)
        if cached is not None:
            return cached
        q = gen.characteristic()[dep]
        coeff = q
        for var in key[1]:
            coeff = self.total_diff(coeff, var)
        for comp, ind in zip(gen.components(), self.independents):
            coeff += comp * self.jet(dep, *key[1], ind)
        coeff = sp.expand(coeff)
        gen._coeff_cache[key] = coeff
        return coeff

    def apply_prolonged(self, gen: "PointGenerator", e: sp.Expr) -> sp.Expr:
        """pr^(2) X applied to a mixed-form expression of jet order <= 2."""
        e = self.to_mixed(sp.sympify(e))
        jets = self.jet_atoms(e)
        mask = {d: sp.Dummy() for d in jets}
        em = e.xreplace(mask)
        out = sp.Integer(0)
        for comp, ind in zip(gen.components(), self.independents):
            out += comp * sp.diff(em, ind)
        for dep, _ in self.dependents:
            out += gen.eta[dep] * sp.diff(em, dep)
        for d in jets:
            out += self.prolong_coefficient(gen, d) * sp.diff(em, mask[d])
        return out.xreplace({v: k for k, v in mask.items()})


@dataclass
class PointGenerator:
    """Infinitesimal generator of a point transformation on the jet
    space: components on the independent variables plus one eta per
    dependent variable, all expressions in mixed form (symbols only)."""

    space: JetSpace
    xi_t: sp.Expr
    xi: tuple[sp.Expr, ...]
    eta: dict[sp.Symbol, sp.Expr]
    _coeff_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.xi_t = sp.sympify(self.xi_t)
        self.xi = tuple(sp.sympify(c) for c in self.xi)
        if len(self.xi) != len(self.space.spatial):
            raise ExprError("one spatial component per coordinate required")
        self.eta = {s: sp.sympify(v) for s, v in self.eta.items()}
        for s, _ in self.space.dependents:
            self.eta.setdefault(s, sp.Integer(0))

    def components(self) -> tuple[sp.Expr, ...]:
        """Components ordered like space.independents (spatial, then t)."""
        return self.xi + (self.xi_t,)

    def characteristic(self) -> dict[sp.Symbol, sp.Expr]:
        """Q_u = eta_u - xi^t u_t - sum_s xi^s u_s for each dependent u."""
        out = {}
        for dep, _ in self.space.dependents:
            q = self.eta[dep] - self.xi_t * self.space.jet(dep, self.space.time)
            for comp, var in zip(self.xi, self.space.spatial):
                q -= comp * self.space.jet(dep, var)
            out[dep] = q
        return out

    def scaled(self, factor) -> "PointGenerator":
        factor = sp.sympify(factor)
        return PointGenerator(
            self.space,
            factor * self.xi_t,
            tuple(factor * c for c in self.xi),
            {s: factor * v for s, v in self.eta.items()},
        )

    def __add__(self, other: "PointGenerator") -> "PointGenerator":
        if other.space is not self.space:
            raise ExprError("generators live on different jet spaces")
        return PointGenerator(
            self.space,
            self.xi_t + other.xi_t,
            tuple(a + b for a, b in zip(self.xi, other.xi)),
            {
                s: self.eta[s] + other.eta[s]
                for s, _ in self.space.dependents
            },
        )

    def is_zero(self) -> bool:
        comps = list(self.components()) + [
            self.eta[s] for s, _ in self.space.dependents
        ]
        return all(sp.expand(c) == 0 for c in comps)
