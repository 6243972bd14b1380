"""The Ricci flow as a PDE system.

The residual convention is  E_ab = d_t g_ab + 2 R_ab  throughout, so a
metric family solves the flow iff every residual entry vanishes.
"""

from __future__ import annotations

from functools import cached_property

import sympy as sp

from .expr import ExprError
from .geometry import (
    Chart,
    MetricFamily,
    conformal_base_ricci,
    warped_fiber_ricci_coefficient,
)
from .jets import JetSpace

__all__ = [
    "FlowSystem",
    "flow_residual",
    "warped_system",
    "doubly_warped_residuals",
    "doubly_warped_system",
]


def flow_residual(metric: MetricFamily) -> sp.Matrix:
    """E_ab = d_t g_ab + 2 R_ab in function form, for any metric family."""
    n = metric.n
    t = metric.chart.time
    ric = metric.ricci
    out = sp.zeros(n, n)
    for i in range(n):
        for j in range(i, n):
            out[i, j] = out[j, i] = sp.diff(metric.g(i, j), t) + 2 * ric[i, j]
    return out


class FlowSystem:
    """Residual matrix E = d_t g + 2 Ric together with the jet space and
    the on-shell substitution rules d_t g -> -2 Ric (spatial derivatives
    of the rules are derived on demand during substitution)."""

    def __init__(self, metric: MetricFamily):
        self.metric = metric
        chart = metric.chart
        deps = []
        for i in range(metric.n):
            for j in range(i, metric.n):
                f = metric.g(i, j)
                if f not in metric.fields:
                    raise ExprError(
                        "FlowSystem requires every metric entry to be a "
                        "declared unknown field application; use "
                        "flow_residual for concrete metric families"
                    )
                deps.append((sp.Symbol(f.func.__name__), f))
        self.space = JetSpace(chart.coords, chart.time, deps)

    @cached_property
    def ricci_mixed(self) -> sp.Matrix:
        n = self.metric.n
        ric = self.metric.ricci
        return sp.Matrix(
            n, n, lambda i, j: self.space.to_mixed(ric[i, j])
        )

    @cached_property
    def residual(self) -> sp.Matrix:
        """E_ab = d_t g_ab + 2 R_ab in mixed (jet) form."""
        n = self.metric.n
        t = self.metric.chart.time
        out = sp.zeros(n, n)
        for i in range(n):
            for j in range(i, n):
                e = sp.diff(self.metric.g(i, j), t) + 2 * self.ricci_mixed[i, j]
                out[i, j] = out[j, i] = self.space.to_mixed(e)
        return out

    @cached_property
    def rules(self) -> dict[sp.Symbol, sp.Expr]:
        """Evolution rules {g_ij value symbol: -2 R_ij} for on-shell use."""
        out = {}
        k = 0
        for i in range(self.metric.n):
            for j in range(i, self.metric.n):
                dep_sym = self.space.dependents[k][0]
                out[dep_sym] = -2 * self.ricci_mixed[i, j]
                k += 1
        return out

    def on_shell(self, e: sp.Expr) -> sp.Expr:
        return self.space.on_shell(self.space.to_mixed(e), self.rules)


def warped_system(n: int, m, mu, base_symbol: str = "x"):
    """Field-space PDE system for g = psi^-2 dx.dx + phi^2 g_can on
    R^n x F^m with Einstein fiber constant mu.

    Returns (space, residuals, rules): the jet space over the fields
    (psi, phi), the flow residual expressions in mixed form, and the
    solved evolution rules {psi: psi_t RHS, phi: phi_t RHS}.
    """
    m, mu = sp.sympify(m), sp.sympify(mu)
    t = sp.Symbol("t")
    coords = tuple(
        sp.Symbol(base_symbol if n == 1 else f"{base_symbol}{i + 1}")
        for i in range(n)
    )
    psi_f = sp.Function("psi")(*coords, t)
    phi_f = sp.Function("phi")(*coords, t)
    psi_s, phi_s = sp.Symbol("psi"), sp.Symbol("phi")
    space = JetSpace(coords, t, [(psi_s, psi_f), (phi_s, phi_f)])

    ric_base = conformal_base_ricci(coords, psi_f, phi_f, m)
    fiber_coeff = warped_fiber_ricci_coefficient(coords, psi_f, phi_f, m, mu)

    residuals = []
    for i in range(n):
        for j in range(i, n):
            gij = (psi_f ** -2 if i == j else sp.Integer(0))
            residuals.append(
                space.to_mixed(sp.diff(gij, t) + 2 * ric_base[i, j])
            )
    residuals.append(space.to_mixed(sp.diff(phi_f**2, t) + 2 * fiber_coeff))

    # solve the diagonal base entry and the fiber entry for the time
    # derivatives:  d_t(psi^-2) = -2 psi_t/psi^3,  d_t(phi^2) = 2 phi phi_t
    psi_t = space.jet(psi_s, t)
    phi_t = space.jet(phi_s, t)
    r_base = residuals[0]
    r_fiber = residuals[-1]
    rules = {
        psi_s: sp.solve(r_base, psi_t)[0],
        phi_s: sp.solve(r_fiber, phi_t)[0],
    }
    return space, residuals, rules


def doubly_warped_residuals(chi, phi, psi, x, t, p, q):
    """Flow residuals for g = chi^2 dx.dx + phi^2 g_{S^p} + psi^2 g_{S^q}
    (unit-sphere fibers), written as E = 0 equations:

    E1 = chi chi_t - (p/phi)(phi_xx - phi_x chi_x / chi)
                   - (q/psi)(psi_xx - psi_x chi_x / chi)
    E2 = phi phi_t + (p-1)
         - (phi/chi)^2 (phi_xx/phi - phi_x chi_x/(phi chi)
                        + (p-1)(phi_x/phi)^2 + q phi_x psi_x/(phi psi))
    E3 = the same with (phi, p) and (psi, q) exchanged.
    """
    p, q = sp.sympify(p), sp.sympify(q)
    cx, px, sx = sp.diff(chi, x), sp.diff(phi, x), sp.diff(psi, x)
    e1 = (
        chi * sp.diff(chi, t)
        - (p / phi) * (sp.diff(phi, x, 2) - px * cx / chi)
        - (q / psi) * (sp.diff(psi, x, 2) - sx * cx / chi)
    )
    e2 = (
        phi * sp.diff(phi, t)
        + (p - 1)
        - (phi / chi) ** 2
        * (
            sp.diff(phi, x, 2) / phi
            - px * cx / (phi * chi)
            + (p - 1) * (px / phi) ** 2
            + q * px * sx / (phi * psi)
        )
    )
    e3 = (
        psi * sp.diff(psi, t)
        + (q - 1)
        - (psi / chi) ** 2
        * (
            sp.diff(psi, x, 2) / psi
            - sx * cx / (psi * chi)
            + (q - 1) * (sx / psi) ** 2
            + p * px * sx / (psi * phi)
        )
    )
    return [e1, e2, e3]


def doubly_warped_system(p, q):
    """Jet space, residuals, and evolution rules for the doubly-warped
    flow with fields chi, phi, psi of (x, t)."""
    x, t = sp.Symbol("x"), sp.Symbol("t")
    chi_f = sp.Function("chi")(x, t)
    phi_f = sp.Function("phi")(x, t)
    psi_f = sp.Function("psi")(x, t)
    chi_s, phi_s, psi_s = sp.symbols("chi phi psi")
    space = JetSpace(
        (x,), t, [(chi_s, chi_f), (phi_s, phi_f), (psi_s, psi_f)]
    )
    residuals = [
        space.to_mixed(e)
        for e in doubly_warped_residuals(chi_f, phi_f, psi_f, x, t, p, q)
    ]
    rules = {}
    for dep, res in zip((chi_s, phi_s, psi_s), residuals):
        jet_t = space.jet(dep, t)
        rules[dep] = sp.solve(res, jet_t)[0]
    return space, residuals, rules
