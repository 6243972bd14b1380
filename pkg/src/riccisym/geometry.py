"""Coordinate-chart tensor calculus for symmetric metric families.

Everything here works on expressions in "function form": metric entries
are expressions in the chart coordinates, the time symbol, and unknown
scalar fields written as function applications, so plain ``sympy.diff``
is the coordinate partial derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import sympy as sp

from .expr import ExprError, Verdict, equals_zero, simplify

__all__ = [
    "Chart",
    "MetricFamily",
    "SingularMetricError",
    "generic_metric",
    "conformal_base_ricci",
    "warped_fiber_ricci_coefficient",
]


class SingularMetricError(ExprError):
    pass


@dataclass(frozen=True)
class Chart:
    """Ordered spatial coordinates plus a distinguished time symbol."""

    coords: tuple[sp.Symbol, ...]
    time: sp.Symbol = sp.Symbol("t")

    def __post_init__(self):
        names = [c.name for c in self.coords] + [self.time.name]
        if len(set(names)) != len(names):
            raise ExprError("chart coordinate names must be distinct")

    @property
    def n(self) -> int:
        return len(self.coords)


def _sym_key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


class MetricFamily:
    """Symmetric matrix of expressions over a chart.

    Only the upper triangle is stored; access is mirrored.  ``fields``
    lists the unknown scalar function applications appearing in the
    entries (e.g. ``u(x1, x2, t)``).
    """

    def __init__(
        self,
        chart: Chart,
        entries: dict[tuple[int, int], sp.Expr],
        fields: Sequence[sp.Expr] = (),
        check_nondegenerate: bool = True,
    ):
        self.chart = chart
        n = chart.n
        self.entries = {}
        for (i, j), v in entries.items():
            if not (0 <= i < n and 0 <= j < n):
                raise ExprError(f"metric index ({i},{j}) out of range")
            key = _sym_key(i, j)
            v = sp.sympify(v)
            if key in self.entries and self.entries[key] != v:
                raise ExprError(f"conflicting values for entry {key}")
            self.entries[key] = v
        for i in range(n):
            for j in range(i, n):
                self.entries.setdefault((i, j), sp.Integer(0))
        self.fields = tuple(fields)
        if check_nondegenerate and equals_zero(self.det).is_zero:
            raise SingularMetricError("metric determinant is identically zero")

    def g(self, i: int, j: int) -> sp.Expr:
        return self.entries[_sym_key(i, j)]

    @property
    def n(self) -> int:
        return self.chart.n

    def matrix(self) -> sp.Matrix:
        n = self.n
        return sp.Matrix(n, n, lambda i, j: self.g(i, j))

    @cached_property
    def det(self) -> sp.Expr:
        return self.matrix().det(method="berkowitz")

    @cached_property
    def inverse(self) -> sp.Matrix:
        """Inverse via adjugate over determinant (kept unexpanded)."""
        n = self.n
        m = self.matrix()
        adj = m.adjugate()
        return sp.Matrix(n, n, lambda i, j: adj[i, j] / self.det)

    def ginv(self, i: int, j: int) -> sp.Expr:
        return self.inverse[i, j]

    def scaled(self, c) -> "MetricFamily":
        return MetricFamily(
            self.chart,
            {k: sp.sympify(c) * v for k, v in self.entries.items()},
            self.fields,
            check_nondegenerate=False,
        )

    # -- connection and curvature ------------------------------------------

    @cached_property
    def christoffel_lower(self):
        """Gamma[tau][gamma][alpha] = (d_alpha g_{tau gamma}
        + d_gamma g_{tau alpha} - d_tau g_{gamma alpha}) / 2."""
        n, x = self.n, self.chart.coords
        return [
            [
                [
                    sp.Rational(1, 2)
                    * (
                        sp.diff(self.g(tau, gam), x[alp])
                        + sp.diff(self.g(tau, alp), x[gam])
                        - sp.diff(self.g(gam, alp), x[tau])
                    )
                    for alp in range(n)
                ]
                for gam in range(n)
            ]
            for tau in range(n)
        ]

    @cached_property
    def christoffel_upper(self):
        """Gamma^lam_{mu nu} built directly from metric derivatives."""
        n, x = self.n, self.chart.coords
        inv = self.inverse
        out = [[[sp.Integer(0)] * n for _ in range(n)] for _ in range(n)]
        for lam in range(n):
            for mu in range(n):
                for nu in range(mu, n):
                    total = sp.Integer(0)
                    for sig in range(n):
                        total += inv[lam, sig] * (
                            sp.diff(self.g(sig, mu), x[nu])
                            + sp.diff(self.g(sig, nu), x[mu])
                            - sp.diff(self.g(mu, nu), x[sig])
                        )
                    out[lam][mu][nu] = out[lam][nu][mu] = total / 2
        return out

    @cached_property
    def ricci(self) -> sp.Matrix:
        """Ricci tensor from the lower Christoffel symbols:

        R_ab = g^{cd}/2 {-d_c d_d g_ab - d_a d_b g_cd + d_b d_d g_ac
                         + d_a d_c g_db}
               + g^{cd} g^{tr} {Gamma_{tca} Gamma_{rdb}
                                - Gamma_{tcd} Gamma_{rab}}.
        """
        n, x = self.n, self.chart.coords
        inv = self.inverse
        gam = self.christoffel_lower
        out = sp.zeros(n, n)
        for a in range(n):
            for b in range(a, n):
                acc = sp.Integer(0)
                for c in range(n):
                    for d in range(n):
                        acc += (
                            inv[c, d]
                            / 2
                            * (
                                -sp.diff(self.g(a, b), x[c], x[d])
                                - sp.diff(self.g(c, d), x[a], x[b])
                                + sp.diff(self.g(a, c), x[b], x[d])
                                + sp.diff(self.g(d, b), x[a], x[c])
                            )
                        )
                        for tau in range(n):
                            for rho in range(n):
                                acc += (
                                    inv[c, d]
                                    * inv[tau, rho]
                                    * (
                                        gam[tau][c][a] * gam[rho][d][b]
                                        - gam[tau][c][d] * gam[rho][a][b]
                                    )
                                )
                out[a, b] = out[b, a] = acc
        return out

    @cached_property
    def ricci_oracle(self) -> sp.Matrix:
        """Independent route: contraction of the full Riemann tensor,
        R_ab = d_lam Gamma^lam_ab - d_a Gamma^lam_{lam b}
               + Gamma^lam_{lam sig} Gamma^sig_ab
               - Gamma^lam_{a sig} Gamma^sig_{lam b}.
        """
        n, x = self.n, self.chart.coords
        up = self.christoffel_upper
        out = sp.zeros(n, n)
        for a in range(n):
            for b in range(a, n):
                acc = sp.Integer(0)
                for lam in range(n):
                    acc += sp.diff(up[lam][a][b], x[lam])
                    acc -= sp.diff(up[lam][lam][b], x[a])
                    for sig in range(n):
                        acc += up[lam][lam][sig] * up[sig][a][b]
                        acc -= up[lam][a][sig] * up[sig][lam][b]
                out[a, b] = out[b, a] = acc
        return out

    # -- second-order operators -------------------------------------------

    def hessian(self, f: sp.Expr) -> sp.Matrix:
        n, x = self.n, self.chart.coords
        up = self.christoffel_upper
        out = sp.zeros(n, n)
        for i in range(n):
            for j in range(i, n):
                acc = sp.diff(f, x[i], x[j])
                for k in range(n):
                    acc -= up[k][i][j] * sp.diff(f, x[k])
                out[i, j] = out[j, i] = acc
        return out

    def laplacian(self, f: sp.Expr) -> sp.Expr:
        hess = self.hessian(f)
        inv = self.inverse
        n = self.n
        return sp.Add(
            *[inv[i, j] * hess[i, j] for i in range(n) for j in range(n)]
        )


def generic_metric(chart: Chart, prefix: str = "g") -> MetricFamily:
    """Fully generic symmetric metric: entry (i, j) is the unknown
    function ``g{i+1}{j+1}(x..., t)``."""
    args = chart.coords + (chart.time,)
    entries, fields = {}, []
    for i in range(chart.n):
        for j in range(i, chart.n):
            f = sp.Function(f"{prefix}{i + 1}{j + 1}")(*args)
            entries[(i, j)] = f
            fields.append(f)
    return MetricFamily(chart, entries, fields, check_nondegenerate=False)


# ---------------------------------------------------------------------------
# Warped-product block formulas (flat conformal base, abstract Einstein fiber)
# ---------------------------------------------------------------------------


def conformal_base_ricci(
    coords: Sequence[sp.Symbol], psi: sp.Expr, phi: sp.Expr, m
) -> sp.Matrix:
    """Base-block Ricci of  g = psi^-2 dx.dx + phi^2 g_can  on R^n x F^m:

    R_ij = (n-2) psi_ij / psi
           + (Lap psi / psi - (n-1) |grad psi|^2 / psi^2) delta_ij
           - (m/phi) (phi_ij + (psi_i phi_j + psi_j phi_i)/psi
                      - <grad psi, grad phi>/psi delta_ij),

    with flat (Euclidean) derivatives, Laplacian, and inner products.
    """
    x = list(coords)
    n = len(x)
    m = sp.sympify(m)
    lap_psi = sp.Add(*[sp.diff(psi, xi, 2) for xi in x])
    grad2_psi = sp.Add(*[sp.diff(psi, xi) ** 2 for xi in x])
    cross = sp.Add(*[sp.diff(psi, xi) * sp.diff(phi, xi) for xi in x])
    out = sp.zeros(n, n)
    for i in range(n):
        for j in range(i, n):
            delta = 1 if i == j else 0
            val = (n - 2) * sp.diff(psi, x[i], x[j]) / psi
            val += (lap_psi / psi - (n - 1) * grad2_psi / psi**2) * delta
            val -= (m / phi) * (
                sp.diff(phi, x[i], x[j])
                + (
                    sp.diff(psi, x[i]) * sp.diff(phi, x[j])
                    + sp.diff(psi, x[j]) * sp.diff(phi, x[i])
                )
                / psi
                - cross / psi * delta
            )
            out[i, j] = out[j, i] = val
    return out


def warped_fiber_ricci_coefficient(
    coords: Sequence[sp.Symbol], psi: sp.Expr, phi: sp.Expr, m, mu
) -> sp.Expr:
    """Fiber-block Ricci of the same warped metric, as the scalar
    coefficient multiplying the fiber Einstein metric g_can:

    mu - phi psi^2 (Lap phi - (n-2) <grad phi, grad psi>/psi)
       - (m-1) psi^2 |grad phi|^2.
    """
    x = list(coords)
    n = len(x)
    m, mu = sp.sympify(m), sp.sympify(mu)
    lap_phi = sp.Add(*[sp.diff(phi, xi, 2) for xi in x])
    grad2_phi = sp.Add(*[sp.diff(phi, xi) ** 2 for xi in x])
    cross = sp.Add(*[sp.diff(phi, xi) * sp.diff(psi, xi) for xi in x])
    return (
        mu
        - phi * psi**2 * (lap_phi - (n - 2) * cross / psi)
        - (m - 1) * psi**2 * grad2_phi
    )
