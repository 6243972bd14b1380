"""Symmetry reduction of the warped and doubly-warped flows.

The generator X = (1 + 2kt) d/dt + (scaling parts) yields invariant
surface conditions whose solutions are similarity profiles

    psi = (1 + 2kt)^(-1/2) F(x),   phi = (1 + 2kt)^(1/2) G(x)

(warped) and chi, phi, psi = sqrt(1 + 2kt) * (F, G, H) (doubly-warped).
Substituting them into the flow turns the PDE systems into ODE systems
in x; re-parameterizing by arc length s (ds/dx = 1/F for the warped
base, ds/dx = F for the doubly-warped base) gives the constant-
coefficient forms solved in closed form by the solution library.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .expr import ExprError, Verdict, ZeroCheck, equals_zero, simplify, substitute
from .flow import doubly_warped_residuals
from .geometry import conformal_base_ricci, warped_fiber_ricci_coefficient
from .jets import JetSpace, PointGenerator

__all__ = [
    "ReducedSystem",
    "ClosedFormSolution",
    "SOLUTION_NAMES",
    "REDUCED_FAMILIES",
    "invariant_surface_conditions",
    "similarity_substitution",
    "reduced_system",
    "first_integral_form",
    "closed_form_library",
    "get_solution",
    "full_flow_residuals",
    "verify_closed_form",
]


REDUCED_FAMILIES = (
    "warped_general_n",
    "warped_1d_sphere_fiber",
    "doubly_warped",
)

_S = sp.Symbol("s")
_X = sp.Symbol("x")
_K = sp.Symbol("k")


@dataclass(frozen=True)
class ReducedSystem:
    family: str
    variable: sp.Symbol
    functions: tuple  # profile function applications
    residuals: tuple  # expressions that must vanish
    params: dict
    arc_residuals: tuple | None = None  # arc-length form, when emitted
    arc_functions: tuple | None = None


def invariant_surface_conditions(gen: PointGenerator) -> list:
    """Q_u = 0 equations of the generator, one per dependent field."""
    return [
        gen.characteristic()[s] for s, _ in gen.space.dependents
    ]


def similarity_substitution(family: str, k) -> dict:
    """Similarity profile bindings for the scaling-translation generator
    with parameter k != 0."""
    k = sp.sympify(k)
    if k == 0:
        raise ExprError("similarity substitution requires k != 0")
    t = sp.Symbol("t")
    tau = 1 + 2 * k * t
    if family in ("warped_general_n", "warped_1d_sphere_fiber"):
        x = _X
        return {
            sp.Function("psi")(x, t): tau ** sp.Rational(-1, 2)
            * sp.Function("F")(x),
            sp.Function("phi")(x, t): tau ** sp.Rational(1, 2)
            * sp.Function("G")(x),
        }
    if family == "doubly_warped":
        x = _X
        return {
            sp.Function("chi")(x, t): sp.sqrt(tau) * sp.Function("F")(x),
            sp.Function("phi")(x, t): sp.sqrt(tau) * sp.Function("G")(x),
            sp.Function("psi")(x, t): sp.sqrt(tau) * sp.Function("H")(x),
        }
    raise ExprError(f"unknown reduction family {family!r}")


def _check_params(family, params):
    if family == "doubly_warped":
        p, q = params["p"], params["q"]
        if p.is_number and p < 2 or q.is_number and q < 2:
            raise ExprError("doubly-warped reduction requires p >= 2, q >= 2")
    else:
        m = params["m"]
        if m.is_number and m < 1:
            raise ExprError("fiber dimension m must be at least 1")


def reduced_system(family: str, **params) -> ReducedSystem:
    """The reduced ODE system of a similarity family.

    warped_general_n(n, m, k[, mu]): profile system in x for F, G.
    warped_1d_sphere_fiber(m, k): n = 1 with unit-sphere fiber
        (mu = m - 1); also emits the arc-length form
        {m G''/G - k,  G'^2 - ((k/m) G^2 + 1)} with ds/dx = 1/F.
    doubly_warped(p, q, k): profile system in x for F, G, H; also emits
        the arc-length form with ds/dx = F.
    """
    k = sp.sympify(params.get("k", _K))
    if family == "warped_general_n":
        n = int(params.get("n", 1))
        m = sp.sympify(params.get("m", 2))
        mu = sp.sympify(params.get("mu", m - 1))
        _check_params(family, {"m": m})
        coords = (
            (_X,) if n == 1 else tuple(sp.Symbol(f"x{i+1}") for i in range(n))
        )
        F = sp.Function("F")(*coords)
        G = sp.Function("G")(*coords)
        ric = conformal_base_ricci(coords, F, G, m)
        residuals = []
        for i in range(n):
            for j in range(i, n):
                delta = 1 if i == j else 0
                residuals.append(ric[i, j] + delta * k / F**2)
        residuals.append(
            warped_fiber_ricci_coefficient(coords, F, G, m, mu) + k * G**2
        )
        return ReducedSystem(
            family,
            coords[0],
            (F, G),
            tuple(residuals),
            {"n": n, "m": m, "mu": mu, "k": k},
        )
    if family == "warped_1d_sphere_fiber":
        m = sp.sympify(params.get("m", 2))
        mu = m - 1
        _check_params(family, {"m": m})
        F = sp.Function("F")(_X)
        G = sp.Function("G")(_X)
        residuals = (
            k / F**2
            - (m / G) * (sp.diff(G, _X, 2) + sp.diff(F, _X) * sp.diff(G, _X) / F),
            k * G**2
            - (-mu + (k / m) * G**2 + (m - 1) * F**2 * sp.diff(G, _X) ** 2),
        )
        Gs = sp.Function("G")(_S)
        arc = (
            m * sp.diff(Gs, _S, 2) / Gs - k,
            sp.diff(Gs, _S) ** 2 - ((k / m) * Gs**2 + 1),
        )
        return ReducedSystem(
            family,
            _X,
            (F, G),
            residuals,
            {"m": m, "mu": mu, "k": k},
            arc_residuals=arc,
            arc_functions=(Gs,),
        )
    if family == "doubly_warped":
        p = sp.sympify(params.get("p", 2))
        q = sp.sympify(params.get("q", 2))
        _check_params(family, {"p": p, "q": q})
        F = sp.Function("F")(_X)
        G = sp.Function("G")(_X)
        H = sp.Function("H")(_X)
        Fx, Gx, Hx = (sp.diff(f, _X) for f in (F, G, H))
        residuals = (
            k * F**2
            - (p / G) * (sp.diff(G, _X, 2) - Gx * Fx / F)
            - (q / H) * (sp.diff(H, _X, 2) - Hx * Fx / F),
            k * G**2
            + (p - 1)
            - (G / F) ** 2
            * (
                sp.diff(G, _X, 2) / G
                - Gx * Fx / (F * G)
                + (p - 1) * (Gx / G) ** 2
                + q * Gx * Hx / (G * H)
            ),
            k * H**2
            + (q - 1)
            - (H / F) ** 2
            * (
                sp.diff(H, _X, 2) / H
                - Hx * Fx / (F * H)
                + (q - 1) * (Hx / H) ** 2
                + p * Gx * Hx / (G * H)
            ),
        )
        Gs = sp.Function("G")(_S)
        Hs = sp.Function("H")(_S)
        Gp, Hp = sp.diff(Gs, _S), sp.diff(Hs, _S)
        arc = (
            p * sp.diff(Gs, _S, 2) / Gs + q * sp.diff(Hs, _S, 2) / Hs - k,
            sp.diff(Gs, _S, 2) / Gs
            + (p - 1) * (Gp**2 - 1) / Gs**2
            + q * Gp * Hp / (Gs * Hs)
            - k,
            sp.diff(Hs, _S, 2) / Hs
            + (q - 1) * (Hp**2 - 1) / Hs**2
            + p * Gp * Hp / (Gs * Hs)
            - k,
        )
        return ReducedSystem(
            family,
            _X,
            (F, G, H),
            residuals,
            {"p": p, "q": q, "k": k},
            arc_residuals=arc,
            arc_functions=(Gs, Hs),
        )
    raise ExprError(f"unknown reduction family {family!r}")


def first_integral_form(m, k=_K) -> sp.Expr:
    """(F G_x)^2 - (k/m) G^2 - 1, the first integral equivalent to the
    second warped_1d_sphere_fiber equation."""
    m, k = sp.sympify(m), sp.sympify(k)
    F = sp.Function("F")(_X)
    G = sp.Function("G")(_X)
    return (F * sp.diff(G, _X)) ** 2 - (k / m) * G**2 - 1


# ---------------------------------------------------------------------------
# Closed-form solution library
# ---------------------------------------------------------------------------


SOLUTION_NAMES = (
    "warped_hyperbolic",
    "warped_spherical",
    "dw_sincos",
    "dw_sinsin",
    "dw_sinhsinh",
)


@dataclass(frozen=True)
class ClosedFormSolution:
    """A similarity solution in arc-length coordinates: the base profile
    is identically 1 (s is the arc length of the t = 0 base slice), the
    remaining profiles are explicit functions of s, and the time factor
    is 1 + 2 k_red t with k_red = +-k^2."""

    name: str
    family: str  # matching reduced_system family (arc form)
    params: tuple  # free parameter symbols, e.g. (k, m)
    k_red: sp.Expr  # reduction parameter in terms of the library's k
    time_factor: sp.Expr  # 1 + 2 k_red t
    profiles: dict  # profile name -> expression in s
    domain: str
    param_domain: dict = field(default_factory=dict)

    def fields(self) -> dict:
        """Full space-time warping functions over (s, t)."""
        t = sp.Symbol("t")
        tau = self.time_factor
        if self.family == "warped_1d_sphere_fiber":
            return {
                "psi": tau ** sp.Rational(-1, 2) * self.profiles["F"],
                "phi": sp.sqrt(tau) * self.profiles["G"],
            }
        return {
            "chi": sp.sqrt(tau) * self.profiles["F"],
            "phi": sp.sqrt(tau) * self.profiles["G"],
            "psi": sp.sqrt(tau) * self.profiles["H"],
        }


def closed_form_library() -> list:
    k = sp.Symbol("k", positive=True)
    m = sp.Symbol("m", positive=True)
    p = sp.Symbol("p", positive=True)
    q = sp.Symbol("q", positive=True)
    t = sp.Symbol("t")
    one = sp.Integer(1)
    w = k / sp.sqrt(m)  # warped frequency
    wd = k / sp.sqrt(p + q)  # doubly-warped frequency
    amp_g = sp.sqrt((p - 1) * (p + q) / (p + q - 1)) / k
    amp_h = sp.sqrt((q - 1) * (p + q) / (p + q - 1)) / k
    return [
        ClosedFormSolution(
            "warped_hyperbolic",
            "warped_1d_sphere_fiber",
            (k, m),
            k**2,
            1 + 2 * k**2 * t,
            {"F": one, "G": sp.sqrt(m) / k * sp.sinh(w * _S)},
            "s > 0; ancient-to-future expanding factor 1 + 2k^2 t > 0",
            {"m": "integer >= 2"},
        ),
        ClosedFormSolution(
            "warped_spherical",
            "warped_1d_sphere_fiber",
            (k, m),
            -(k**2),
            1 - 2 * k**2 * t,
            {"F": one, "G": sp.sqrt(m) / k * sp.sin(w * _S)},
            "0 < s < pi sqrt(m)/k; shrinking factor 1 - 2k^2 t > 0",
            {"m": "integer >= 2"},
        ),
        ClosedFormSolution(
            "dw_sincos",
            "doubly_warped",
            (k, p, q),
            -(k**2),
            1 - 2 * k**2 * t,
            {
                "F": one,
                "G": sp.sqrt(p + q) / k * sp.sin(wd * _S),
                "H": sp.sqrt(p + q) / k * sp.cos(wd * _S),
            },
            "0 < s < pi sqrt(p+q)/(2k); shrinking factor 1 - 2k^2 t > 0",
            {"p": "integer >= 2", "q": "integer >= 2"},
        ),
        ClosedFormSolution(
            "dw_sinsin",
            "doubly_warped",
            (k, p, q),
            -(k**2),
            1 - 2 * k**2 * t,
            {
                "F": one,
                "G": amp_g * sp.sin(wd * _S),
                "H": amp_h * sp.sin(wd * _S),
            },
            "0 < s < pi sqrt(p+q)/k; shrinking factor 1 - 2k^2 t > 0",
            {"p": "integer >= 2", "q": "integer >= 2"},
        ),
        ClosedFormSolution(
            "dw_sinhsinh",
            "doubly_warped",
            (k, p, q),
            k**2,
            1 + 2 * k**2 * t,
            {
                "F": one,
                "G": amp_g * sp.sinh(wd * _S),
                "H": amp_h * sp.sinh(wd * _S),
            },
            "s > 0; expanding factor 1 + 2k^2 t > 0",
            {"p": "integer >= 2", "q": "integer >= 2"},
        ),
    ]


def get_solution(name: str) -> ClosedFormSolution:
    for sol in closed_form_library():
        if sol.name == name:
            return sol
    raise ExprError(f"unknown solution {name!r}; known: {SOLUTION_NAMES}")


def full_flow_residuals(sol: ClosedFormSolution) -> list:
    """The flow residual E = d_t g + 2 Ric of the full space-time metric
    of the solution, as explicit expressions in (s, t) and the
    parameters (zero iff the metric solves the flow)."""
    t = sp.Symbol("t")
    fields = sol.fields()
    if sol.family == "warped_1d_sphere_fiber":
        m = sol.params[1]
        mu = m - 1
        psi, phi = fields["psi"], fields["phi"]
        ric = conformal_base_ricci((_S,), psi, phi, m)
        base = sp.diff(psi**-2, t) + 2 * ric[0, 0]
        fiber = sp.diff(phi**2, t) + 2 * warped_fiber_ricci_coefficient(
            (_S,), psi, phi, m, mu
        )
        return [base, fiber]
    _, p, q = sol.params
    chi, phi, psi = fields["chi"], fields["phi"], fields["psi"]
    # the E = 0 forms are chi*chi_t - ..., i.e. (d_t g + 2 Ric)/2 per block
    return doubly_warped_residuals(chi, phi, psi, _S, t, p, q)


def verify_closed_form(sol: ClosedFormSolution) -> dict:
    """Substitute the solution into its arc-length reduced system and
    into the full flow residual; report a ZeroCheck per equation and the
    combined verdict."""
    system = reduced_system(sol.family, k=sol.k_red, **_family_params(sol))
    bindings = {
        f: sol.profiles[f.func.__name__] for f in system.arc_functions
    }
    reduced_checks = [
        equals_zero(substitute(e, bindings)) for e in system.arc_residuals
    ]
    full_checks = [equals_zero(e) for e in full_flow_residuals(sol)]
    checks = reduced_checks + full_checks
    if all(c.verdict == Verdict.ZERO_SYMBOLIC for c in checks):
        verdict = Verdict.ZERO_SYMBOLIC
    elif all(c.is_zero for c in checks):
        verdict = Verdict.ZERO_PROBABILISTIC
    else:
        verdict = Verdict.NONZERO
    return {
        "name": sol.name,
        "reduced": reduced_checks,
        "full": full_checks,
        "verdict": verdict,
    }


def _family_params(sol: ClosedFormSolution) -> dict:
    if sol.family == "warped_1d_sphere_fiber":
        return {"m": sol.params[1]}
    return {"p": sol.params[1], "q": sol.params[2]}
