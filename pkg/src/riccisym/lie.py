"""Infinitesimal generators for the metric jet space: construction,
second prolongation, the linearized symmetry condition, determining-
system extraction, and Lie brackets."""

from __future__ import annotations

from dataclasses import dataclass

import sympy as sp

from .expr import (
    ExprError,
    MonomialKey,
    Verdict,
    ZeroCheck,
    collect_monomials,
    equals_zero,
)
from .flow import FlowSystem
from .jets import JetSpace, PointGenerator

__all__ = [
    "SymmetryVerdict",
    "DeterminingSystem",
    "time_translation",
    "scaling_generator",
    "spatial_generator",
    "standard_generators",
    "generic_generator",
    "apply_prolonged",
    "check_symmetry",
    "commutator",
    "generators_equal",
    "determining_monomial_system",
    "monomial_coefficient",
]


# ---------------------------------------------------------------------------
# Generator constructors on a FlowSystem's jet space
# ---------------------------------------------------------------------------


def _dep_symbol(space: JetSpace, i: int, j: int) -> sp.Symbol:
    i, j = (i, j) if i <= j else (j, i)
    name = f"g{i + 1}{j + 1}"
    for s, _ in space.dependents:
        if s.name == name:
            return s
    raise ExprError(f"no metric component symbol {name}")


def time_translation(flow: FlowSystem) -> PointGenerator:
    """d/dt."""
    space = flow.space
    return PointGenerator(space, sp.Integer(1), (sp.Integer(0),) * len(space.spatial), {})


def scaling_generator(flow: FlowSystem) -> PointGenerator:
    """t d/dt + sum_{i<=j} g_ij d/dg_ij."""
    space = flow.space
    return PointGenerator(
        space,
        space.time,
        (sp.Integer(0),) * len(space.spatial),
        {s: s for s, _ in space.dependents},
    )


def spatial_generator(flow: FlowSystem, xi) -> PointGenerator:
    """xi^k d/dx^k - sum_{i<=j} (g_ki d_j xi^k + g_kj d_i xi^k) d/dg_ij
    for xi a vector of smooth functions of the spatial coordinates only.
    """
    space = flow.space
    n = len(space.spatial)
    xi = tuple(sp.sympify(c) for c in xi)
    if len(xi) != n:
        raise ExprError("xi must have one component per spatial coordinate")
    forbidden = {space.time} | {s for s, _ in space.dependents}
    for c in xi:
        if c.free_symbols & forbidden:
            raise ExprError("xi components may depend on x only")
    eta = {}
    for i in range(n):
        for j in range(i, n):
            val = sp.Integer(0)
            for k in range(n):
                val -= _dep_symbol(space, k, i) * sp.diff(xi[k], space.spatial[j])
                val -= _dep_symbol(space, k, j) * sp.diff(xi[k], space.spatial[i])
            eta[_dep_symbol(space, i, j)] = val
    return PointGenerator(space, sp.Integer(0), xi, eta)


def standard_generators(flow: FlowSystem, xi=None) -> list[PointGenerator]:
    """The time translation, the scaling generator, and (if ``xi`` is
    given) the spatial-diffeomorphism generator attached to it."""
    out = [time_translation(flow), scaling_generator(flow)]
    if xi is not None:
        out.append(spatial_generator(flow, xi))
    return out


def generic_generator(flow: FlowSystem) -> PointGenerator:
    """Generator with fully generic components: unknown functions of
    (t, x, g_(ij))."""
    space = flow.space
    args = (space.time,) + space.spatial + tuple(s for s, _ in space.dependents)
    xi_t = sp.Function("xit")(*args)
    xi = tuple(
        sp.Function(f"xi{k + 1}")(*args) for k in range(len(space.spatial))
    )
    eta = {
        s: sp.Function(f"eta_{s.name}")(*args) for s, _ in space.dependents
    }
    return PointGenerator(space, xi_t, xi, eta)


# ---------------------------------------------------------------------------
# Linearized symmetry condition
# ---------------------------------------------------------------------------


def apply_prolonged(gen: PointGenerator, flow: FlowSystem) -> list[tuple]:
    """pr^(2) X applied to each independent residual entry E_ab
    (a <= b); not yet on-shell.  Returns [((a, b), expression), ...]."""
    out = []
    n = flow.metric.n
    for a in range(n):
        for b in range(a, n):
            out.append(
                ((a, b), flow.space.apply_prolonged(gen, flow.residual[a, b]))
            )
    return out


@dataclass(frozen=True)
class SymmetryVerdict:
    is_symmetry: bool
    entries: dict
    failing_entry: tuple | None = None
    witness: dict | None = None
    witness_value: float | None = None

    def __bool__(self) -> bool:
        return self.is_symmetry


def check_symmetry(gen: PointGenerator, flow: FlowSystem) -> SymmetryVerdict:
    """Apply the second prolongation to the flow residual, substitute the
    flow equations, and test every entry for zero."""
    entries = {}
    for (a, b), expr in apply_prolonged(gen, flow):
        shifted = flow.space.on_shell(expr, flow.rules)
        check = equals_zero(shifted)
        entries[(a, b)] = check
        if not check.is_zero:
            return SymmetryVerdict(
                False,
                entries,
                failing_entry=(a, b),
                witness=check.witness,
                witness_value=check.witness_value,
            )
    return SymmetryVerdict(True, entries)


# ---------------------------------------------------------------------------
# Lie brackets
# ---------------------------------------------------------------------------


def _component_map(gen: PointGenerator) -> dict[sp.Symbol, sp.Expr]:
    space = gen.space
    out = {space.time: gen.xi_t}
    out.update(dict(zip(space.spatial, gen.xi)))
    for s, _ in space.dependents:
        out[s] = gen.eta[s]
    return out


def commutator(x: PointGenerator, y: PointGenerator) -> PointGenerator:
    """[X, Y] as a vector field on the point coordinates (t, x, g)."""
    if x.space is not y.space:
        raise ExprError("generators live on different jet spaces")
    space = x.space
    coords = [space.time, *space.spatial] + [s for s, _ in space.dependents]
    fx, fy = _component_map(x), _component_map(y)
    bracket = {}
    for a in coords:
        val = sp.Integer(0)
        for b in coords:
            val += fx[b] * sp.diff(fy[a], b) - fy[b] * sp.diff(fx[a], b)
        bracket[a] = sp.expand(val)
    return PointGenerator(
        space,
        bracket[space.time],
        tuple(bracket[c] for c in space.spatial),
        {s: bracket[s] for s, _ in space.dependents},
    )


def generators_equal(x: PointGenerator, y: PointGenerator) -> bool:
    diff = x + y.scaled(-1)
    comps = list(diff.components()) + [
        diff.eta[s] for s, _ in diff.space.dependents
    ]
    return all(equals_zero(c).is_zero for c in comps)


# ---------------------------------------------------------------------------
# Determining equations by jet-monomial extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeterminingSystem:
    """Coefficient equations keyed by the jet monomial they multiply,
    with a family label per monomial ("dg ddg terms" etc.)."""

    equations: tuple  # ((MonomialKey, family, coefficient), ...)

    def families(self) -> dict[str, list]:
        out: dict[str, list] = {}
        for key, family, coeff in self.equations:
            out.setdefault(family, []).append((key, coeff))
        return out

    def all_zero(self) -> bool:
        return all(
            equals_zero(coeff).is_zero for _, _, coeff in self.equations
        )


def monomial_coefficient(
    space: JetSpace, e: sp.Expr, key: MonomialKey
) -> sp.Expr:
    """Exact coefficient of one jet monomial, extracted by
    differentiation (no global expansion of ``e``)."""
    jets = space.jet_atoms(e)
    mask = {d: sp.Dummy() for d in jets}
    em = e.xreplace(mask)
    denom = sp.Integer(1)
    for atom, mult in key.entries:
        atom = sp.sympify(atom)
        if atom not in mask:
            return sp.Integer(0)
        em = sp.diff(em, mask[atom], mult)
        denom *= sp.factorial(mult)
    em = em.xreplace({d: sp.Integer(0) for d in mask.values()})
    return em / denom


def linearized_condition(gen: PointGenerator, flow: FlowSystem) -> list[tuple]:
    """On-shell linearized symmetry condition per residual entry."""
    out = []
    for (a, b), expr in apply_prolonged(gen, flow):
        out.append(((a, b), flow.space.on_shell(expr, flow.rules)))
    return out


def determining_monomial_system(
    flow: FlowSystem,
    gen: PointGenerator | None = None,
    monomials: list[MonomialKey] | None = None,
    entry: tuple[int, int] = (0, 0),
) -> DeterminingSystem:
    """Collect the on-shell linearized condition of one residual entry by
    jet monomial.

    With ``monomials`` given, only those coefficients are extracted (by
    differentiation, cheap even for the generic generator); otherwise the
    entry is fully expanded and collected.
    """
    if gen is None:
        gen = generic_generator(flow)
    space = flow.space
    a, b = entry
    expr = space.apply_prolonged(gen, flow.residual[a, b])
    expr = space.on_shell(expr, flow.rules)
    equations = []
    if monomials is not None:
        for key in monomials:
            coeff = monomial_coefficient(space, expr, key)
            equations.append((key, key.family(), coeff))
    else:
        for key, coeff in collect_monomials(
            expr, space.jet_atoms(expr)
        ).items():
            equations.append((key, key.family(), coeff))
    return DeterminingSystem(tuple(equations))
