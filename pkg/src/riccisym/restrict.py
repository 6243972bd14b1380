"""Restriction of the full metric-component symmetry family to metric
ansätze.

Given an ansatz expressing the metric entries through a few scalar
fields (conformal factor, warping functions, ...), the generic
characteristic of the full symmetry family is pushed through the ansatz:
the overdetermined linear system

    Q_X(g_ij)|_S = sum_k (d g_ij / d u_k) * Q_{u_k}

is split into solvable definitions of the induced characteristics
Q_{u_k} and residual constraints on the spatial components xi^k and the
constants c_1, c_2.  Abstract fiber blocks are carried as a single
scalar entry ``(warping)^2 * g_can`` with the canonical fiber metric
kept as an opaque positive symbol; the fiber components of xi are zero
for such blocks (a non-constant fiber metric coefficient cannot appear
in the induced characteristics), which is recorded as a note.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import random

import sympy as sp
from sympy.core.function import AppliedUndef

from .expr import ExprError, Verdict, ZeroCheck, equals_zero, simplify, substitute
from .flow import FlowSystem, flow_residual, warped_system, doubly_warped_system
from .geometry import Chart, MetricFamily, generic_metric
from .jets import JetSpace, PointGenerator
from .lie import SymmetryVerdict, spatial_generator

__all__ = [
    "Ansatz",
    "AnsatzEntry",
    "RestrictionResult",
    "RankDeficiencyError",
    "ANSATZ_NAMES",
    "get_ansatz",
    "restrict",
    "instantiate",
    "check_system_symmetry",
    "verify_restricted_algebra",
    "conformal2d_system",
    "conformal_rn_system",
    "einstein_invariance_check",
    "audit_scaling_candidates",
    "audit_doubly_warped_spatial",
]


C1, C2, C3 = sp.symbols("c1 c2 c3")

#: opaque components of canonical fiber metrics (never expanded)
GCAN = sp.Symbol("gcan", positive=True)
GCAN_P = sp.Symbol("gcanp", positive=True)
GCAN_Q = sp.Symbol("gcanq", positive=True)


class RankDeficiencyError(ExprError):
    """The field -> metric-entry map is rank deficient at a probe point."""


@dataclass(frozen=True)
class AnsatzEntry:
    """One scalar equation of the ansatz: a metric entry (or abstract
    fiber block coefficient) together with the eta-component the full
    symmetry family induces on it."""

    label: str
    expr: sp.Expr
    eta: sp.Expr


@dataclass(frozen=True)
class Ansatz:
    name: str
    chart: Chart
    fields: tuple  # ((value symbol, function application), ...)
    entries: tuple  # (AnsatzEntry, ...)
    constants: tuple  # free constants of the family, e.g. (c1, c2)
    xi: tuple  # spatial component functions xi^k(x)
    params: dict = field(default_factory=dict)
    notes: tuple = ()

    def space(self) -> JetSpace:
        return JetSpace(self.chart.coords, self.chart.time, self.fields)


@dataclass(frozen=True)
class RestrictionResult:
    ansatz: Ansatz
    constraints: tuple  # expressions in xi, c that must vanish
    characteristics: dict  # field value symbol -> Q in mixed form
    generator: PointGenerator  # restricted generator on (t, x, u)
    notes: tuple = ()


# ---------------------------------------------------------------------------
# Ansatz registry
# ---------------------------------------------------------------------------


def _coords(n: int, base: str = "x"):
    if n == 1:
        return (sp.Symbol(base),)
    return tuple(sp.Symbol(f"{base}{i + 1}") for i in range(n))


def _xi_funcs(coords):
    return tuple(
        sp.Function(f"xi{k + 1}")(*coords) for k in range(len(coords))
    )


def _base_entries(matrix, coords, xi):
    """Base-block entries with the induced eta
    c2 g_ij - sum_k (g_kj d_i xi^k + g_ki d_j xi^k)."""
    n = len(coords)
    out = []
    for i in range(n):
        for j in range(i, n):
            eta = C2 * matrix[i][j]
            for k in range(n):
                eta -= matrix[k][j] * sp.diff(xi[k], coords[i])
                eta -= matrix[k][i] * sp.diff(xi[k], coords[j])
            out.append(AnsatzEntry(f"g{i + 1}{j + 1}", matrix[i][j], eta))
    return out


def _conformal2d() -> Ansatz:
    coords = _coords(2, "x")
    t = sp.Symbol("t")
    u_f = sp.Function("u")(*coords, t)
    xi = _xi_funcs(coords)
    mat = [[sp.exp(u_f), sp.Integer(0)], [sp.Integer(0), sp.exp(u_f)]]
    return Ansatz(
        "conformal2d",
        Chart(coords, t),
        ((sp.Symbol("u"), u_f),),
        tuple(_base_entries(mat, coords, xi)),
        (C1, C2),
        xi,
    )


def _conformal_rn(n: int) -> Ansatz:
    coords = _coords(n)
    t = sp.Symbol("t")
    psi_f = sp.Function("psi")(*coords, t)
    xi = _xi_funcs(coords)
    mat = [
        [psi_f ** -2 if i == j else sp.Integer(0) for j in range(n)]
        for i in range(n)
    ]
    return Ansatz(
        "conformal_rn",
        Chart(coords, t),
        ((sp.Symbol("psi"), psi_f),),
        tuple(_base_entries(mat, coords, xi)),
        (C1, C2),
        xi,
        params={"n": n},
    )


def _einstein_static(n: int) -> Ansatz:
    coords = _coords(n)
    t = sp.Symbol("t")
    xi = _xi_funcs(coords)
    fields = []
    mat = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            f = sp.Function(f"u{i + 1}{j + 1}")(*coords)  # time independent
            fields.append((sp.Symbol(f"u{i + 1}{j + 1}"), f))
            mat[i][j] = mat[j][i] = f
    return Ansatz(
        "einstein_static",
        Chart(coords, t),
        tuple(fields),
        tuple(_base_entries(mat, coords, xi)),
        (C1, C2),
        xi,
        params={"n": n},
        notes=(
            "time translation acts trivially on time-independent metrics",
        ),
    )


def _warped(n: int, m, mu, name: str, homothety: bool) -> Ansatz:
    coords = _coords(n)
    t = sp.Symbol("t")
    psi_f = sp.Function("psi")(*coords, t)
    phi_f = sp.Function("phi")(*coords, t)
    xi = _xi_funcs(coords)
    mat = [
        [psi_f ** -2 if i == j else sp.Integer(0) for j in range(n)]
        for i in range(n)
    ]
    entries = _base_entries(mat, coords, xi)
    fiber = phi_f**2 * GCAN
    fiber_eta = C2 * fiber + (2 * C3 * fiber if homothety else 0)
    entries.append(AnsatzEntry("fiber", fiber, fiber_eta))
    constants = (C1, C2, C3) if homothety else (C1, C2)
    notes = (
        "fiber components of xi vanish: the canonical fiber metric has "
        "non-constant coefficients, so any fiber drift would leak g_can "
        "derivatives into the induced characteristics",
    )
    if homothety:
        notes += (
            "flat fiber admits the extra homothety constant c3 "
            "(fiber-only scaling)",
        )
    return Ansatz(
        name,
        Chart(coords, t),
        ((sp.Symbol("psi"), psi_f), (sp.Symbol("phi"), phi_f)),
        tuple(entries),
        constants,
        xi,
        params={"n": n, "m": sp.sympify(m), "mu": sp.sympify(mu)},
        notes=notes,
    )


def _doubly_warped(p, q) -> Ansatz:
    x, t = sp.Symbol("x"), sp.Symbol("t")
    chi_f = sp.Function("chi")(x, t)
    phi_f = sp.Function("phi")(x, t)
    psi_f = sp.Function("psi")(x, t)
    xi = _xi_funcs((x,))
    entries = _base_entries([[chi_f**2]], (x,), xi)
    entries.append(AnsatzEntry("fiber_p", phi_f**2 * GCAN_P, C2 * phi_f**2 * GCAN_P))
    entries.append(AnsatzEntry("fiber_q", psi_f**2 * GCAN_Q, C2 * psi_f**2 * GCAN_Q))
    return Ansatz(
        "doubly_warped",
        Chart((x,), t),
        (
            (sp.Symbol("chi"), chi_f),
            (sp.Symbol("phi"), phi_f),
            (sp.Symbol("psi"), psi_f),
        ),
        tuple(entries),
        (C1, C2),
        xi,
        params={"p": sp.sympify(p), "q": sp.sympify(q)},
        notes=(
            "fiber components of xi vanish on both sphere factors "
            "(non-constant canonical metric coefficients)",
        ),
    )


ANSATZ_NAMES = (
    "conformal2d",
    "conformal_rn",
    "einstein_static",
    "warped_einstein_fiber",
    "warped_euclidean_fiber",
    "doubly_warped",
)


def get_ansatz(name: str, **params) -> Ansatz:
    if name == "conformal2d":
        return _conformal2d()
    if name == "conformal_rn":
        return _conformal_rn(int(params.get("n", 2)))
    if name == "einstein_static":
        return _einstein_static(int(params.get("n", 2)))
    if name == "warped_einstein_fiber":
        m = sp.sympify(params.get("m", 2))
        mu = sp.sympify(params.get("mu", m - 1))
        return _warped(int(params.get("n", 1)), m, mu, name, homothety=False)
    if name == "warped_euclidean_fiber":
        m = sp.sympify(params.get("m", 2))
        return _warped(int(params.get("n", 1)), m, 0, name, homothety=True)
    if name == "doubly_warped":
        return _doubly_warped(params.get("p", 2), params.get("q", 2))
    raise ExprError(f"unknown ansatz {name!r}; known: {ANSATZ_NAMES}")


# ---------------------------------------------------------------------------
# The restriction computation
# ---------------------------------------------------------------------------


def _field_coefficients(expr: sp.Expr, apps):
    """d expr / d u_k treating each field application as an atom."""
    mask = {a: sp.Dummy() for a in apps}
    em = expr.xreplace(mask)
    return [em.diff(mask[a]).xreplace({v: k for k, v in mask.items()}) for a in apps]


def _numeric_rank_rows(a_matrix, rng: random.Random):
    """Greedy row selection reaching full column rank, decided at a
    random rational probe point."""
    atoms = set()
    for row in a_matrix:
        for v in row:
            atoms |= v.atoms(sp.Symbol) | v.atoms(AppliedUndef)
    point = {a: sp.Rational(rng.randint(13, 109), 64) for a in atoms}
    numeric = [
        [sp.nsimplify(v.xreplace(point)) for v in row] for row in a_matrix
    ]
    m = len(a_matrix[0])
    chosen: list[int] = []
    current = sp.zeros(0, m)
    for idx, row in enumerate(numeric):
        cand = current.col_join(sp.Matrix([row]))
        if cand.rank() > current.rank():
            chosen.append(idx)
            current = cand
        if len(chosen) == m:
            break
    return chosen, current.rank()


def _canonical_constraint(e: sp.Expr, unknown_heads) -> sp.Expr | None:
    """Strip field-dependent multiplicative factors and normalize."""

    def involves(part: sp.Expr) -> bool:
        if part.has(*[c for c in (C1, C2, C3)]):
            return True
        for f in part.atoms(AppliedUndef):
            if f.func in unknown_heads:
                return True
        return False

    e = simplify(e)
    if e == 0:
        return None
    num, _ = sp.fraction(sp.together(e))
    num = sp.factor(num)
    if num.is_Mul:
        kept = [a for a in num.args if involves(a)]
        num = sp.Mul(*kept) if kept else num
    num = sp.expand(num)
    content, prim = sp.factor_terms(num).as_content_primitive()
    if prim.could_extract_minus_sign():
        prim = -prim
    return prim


def restrict(ansatz: Ansatz, seed: int = 0x5EED) -> RestrictionResult:
    """Push the generic characteristic through the ansatz."""
    coords, t = ansatz.chart.coords, ansatz.chart.time
    apps = tuple(f for _, f in ansatz.fields)
    heads = {f.func for f in apps}
    xi_heads = {x.func for x in ansatz.xi}

    lhs_rows, coeff_rows, labels = [], [], []
    for entry in ansatz.entries:
        lhs = entry.eta - (C1 + C2 * t) * sp.diff(entry.expr, t)
        for k, xk in enumerate(ansatz.xi):
            lhs -= xk * sp.diff(entry.expr, coords[k])
        lhs_rows.append(lhs)
        coeff_rows.append(_field_coefficients(entry.expr, apps))
        labels.append(entry.label)

    chosen, rank = _numeric_rank_rows(coeff_rows, random.Random(seed))
    if rank < len(apps):
        raise RankDeficiencyError(
            f"ansatz {ansatz.name!r}: field map has rank {rank} < {len(apps)}"
        )
    a_sel = sp.Matrix([coeff_rows[i] for i in chosen])
    b_sel = sp.Matrix([lhs_rows[i] for i in chosen])
    q_solved = a_sel.LUsolve(b_sel)
    q_by_field = {
        sym: simplify(q_solved[k]) for k, (sym, _) in enumerate(ansatz.fields)
    }

    constraints = []
    for i, (lhs, row) in enumerate(zip(lhs_rows, coeff_rows)):
        if i in chosen:
            continue
        residual = sp.Add(
            *[c * q_by_field[sym] for c, (sym, _) in zip(row, ansatz.fields)]
        ) - lhs
        canon = _canonical_constraint(residual, xi_heads)
        if canon is None:
            continue
        if any(sp.cancel(canon / prev).is_number for prev in constraints):
            continue
        constraints.append(canon)

    space = ansatz.space()
    characteristics = {
        sym: simplify(space.to_mixed(q)) for sym, q in q_by_field.items()
    }

    # recover the point components: eta_u = Q_u + xi^t u_t + sum xi^s u_s
    xi_t = C1 + C2 * t
    eta = {}
    for sym, _ in ansatz.fields:
        val = characteristics[sym] + xi_t * space.jet(sym, t)
        for xk, xs in zip(ansatz.xi, coords):
            val += space.to_mixed(xk) * space.jet(sym, xs)
        val = simplify(val)
        if space.jet_atoms(val):
            raise ExprError(
                f"restricted eta for {sym} retains jet coordinates: {val}"
            )
        eta[sym] = val
    generator = PointGenerator(
        space, xi_t, tuple(space.to_mixed(xk) for xk in ansatz.xi), eta
    )
    return RestrictionResult(
        ansatz, tuple(constraints), characteristics, generator, ansatz.notes
    )


def instantiate(
    result: RestrictionResult, xi_values, constants: dict | None = None
) -> PointGenerator:
    """Concrete member of the restricted family: substitute explicit
    spatial components and constant values into the generator."""
    ansatz = result.ansatz
    bindings: dict = {}
    for xk, val in zip(ansatz.xi, xi_values):
        bindings[xk] = sp.sympify(val)
    values = {C1: 0, C2: 0, C3: 0}
    values.update(constants or {})
    for c in (C1, C2, C3):
        bindings[c] = sp.sympify(values[c])
    gen = result.generator
    return PointGenerator(
        gen.space,
        substitute(gen.xi_t, bindings),
        tuple(substitute(c, bindings) for c in gen.xi),
        {s: substitute(v, bindings) for s, v in gen.eta.items()},
    )


# ---------------------------------------------------------------------------
# Verification against field-space PDE systems
# ---------------------------------------------------------------------------


def check_system_symmetry(
    gen: PointGenerator, residuals, rules
) -> SymmetryVerdict:
    """Linearized symmetry condition for a generator on an arbitrary
    field-space PDE system given by residual expressions (mixed form)
    and first-order evolution rules."""
    space = gen.space
    entries = {}
    for idx, res in enumerate(residuals):
        e = space.apply_prolonged(gen, res)
        e = space.on_shell(e, rules)
        check = equals_zero(e)
        entries[idx] = check
        if not check.is_zero:
            return SymmetryVerdict(
                False,
                entries,
                failing_entry=idx,
                witness=check.witness,
                witness_value=check.witness_value,
            )
    return SymmetryVerdict(True, entries)


def verify_restricted_algebra(claimed, residuals, rules):
    """Verdict per claimed generator against the reduced PDE system."""
    return [check_system_symmetry(gen, residuals, rules) for gen in claimed]


def conformal2d_system():
    """Jet space, residual, and evolution rule for the 2-d conformal
    metric e^u (dx1^2 + dx2^2):  u_t = e^-u (u_11 + u_22)."""
    x1, x2, t = sp.symbols("x1 x2 t")
    u_f = sp.Function("u")(x1, x2, t)
    u_s = sp.Symbol("u")
    metric = MetricFamily(
        Chart((x1, x2), t),
        {(0, 0): sp.exp(u_f), (1, 1): sp.exp(u_f)},
        fields=(u_f,),
    )
    space = JetSpace((x1, x2), t, [(u_s, u_f)])
    res = flow_residual(metric)
    residuals = [space.to_mixed(res[i, j]) for i in range(2) for j in range(i, 2)]
    u_t = space.jet(u_s, t)
    rules = {u_s: sp.solve(residuals[0], u_t)[0]}
    return space, residuals, rules


def conformal_rn_system(n: int):
    """The conformal flow on R^n (warped system with no fiber term)."""
    space, residuals, rules = warped_system(n, 0, 0)
    # with m = 0 the phi equation decouples to phi_t = 0; drop phi
    psi_s = space.dependents[0][0]
    psi_f = space.dependents[0][1]
    pure = JetSpace(space.spatial, space.time, [(psi_s, psi_f)])
    kept = residuals[:-1]
    return pure, kept, {psi_s: rules[psi_s]}


# ---------------------------------------------------------------------------
# Static (Einstein) invariance and the normalization audits
# ---------------------------------------------------------------------------


def einstein_invariance_check(n: int, xi=None) -> list:
    """Invariance of the Ricci tensor under the static restricted family.

    For the scaling generator sum g_ij d/dg_ij the Ricci tensor is
    exactly invariant; for a spatial generator X_xi it transforms as a
    covariant 2-tensor, so
    pr X(R_ab) + sum_k (d_a xi^k R_kb + d_b xi^k R_ka) = 0 identically.
    Either identity implies the zero set Ric = 0 is preserved.  Returns
    one ZeroCheck per independent entry.
    """
    chart = Chart(_coords(n, "x") if n > 1 else (sp.Symbol("x1"),))
    flow = FlowSystem(generic_metric(chart))
    space = flow.space
    ric = flow.ricci_mixed
    if xi is None:
        gen = PointGenerator(
            space,
            sp.Integer(0),
            (sp.Integer(0),) * n,
            {s: s for s, _ in space.dependents},
        )
        correction = sp.zeros(n, n)
    else:
        xi = tuple(sp.sympify(c) for c in xi)
        gen = spatial_generator(flow, xi)
        correction = sp.Matrix(
            n,
            n,
            lambda a, b: sp.Add(
                *[
                    sp.diff(xi[k], chart.coords[a]) * ric[min(k, b), max(k, b)]
                    + sp.diff(xi[k], chart.coords[b]) * ric[min(k, a), max(k, a)]
                    for k in range(n)
                ]
            ),
        )
    checks = []
    for a in range(n):
        for b in range(a, n):
            e = space.apply_prolonged(gen, ric[a, b]) + correction[a, b]
            checks.append(equals_zero(e))
    return checks


def _verdict_report(v: SymmetryVerdict) -> dict:
    out = {
        "is_symmetry": v.is_symmetry,
        "entries": {str(k): c.verdict.value for k, c in v.entries.items()},
    }
    if not v.is_symmetry:
        out["failing_entry"] = str(v.failing_entry)
        out["witness"] = v.witness
        out["witness_value"] = v.witness_value
    return out


def audit_scaling_candidates(fiber: str = "einstein", n: int = 1, m=2) -> dict:
    """Compare the two scaling normalizations found in the source
    material for the warped flow: the stated generator
    t d/dt - psi/2 d/dpsi + phi/2 d/dphi against the closing display
    2t d/dt + d/dphi - psi d/dpsi.  Both are checked against the warped
    PDE system; the report says which one verifies.
    """
    m = sp.sympify(m)
    mu = m - 1 if fiber == "einstein" else sp.Integer(0)
    space, residuals, rules = warped_system(n, m, mu)
    t = space.time
    psi_s = sp.Symbol("psi")
    phi_s = sp.Symbol("phi")
    zeros = (sp.Integer(0),) * n
    stated = PointGenerator(
        space, t, zeros, {psi_s: -psi_s / 2, phi_s: phi_s / 2}
    )
    closing = PointGenerator(
        space, 2 * t, zeros, {psi_s: -psi_s, phi_s: sp.Integer(1)}
    )
    report = {
        "system": {
            "ansatz": f"warped_{fiber}_fiber",
            "n": n,
            "m": int(m),
            "mu": str(mu),
        },
        "candidates": {},
    }
    for name, gen in (("statement", stated), ("closing_display", closing)):
        report["candidates"][name] = _verdict_report(
            check_system_symmetry(gen, residuals, rules)
        )
    report["verified"] = sorted(
        name
        for name, r in report["candidates"].items()
        if r["is_symmetry"]
    )
    return report


def audit_doubly_warped_spatial(p=2, q=2, xi_expr=None) -> dict:
    """Compare the two normalizations of the spatial generator on the
    doubly-warped flow: the stated xi d/dx - chi xi' d/dchi against the
    derivation's characteristic carrying -(chi/2) xi'."""
    space, residuals, rules = doubly_warped_system(p, q)
    x = space.spatial[0]
    chi_s = sp.Symbol("chi")
    xi_expr = sp.sympify(xi_expr) if xi_expr is not None else x**2
    dxi = sp.diff(xi_expr, x)
    stated = PointGenerator(space, sp.Integer(0), (xi_expr,), {chi_s: -chi_s * dxi})
    halved = PointGenerator(
        space, sp.Integer(0), (xi_expr,), {chi_s: -chi_s * dxi / 2}
    )
    report = {
        "system": {"ansatz": "doubly_warped", "p": int(p), "q": int(q)},
        "xi": str(xi_expr),
        "candidates": {},
    }
    for name, gen in (("statement", stated), ("halved_characteristic", halved)):
        report["candidates"][name] = _verdict_report(
            check_system_symmetry(gen, residuals, rules)
        )
    report["verified"] = sorted(
        name
        for name, r in report["candidates"].items()
        if r["is_symmetry"]
    )
    return report
