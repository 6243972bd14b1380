"""Expression kernel.

Thin, contract-stable layer over sympy expressions: a fixed grammar with
parser and printer, a canonical simplifier with a small deterministic
rewrite set, exact differentiation, simultaneous substitution, numeric
evaluation, a probabilistic zero test, and collection of coefficients by
jet monomial.

Conventions used throughout the package:

* symbols are plain ``sympy.Symbol``;
* unknown scalar fields are undefined ``sympy.Function`` applications with
  an explicit argument list, e.g. ``u(x1, x2, t)``;
* jet coordinates are ``sympy.Derivative`` atoms of those applications
  (sympy keeps the multi-index sorted, so mixed partials are symmetric by
  construction).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import sympy as sp
from sympy.core.function import AppliedUndef

__all__ = [
    "BUILTIN_FUNCTIONS",
    "ExprError",
    "ParseError",
    "EvalError",
    "MonomialKey",
    "Verdict",
    "ZeroCheck",
    "parse",
    "to_string",
    "simplify",
    "diff",
    "substitute",
    "eval_numeric",
    "equals_zero",
    "collect_monomials",
    "protected_replace",
    "jet_atoms",
    "random_expression",
]

BUILTIN_FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
}

_BUILTIN_BY_CLASS = {v: k for k, v in BUILTIN_FUNCTIONS.items() if v is not sp.sqrt}

#: Beyond this node count the symbolic zero attempt is skipped and
#: ``equals_zero`` falls straight through to numeric probing.
SIMPLIFY_NODE_LIMIT = 10_000

_PROBE_SEED = 0x5EED
_PROBE_POINTS = 8
_PROBE_MAX_REDRAWS = 32
_PROBE_TOLERANCE = sp.Float("1e-9")


class ExprError(Exception):
    """Base class for kernel errors."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalError(ExprError):
    """Unbound symbol or domain violation during numeric evaluation."""


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_OPS = ("+", "-", "*", "/", "^", "(", ")", ",")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            tokens.append(("number", text[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        if c in _TOKEN_OPS:
            tokens.append(("op", c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    """Precedence-climbing parser for the expression grammar.

    Binding powers: ``+ -`` < ``* /`` < unary minus < ``^`` (right
    associative).  Implicit multiplication is rejected by construction:
    two adjacent primaries never parse.
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, val, at = self.peek()
        if kind != "op" or val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", at)
        return self.advance()

    def parse(self) -> sp.Expr:
        e = self.expression(0)
        kind, val, at = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {val!r}", at)
        return e

    def expression(self, min_bp: int) -> sp.Expr:
        kind, val, at = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            # unary minus binds tighter than * but looser than ^
            operand = self.expression(30)
            left = sp.Mul(sp.Integer(-1), operand)
        elif kind == "op" and val == "+":
            self.advance()
            left = self.expression(30)
        else:
            left = self.primary()
        while True:
            kind, val, at = self.peek()
            if kind != "op" or val not in ("+", "-", "*", "/", "^"):
                break
            lbp, rbp = {
                "+": (10, 11),
                "-": (10, 11),
                "*": (20, 21),
                "/": (20, 21),
                "^": (40, 39),  # right associative
            }[val]
            if lbp < min_bp:
                break
            self.advance()
            right = self.expression(rbp)
            if val == "+":
                left = sp.Add(left, right)
            elif val == "-":
                left = sp.Add(left, sp.Mul(sp.Integer(-1), right))
            elif val == "*":
                left = sp.Mul(left, right)
            elif val == "/":
                left = sp.Mul(left, sp.Pow(right, sp.Integer(-1)))
            else:
                left = sp.Pow(left, right)
        return left

    def primary(self) -> sp.Expr:
        kind, val, at = self.advance()
        if kind == "number":
            if "." in val:
                return sp.Rational(val)
            return sp.Integer(val)
        if kind == "op" and val == "(":
            e = self.expression(0)
            self.expect(")")
            return e
        if kind == "ident":
            nxt_kind, nxt_val, _ = self.peek()
            if nxt_kind == "op" and nxt_val == "(":
                return self.call(val, at)
            return sp.Symbol(val)
        raise ParseError(f"unexpected token {val or 'end of input'!r}", at)

    def call(self, name: str, at: int) -> sp.Expr:
        self.expect("(")
        args = [self.expression(0)]
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == ",":
                self.advance()
                args.append(self.expression(0))
            else:
                break
        self.expect(")")
        if name == "D":
            return self.derivative(args, at)
        if name in BUILTIN_FUNCTIONS:
            if len(args) != 1:
                raise ParseError(f"builtin {name!r} takes one argument", at)
            return BUILTIN_FUNCTIONS[name](args[0])
        # unknown function with an explicit symbol argument list
        for a in args:
            if not isinstance(a, sp.Symbol):
                raise ParseError(
                    f"unknown function {name!r} requires symbol arguments", at
                )
        return sp.Function(name)(*args)

    def derivative(self, args: list[sp.Expr], at: int) -> sp.Expr:
        if len(args) not in (2, 3):
            raise ParseError("D takes (expr, sym) or (expr, sym, order)", at)
        target, var = args[0], args[1]
        if not isinstance(var, sp.Symbol):
            raise ParseError("D requires a symbol to differentiate by", at)
        order = 1
        if len(args) == 3:
            if not (args[2].is_Integer and args[2] > 0):
                raise ParseError("D order must be a positive integer", at)
            order = int(args[2])
        return sp.diff(target, var, order)


def parse(text: str) -> sp.Expr:
    """Parse grammar text into a canonicalized expression."""
    return simplify(_Parser(text).parse())


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def _print_pow(base: sp.Expr, expo: sp.Expr) -> str:
    bs = to_string(base)
    if isinstance(base, (sp.Add, sp.Mul, sp.Pow)) or (base.is_Number and base < 0) or (
        base.is_Rational and not base.is_Integer
    ):
        bs = f"({bs})"
    es = to_string(expo)
    if isinstance(expo, (sp.Add, sp.Mul, sp.Pow)) or (expo.is_Number and expo < 0) or (
        expo.is_Rational and not expo.is_Integer
    ):
        es = f"({es})"
    return f"{bs}^{es}"


def _print_factor(f: sp.Expr) -> str:
    s = to_string(f)
    if isinstance(f, sp.Add) or (f.is_Number and f < 0):
        return f"({s})"
    return s


def to_string(e: sp.Expr) -> str:
    """Print an expression in the grammar accepted by :func:`parse`."""
    e = sp.sympify(e)
    if e.is_Integer:
        return str(e)
    if e.is_Rational:
        if e.p < 0:
            return f"-{-e.p}/{e.q}"
        return f"{e.p}/{e.q}"
    if isinstance(e, sp.Symbol):
        return e.name
    if isinstance(e, sp.Add):
        terms = sp.Add.make_args(e)
        terms = sorted(terms, key=sp.default_sort_key)
        parts = []
        for i, t in enumerate(terms):
            coeff, _ = t.as_coeff_Mul()
            if i > 0 and coeff < 0:
                parts.append(f" - {_print_factor(-t)}")
            elif i > 0:
                parts.append(f" + {to_string(t)}")
            else:
                parts.append(to_string(t))
        return "".join(parts)
    if isinstance(e, sp.Mul):
        coeff, rest = e.as_coeff_Mul()
        num, den = [], []
        if coeff == -1:
            prefix = "-"
        elif coeff == 1:
            prefix = ""
        else:
            prefix = None
        factors = sp.Mul.make_args(rest)
        factors = sorted(factors, key=sp.default_sort_key)
        for f in factors:
            if isinstance(f, sp.Pow) and f.exp.is_Rational and f.exp < 0:
                if f.exp == -1:
                    den.append(_print_factor(f.base))
                else:
                    den.append(_print_pow(f.base, -f.exp))
            else:
                num.append(_print_factor(f))
        if prefix is None:
            if coeff.is_Integer:
                num.insert(0, to_string(coeff))
            else:
                num.insert(0, str(abs(coeff.p)) if abs(coeff.p) != 1 else "")
                num = [x for x in num if x]
                den.append(str(coeff.q))
                if coeff.p < 0:
                    num.insert(0, "-" + num.pop(0)) if num else num.append("-1")
            prefix = ""
            if coeff.p < 0 and not coeff.is_Integer:
                prefix = "-"
                if num and num[0].startswith("-"):
                    num[0] = num[0][1:]
        s = prefix + ("*".join(num) if num else "1")
        for d in den:
            s += f"/{d}"
        return s
    if isinstance(e, sp.Pow):
        if e.exp == sp.Rational(1, 2):
            return f"sqrt({to_string(e.base)})"
        if e.exp == sp.Rational(-1, 2):
            return f"1/sqrt({to_string(e.base)})"
        return _print_pow(e.base, e.exp)
    if isinstance(e, sp.Derivative):
        inner = to_string(e.expr)
        for var, count in e.variable_count:
            if count == 1:
                inner = f"D({inner}, {var.name})"
            else:
                inner = f"D({inner}, {var.name}, {count})"
        return inner
    if e.func in _BUILTIN_BY_CLASS:
        return f"{_BUILTIN_BY_CLASS[e.func]}({to_string(e.args[0])})"
    if isinstance(e, AppliedUndef):
        return f"{e.func.__name__}({', '.join(to_string(a) for a in e.args)})"
    if e is sp.E:
        return "exp(1)"
    raise ExprError(f"cannot print node {e!r} in the kernel grammar")


# ---------------------------------------------------------------------------
# Canonical simplification
# ---------------------------------------------------------------------------


def _rewrite_even_powers(e: sp.Expr) -> sp.Expr:
    """sin^2 -> 1 - cos^2 and sinh^2 -> cosh^2 - 1 (even powers only)."""

    def rule(p: sp.Pow) -> sp.Expr:
        base, expo = p.base, p.exp
        if not (expo.is_Integer and expo >= 2):
            return p
        k, r = divmod(int(expo), 2)
        if isinstance(base, sp.sin):
            return (1 - sp.cos(base.args[0]) ** 2) ** k * base**r
        if isinstance(base, sp.sinh):
            return (sp.cosh(base.args[0]) ** 2 - 1) ** k * base**r
        return p

    return e.replace(lambda p: isinstance(p, sp.Pow), rule)


def simplify(e: sp.Expr) -> sp.Expr:
    """Canonical form: expanded, rationals folded, like terms collected,
    the fixed trig/hyperbolic rewrite set applied, rational functions in
    lowest terms.  Idempotent and total."""
    e = sp.sympify(e)
    e = sp.expand(_rewrite_even_powers(sp.expand(e)))
    e = sp.powsimp(e)
    if e.is_Atom:
        return e
    num, den = sp.fraction(sp.together(e))
    if den == 1:
        return sp.expand(num)
    result = sp.cancel(num / den)
    n2, d2 = sp.fraction(result)
    return sp.expand(n2) / d2


def diff(e: sp.Expr, s: sp.Symbol, order: int = 1) -> sp.Expr:
    """Exact partial derivative; unknown functions produce jet atoms."""
    return simplify(sp.diff(sp.sympify(e), s, order))


def protected_replace(e: sp.Expr, rules: Mapping[sp.Expr, sp.Expr]) -> sp.Expr:
    """Simultaneous structural replacement that never rewrites inside a
    Derivative atom unless the atom itself is a key.

    Plain ``xreplace`` would rewrite the function application inside
    ``Derivative(u(x, t), x)`` and collapse the node; here derivative
    atoms are shielded with dummies first.
    """
    e = sp.sympify(e)
    rules = {sp.sympify(k): sp.sympify(v) for k, v in rules.items()}
    derivs = [d for d in e.atoms(sp.Derivative) if d not in rules]
    shield = {d: sp.Dummy() for d in derivs}
    # symbol-level rules still act inside a shielded derivative (e.g.
    # parameter substitution), but replacing a function application there
    # would corrupt the jet coordinate, so those rules stay outside
    inner_rules = {
        k: v for k, v in rules.items() if not isinstance(k, AppliedUndef)
    }
    unshield = {v: k.xreplace(inner_rules) for k, v in shield.items()}
    return e.xreplace(shield).xreplace(rules).xreplace(unshield)


def substitute(e: sp.Expr, bindings: Mapping) -> sp.Expr:
    """Simultaneous substitution followed by canonical simplification.

    Keys may be symbols, unknown-function applications, or jet
    coordinates (Derivative atoms), given as expressions or grammar
    strings.  A jet coordinate of an unknown function that is bound to an
    explicit expression is replaced by the matching derivative of that
    expression.
    """
    e = sp.sympify(e)
    parsed: dict[sp.Expr, sp.Expr] = {}
    for k, v in bindings.items():
        key = _Parser(k).parse() if isinstance(k, str) else sp.sympify(k)
        val = _Parser(v).parse() if isinstance(v, str) else sp.sympify(v)
        if key in parsed and parsed[key] != val:
            raise ExprError(f"inconsistent binding for {key}")
        parsed[key] = val
    # function applications bound to explicit expressions: rewrite their
    # jet coordinates by differentiating the bound expression
    func_rules = {
        k: v for k, v in parsed.items() if isinstance(k, AppliedUndef)
    }
    extra: dict[sp.Expr, sp.Expr] = {}
    for d in e.atoms(sp.Derivative):
        if d in parsed:
            continue
        if isinstance(d.expr, AppliedUndef) and d.expr in func_rules:
            repl = func_rules[d.expr]
            for var, count in d.variable_count:
                repl = sp.diff(repl, var, count)
            extra[d] = repl
    parsed.update(extra)
    return simplify(protected_replace(e, parsed))


# ---------------------------------------------------------------------------
# Numeric evaluation and the zero test
# ---------------------------------------------------------------------------


def _numeric_atoms(e: sp.Expr) -> list[sp.Expr]:
    """Atoms that behave as independent real quantities: jet coordinates,
    unknown-function applications, and free symbols."""
    derivs = sorted(e.atoms(sp.Derivative), key=sp.default_sort_key)
    inner_funcs = set()
    for d in derivs:
        inner_funcs |= d.atoms(AppliedUndef)
    funcs = sorted(e.atoms(AppliedUndef), key=sp.default_sort_key)
    syms = sorted(e.free_symbols, key=sp.default_sort_key)
    used_args = set()
    for f in funcs:
        used_args |= f.free_symbols
    # symbols appearing only as unknown-function arguments are not values
    atoms = list(derivs) + list(funcs)
    atoms += [s for s in syms]
    return atoms


def eval_numeric(e: sp.Expr, assignment: Mapping) -> float:
    """IEEE double evaluation of ``e`` with every free quantity bound.

    ``assignment`` maps symbols / function applications / jet
    coordinates (or their grammar strings) to numbers.
    """
    e = sp.sympify(e)
    rules = {}
    for k, v in assignment.items():
        key = _Parser(k).parse() if isinstance(k, str) else sp.sympify(k)
        rules[key] = sp.Float(v)
    bound = protected_replace(e, rules)
    # arguments of still-bound function applications are gone by now
    leftovers = [
        a
        for a in _numeric_atoms(bound)
        if not a.is_Number and a not in rules
    ]
    leftovers = [a for a in leftovers if not a.is_Number]
    if leftovers:
        raise EvalError(f"unbound quantities: {leftovers}")
    val = sp.N(bound, 30)
    if val.has(sp.zoo, sp.oo, -sp.oo, sp.nan):
        raise EvalError(f"domain error evaluating {e}")
    val = sp.nsimplify(val, rational=False) if val.is_Number else val
    cval = complex(val)
    if abs(cval.imag) > 1e-12 * max(1.0, abs(cval.real)):
        raise EvalError(f"non-real value {cval} for {e}")
    return float(cval.real)


class Verdict(Enum):
    ZERO_SYMBOLIC = "ZeroSymbolic"
    ZERO_PROBABILISTIC = "ZeroProbabilistic"
    NONZERO = "NonZero"


@dataclass(frozen=True)
class ZeroCheck:
    verdict: Verdict
    witness: dict | None = None
    witness_value: float | None = None
    note: str | None = None

    @property
    def is_zero(self) -> bool:
        return self.verdict in (Verdict.ZERO_SYMBOLIC, Verdict.ZERO_PROBABILISTIC)

    def __bool__(self) -> bool:
        return self.is_zero


def _probe_function(e: sp.Expr, atoms: list[sp.Expr]):
    """Compile ``e`` to an mpmath callable of the numeric atoms (jet
    coordinates and function applications are masked by fresh symbols
    first so the expression becomes a plain closed-form function)."""
    mask = {a: sp.Symbol(f"_probe{i}") for i, a in enumerate(atoms)}
    em = protected_replace(e, mask)
    return sp.lambdify(list(mask.values()), em, modules="mpmath", cse=True)


def _probe_once(f, atoms: list[sp.Expr], rng: random.Random):
    import mpmath as mp

    point = {a: sp.Rational(rng.randint(13, 109), 64) for a in atoms}
    with mp.workdps(30):
        try:
            val = f(*[mp.mpf(v.p) / v.q for v in point.values()])
        except (
            ZeroDivisionError,
            ValueError,
            OverflowError,
            mp.libmp.ComplexResult,
        ) as exc:
            raise EvalError(f"probe hit a domain error: {exc}") from exc
        if isinstance(val, mp.mpc):
            if abs(val.imag) > mp.mpf("1e-20") * max(1, abs(val.real)):
                raise EvalError("probe left the real domain")
            val = val.real
        if not mp.isfinite(val):
            raise EvalError("probe hit a singular point")
    return point, val


def equals_zero(e: sp.Expr, seed: int = _PROBE_SEED) -> ZeroCheck:
    """Decide whether ``e`` is identically zero.

    Symbolic route first (canonical simplification, skipped above a node
    budget), then 8 deterministic pseudo-random probe points with all
    independent quantities drawn from [0.2, 1.7].
    """
    e = sp.sympify(e)
    if e.is_zero:
        return ZeroCheck(Verdict.ZERO_SYMBOLIC)
    if sp.count_ops(e) <= SIMPLIFY_NODE_LIMIT:
        # cheap pre-pass: combine over a common denominator and expand
        # the numerator, which settles most rational-function cases
        num, _ = sp.fraction(sp.together(e))
        if sp.expand(num).is_zero:
            return ZeroCheck(Verdict.ZERO_SYMBOLIC)
        s = simplify(e)
        if s.is_zero:
            return ZeroCheck(Verdict.ZERO_SYMBOLIC)
        e = s
    atoms = _numeric_atoms(e)
    f = _probe_function(e, atoms)
    rng = random.Random(seed)
    probes = 0
    attempts = 0
    while probes < _PROBE_POINTS:
        if attempts >= _PROBE_MAX_REDRAWS:
            return ZeroCheck(
                Verdict.NONZERO,
                note="indeterminate: probe points kept hitting domain errors",
            )
        attempts += 1
        try:
            point, val = _probe_once(f, atoms, rng)
        except EvalError:
            continue
        if abs(val) >= float(_PROBE_TOLERANCE):
            witness = {str(k): float(v) for k, v in point.items()}
            return ZeroCheck(Verdict.NONZERO, witness=witness, witness_value=float(val))
        probes += 1
    return ZeroCheck(Verdict.ZERO_PROBABILISTIC)


# ---------------------------------------------------------------------------
# Jet monomial collection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonomialKey:
    """Multiset of jet coordinates with multiplicities; empty = constant."""

    entries: tuple[tuple[sp.Expr, int], ...] = ()

    @staticmethod
    def of(*atoms_with_mult) -> "MonomialKey":
        acc: dict[sp.Expr, int] = {}
        for item in atoms_with_mult:
            if isinstance(item, tuple):
                a, m = item
            else:
                a, m = item, 1
            a = sp.sympify(a)
            acc[a] = acc.get(a, 0) + int(m)
        entries = tuple(
            sorted(
                ((a, m) for a, m in acc.items() if m),
                key=lambda am: sp.default_sort_key(am[0]),
            )
        )
        return MonomialKey(entries)

    @property
    def is_constant(self) -> bool:
        return not self.entries

    def degree(self) -> int:
        return sum(m for _, m in self.entries)

    def as_expr(self) -> sp.Expr:
        return sp.Mul(*[a**m for a, m in self.entries]) if self.entries else sp.Integer(1)

    def derivative_orders(self) -> list[int]:
        """Differential order of each factor, with multiplicity."""
        orders = []
        for a, m in self.entries:
            if isinstance(a, sp.Derivative):
                o = sum(c for _, c in a.variable_count)
            else:
                o = 0
            orders += [o] * m
        return sorted(orders)

    def family(self) -> str:
        """Bucket label mirroring how determining equations are grouped."""
        orders = self.derivative_orders()
        if not orders:
            return "no-derivative terms"
        label = {0: "g", 1: "dg", 2: "ddg", 3: "dddg"}
        return " ".join(label.get(o, f"d^{o}g") for o in orders) + " terms"

    def __str__(self) -> str:
        if not self.entries:
            return "1"
        return "*".join(
            str(a) if m == 1 else f"({a})^{m}" for a, m in self.entries
        )


def jet_atoms(e: sp.Expr, max_order: int | None = None) -> list[sp.Expr]:
    """Derivative atoms of unknown functions in ``e``, optionally capped
    by differential order."""
    out = []
    for d in sorted(sp.sympify(e).atoms(sp.Derivative), key=sp.default_sort_key):
        order = sum(c for _, c in d.variable_count)
        if max_order is None or order <= max_order:
            out.append(d)
    return out


def collect_monomials(
    e: sp.Expr, jet_vars: Iterable[sp.Expr]
) -> dict[MonomialKey, sp.Expr]:
    """Write ``e`` exactly as  sum over keys of coefficient * monomial,
    where monomials are products of the given jet coordinates.

    Raises :class:`ExprError` on non-polynomial dependence on a jet
    variable (e.g. a jet coordinate in a denominator).
    """
    e = sp.sympify(e)
    jets = [sp.sympify(j) for j in jet_vars]
    shield = {j: sp.Dummy(f"J{i}") for i, j in enumerate(jets)}
    back = {v: k for k, v in shield.items()}
    masked = protected_replace(e, shield)
    masked = sp.expand(masked)
    dummies = set(shield.values())
    out: dict[MonomialKey, sp.Expr] = {}
    for term in sp.Add.make_args(masked):
        coeff_factors = []
        mults: dict[sp.Expr, int] = {}
        for f in sp.Mul.make_args(term):
            base, expo = f.as_base_exp()
            if base in dummies:
                if not (expo.is_Integer and expo > 0):
                    raise ExprError(
                        f"non-polynomial dependence on jet variable {back[base]}"
                    )
                mults[back[base]] = mults.get(back[base], 0) + int(expo)
            else:
                if f.has(*dummies):
                    raise ExprError(
                        "jet variable occurs inside a non-polynomial subterm "
                        f"of {f}"
                    )
                coeff_factors.append(f)
        key = MonomialKey.of(*mults.items())
        coeff = sp.Mul(*coeff_factors).xreplace(back)
        out[key] = out.get(key, sp.Integer(0)) + coeff
    return {k: v for k, v in out.items() if not v.is_zero}


# ---------------------------------------------------------------------------
# Random expression generation (for kernel-health checks)
# ---------------------------------------------------------------------------


def random_expression(
    rng: random.Random,
    symbols: list[sp.Symbol],
    depth: int = 3,
    allow_division: bool = True,
) -> sp.Expr:
    """Random smooth expression over the given symbols.

    Used by kernel-health property tests and the finite-difference
    harness; coefficients are small rationals so central differences stay
    well conditioned.
    """
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return sp.Rational(rng.randint(-6, 6), rng.randint(1, 4))
        return rng.choice(symbols)
    kind = rng.random()
    if kind < 0.35:
        return sp.Add(
            random_expression(rng, symbols, depth - 1, allow_division),
            random_expression(rng, symbols, depth - 1, allow_division),
        )
    if kind < 0.65:
        return sp.Mul(
            random_expression(rng, symbols, depth - 1, allow_division),
            random_expression(rng, symbols, depth - 1, allow_division),
        )
    if kind < 0.75:
        base = random_expression(rng, symbols, depth - 1, False)
        return base ** rng.choice([2, 3])
    if kind < 0.85 and allow_division:
        num = random_expression(rng, symbols, depth - 1, allow_division)
        den = rng.choice(symbols) ** 2 + sp.Integer(rng.randint(1, 3))
        return num / den
    fn = rng.choice([sp.sin, sp.cos, sp.sinh, sp.cosh, sp.exp])
    arg = random_expression(rng, symbols, depth - 1, False)
    return fn(arg / 4)
