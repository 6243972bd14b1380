"""Command-line surface.

Commands operate on JSON documents:

Metric spec::

    {"chart": {"coords": ["x1", "x2"], "time": "t"},
     "fields": [{"name": "u", "args": ["x1", "x2", "t"]}],
     "metric": {"1,1": "exp(u(x1,x2,t))", "1,2": "0",
                "2,2": "exp(u(x1,x2,t))"}}

Generator file::

    {"xi_t": "c1 + c2*t", "xi": ["0", "0"],
     "eta": {"1,1": "g11", "1,2": "g12", "2,2": "g22"},
     "constants": ["c1", "c2"]}

For ``check-symmetry --ansatz <name>`` the generator's ``eta`` is keyed
by field name (psi, phi, chi, u) instead of metric indices.

Exit codes: 0 success / verified; 1 verification failed (a witness is
reported); 2 malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys

import sympy as sp

from . import expr as ex
from .expr import ExprError, Verdict
from .flow import FlowSystem, flow_residual, warped_system, doubly_warped_system
from .geometry import Chart, MetricFamily
from .jets import JetSpace, PointGenerator
from .lie import check_symmetry, commutator
from .numerics import Grid, grid_residual
from .reduce import get_solution, reduced_system, verify_closed_form
from .restrict import (
    check_system_symmetry,
    conformal2d_system,
    conformal_rn_system,
    get_ansatz,
    restrict,
)

__all__ = ["main"]


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _render(value, fmt: str):
    if isinstance(value, sp.Basic):
        return sp.latex(value) if fmt == "latex" else ex.to_string(value)
    if isinstance(value, Verdict):
        return value.value
    if isinstance(value, dict):
        return {str(k): _render(v, fmt) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_render(v, fmt) for v in value]
    return value


def _print_tree(value, indent=""):
    if isinstance(value, dict):
        for k in value:
            v = value[k]
            if isinstance(v, (dict, list)):
                print(f"{indent}{k}:")
                _print_tree(v, indent + "  ")
            else:
                print(f"{indent}{k}: {v}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                _print_tree(v, indent + "  ")
            else:
                print(f"{indent}- {v}")
    else:
        print(f"{indent}{value}")


def _emit(report: dict, fmt: str):
    rendered = _render(report, fmt)
    if fmt == "json":
        sys.stdout.write(json.dumps(rendered, sort_keys=True, indent=2) + "\n")
    else:
        _print_tree(rendered)


# ---------------------------------------------------------------------------
# Input documents
# ---------------------------------------------------------------------------


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _parse_metric_spec(doc: dict) -> MetricFamily:
    try:
        coords = tuple(sp.Symbol(c) for c in doc["chart"]["coords"])
        time = sp.Symbol(doc["chart"].get("time", "t"))
        chart = Chart(coords, time)
        fields = []
        for f in doc.get("fields", []):
            args = tuple(sp.Symbol(a) for a in f["args"])
            fields.append(sp.Function(f["name"])(*args))
        entries = {}
        for key, text in doc["metric"].items():
            i, j = (int(part) for part in key.split(","))
            if not (1 <= i <= chart.n and 1 <= j <= chart.n):
                raise InputError(f"metric index {key!r} out of range")
            entries[(i - 1, j - 1)] = ex.parse(text)
        return MetricFamily(chart, entries, tuple(fields))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError, ExprError) as exc:
        raise InputError(f"bad metric spec: {exc}") from exc


def _parse_generator(doc: dict, space: JetSpace, eta_keys: str) -> PointGenerator:
    try:
        xi_t = ex.parse(doc.get("xi_t", "0"))
        xi_texts = doc.get("xi", ["0"] * len(space.spatial))
        xi = tuple(ex.parse(s) for s in xi_texts)
        eta = {}
        for key, text in doc.get("eta", {}).items():
            if eta_keys == "metric":
                i, j = (int(part) for part in key.split(","))
                sym = sp.Symbol(f"g{min(i, j)}{max(i, j)}")
            else:
                sym = sp.Symbol(key)
            if sym not in {s for s, _ in space.dependents}:
                raise InputError(f"eta key {key!r} matches no dependent variable")
            eta[sym] = ex.parse(text)
        return PointGenerator(space, xi_t, xi, eta)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError, ExprError) as exc:
        raise InputError(f"bad generator file: {exc}") from exc


def _parse_params(text: str | None) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if not item:
            continue
        if "=" not in item:
            raise InputError(f"bad parameter assignment {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = sp.nsimplify(val.strip(), rational=True)
    return out


def _ansatz_system(name: str, params: dict):
    if name == "conformal2d":
        return conformal2d_system()
    if name == "conformal_rn":
        return conformal_rn_system(int(params.get("n", 2)))
    if name in ("warped_einstein_fiber", "warped_euclidean_fiber"):
        m = sp.sympify(params.get("m", 2))
        mu = params.get("mu", m - 1 if name == "warped_einstein_fiber" else 0)
        return warped_system(int(params.get("n", 1)), m, mu)
    if name == "doubly_warped":
        return doubly_warped_system(params.get("p", 2), params.get("q", 2))
    raise InputError(f"no PDE system available for ansatz {name!r}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_christoffel(args) -> int:
    metric = _parse_metric_spec(_load_json(args.spec))
    gamma = metric.christoffel_lower
    n = metric.n
    report = {
        "christoffel_lower": {
            f"{tau + 1},{gam + 1},{alp + 1}": ex.simplify(gamma[tau][gam][alp])
            for tau in range(n)
            for gam in range(n)
            for alp in range(n)
        }
    }
    _emit(report, args.format)
    return 0


def _cmd_ricci(args) -> int:
    metric = _parse_metric_spec(_load_json(args.spec))
    ric = metric.ricci
    report = {
        "ricci": {
            f"{i + 1},{j + 1}": ex.simplify(ric[i, j])
            for i in range(metric.n)
            for j in range(i, metric.n)
        }
    }
    _emit(report, args.format)
    return 0


def _cmd_flow_residual(args) -> int:
    metric = _parse_metric_spec(_load_json(args.spec))
    res = flow_residual(metric)
    entries = {}
    verdicts = {}
    for i in range(metric.n):
        for j in range(i, metric.n):
            key = f"{i + 1},{j + 1}"
            entries[key] = ex.simplify(res[i, j])
            verdicts[key] = ex.equals_zero(res[i, j]).verdict
    report = {"residual": entries, "verdict": verdicts}
    _emit(report, args.format)
    return 0


def _verdict_report(verdict) -> dict:
    out = {
        "is_symmetry": verdict.is_symmetry,
        "entries": {str(k): c.verdict for k, c in verdict.entries.items()},
    }
    if not verdict.is_symmetry:
        out["failing_entry"] = str(verdict.failing_entry)
        out["witness"] = verdict.witness
        out["witness_value"] = verdict.witness_value
    return out


def _cmd_check_symmetry(args) -> int:
    gen_doc = _load_json(args.generator)
    if args.ansatz:
        space, residuals, rules = _ansatz_system(
            args.ansatz, _parse_params(args.params)
        )
        gen = _parse_generator(gen_doc, space, eta_keys="fields")
        verdict = check_system_symmetry(gen, residuals, rules)
    else:
        if not args.spec:
            raise InputError("check-symmetry needs a metric spec or --ansatz")
        metric = _parse_metric_spec(_load_json(args.spec))
        flow = FlowSystem(metric)
        gen = _parse_generator(gen_doc, flow.space, eta_keys="metric")
        verdict = check_symmetry(gen, flow)
    _emit({"check_symmetry": _verdict_report(verdict)}, args.format)
    return 0 if verdict.is_symmetry else 1


def _cmd_restrict(args) -> int:
    params = _parse_params(args.params)
    ansatz = get_ansatz(args.ansatz, **params)
    result = restrict(ansatz)
    gen = result.generator
    report = {
        "ansatz": ansatz.name,
        "constraints": [ex.simplify(c) for c in result.constraints],
        "characteristics": {
            str(s): q for s, q in result.characteristics.items()
        },
        "generator": {
            "xi_t": gen.xi_t,
            "xi": list(gen.xi),
            "eta": {str(s): v for s, v in gen.eta.items()},
        },
        "notes": list(result.notes),
    }
    _emit(report, args.format)
    return 0


def _cmd_reduce(args) -> int:
    params = _parse_params(args.params)
    system = reduced_system(args.family, **params)
    report = {
        "family": system.family,
        "variable": system.variable,
        "functions": list(system.functions),
        "residuals": [ex.simplify(r) for r in system.residuals],
        "params": {str(k): v for k, v in system.params.items()},
    }
    if system.arc_residuals is not None:
        report["arc_residuals"] = [ex.simplify(r) for r in system.arc_residuals]
    _emit(report, args.format)
    return 0


def _cmd_verify_solution(args) -> int:
    sol = get_solution(args.name)
    params = _parse_params(args.params)
    defaults = {"k": 1, "m": 2, "p": 2, "q": 2}
    grid_params = {
        str(p): params.get(str(p), defaults[str(p)]) for p in sol.params
    }
    if args.grid:
        try:
            s0, s1, ns, t0, t1, nt = (float(v) for v in args.grid.split(","))
        except ValueError as exc:
            raise InputError(f"bad --grid value: {exc}") from exc
        grid = Grid((s0, s1), (t0, t1), int(ns), int(nt), grid_params)
    else:
        grid = Grid(params=grid_params)
    symbolic = verify_closed_form(sol)
    numeric = grid_residual(sol, grid)
    ok = symbolic["verdict"] == Verdict.ZERO_SYMBOLIC and numeric["max_abs"] < 1e-10
    report = {
        "solution": sol.name,
        "symbolic": symbolic["verdict"],
        "reduced_equations": [c.verdict for c in symbolic["reduced"]],
        "flow_residuals": [c.verdict for c in symbolic["full"]],
        "numeric_max_abs": numeric["max_abs"],
        "numeric_argmax": numeric["argmax"],
        "grid": numeric["grid"],
        "verified": ok,
    }
    _emit(report, args.format)
    return 0 if ok else 1


def _cmd_bracket(args) -> int:
    doc_x = _load_json(args.left)
    doc_y = _load_json(args.right)
    if args.spec:
        metric = _parse_metric_spec(_load_json(args.spec))
        space = FlowSystem(metric).space
    else:
        n = 0
        for doc in (doc_x, doc_y):
            for key in doc.get("eta", {}):
                i, j = (int(part) for part in key.split(","))
                n = max(n, i, j)
            n = max(n, len(doc.get("xi", [])))
        if n == 0:
            raise InputError("cannot infer dimension; provide --spec")
        coords = tuple(sp.Symbol(f"x{i + 1}") for i in range(n))
        t = sp.Symbol("t")
        deps = []
        for i in range(n):
            for j in range(i, n):
                f = sp.Function(f"g{i + 1}{j + 1}")(*coords, t)
                deps.append((sp.Symbol(f"g{i + 1}{j + 1}"), f))
        space = JetSpace(coords, t, deps)
    x = _parse_generator(doc_x, space, eta_keys="metric")
    y = _parse_generator(doc_y, space, eta_keys="metric")
    z = commutator(x, y)
    report = {
        "bracket": {
            "xi_t": ex.simplify(z.xi_t),
            "xi": [ex.simplify(c) for c in z.xi],
            "eta": {str(s): ex.simplify(v) for s, v in z.eta.items()},
        }
    }
    _emit(report, args.format)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riccisym",
        description="Symbolic symmetry analysis of the Ricci flow",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument(
            "--format",
            choices=("text", "json", "latex"),
            default="text",
        )

    p = sub.add_parser("christoffel", help="lower Christoffel symbols")
    p.add_argument("spec")
    common(p)
    p.set_defaults(func=_cmd_christoffel)

    p = sub.add_parser("ricci", help="Ricci tensor")
    p.add_argument("spec")
    common(p)
    p.set_defaults(func=_cmd_ricci)

    p = sub.add_parser("flow-residual", help="E = d_t g + 2 Ric")
    p.add_argument("spec")
    common(p)
    p.set_defaults(func=_cmd_flow_residual)

    p = sub.add_parser("check-symmetry", help="linearized symmetry condition")
    p.add_argument("spec", nargs="?")
    p.add_argument("--generator", required=True)
    p.add_argument("--ansatz")
    p.add_argument("--params")
    common(p)
    p.set_defaults(func=_cmd_check_symmetry)

    p = sub.add_parser("restrict", help="restricted symmetry family")
    p.add_argument("--ansatz", required=True)
    p.add_argument("--params")
    common(p)
    p.set_defaults(func=_cmd_restrict)

    p = sub.add_parser("reduce", help="reduced ODE system")
    p.add_argument("--family", required=True)
    p.add_argument("--params")
    common(p)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("verify-solution", help="closed-form verification")
    p.add_argument("--name", required=True)
    p.add_argument("--params")
    p.add_argument("--grid", help="s0,s1,ns,t0,t1,nt")
    common(p)
    p.set_defaults(func=_cmd_verify_solution)

    p = sub.add_parser("bracket", help="commutator of two generators")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--spec")
    common(p)
    p.set_defaults(func=_cmd_bracket)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ExprError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
