"""Symbolic Lie point symmetry analysis of the Ricci flow.

Layered API:

* :mod:`riccisym.expr` — expression kernel (grammar, canonical
  simplification, zero testing, jet monomial collection);
* :mod:`riccisym.jets` — jet spaces, total derivatives, prolongation;
* :mod:`riccisym.geometry` — charts, metric families, curvature;
* :mod:`riccisym.flow` — the flow residual E = d_t g + 2 Ric and its
  on-shell rules, plus the warped / doubly-warped field systems;
* :mod:`riccisym.lie` — generators, symmetry checks, brackets,
  determining equations;
* :mod:`riccisym.restrict` — ansatz restriction of the symmetry family;
* :mod:`riccisym.reduce` — similarity reductions and the closed-form
  solution library;
* :mod:`riccisym.numerics` — grid evaluation and finite-difference
  cross-checks;
* :mod:`riccisym.cli` — command-line interface.
"""

from .expr import (
    EvalError,
    ExprError,
    MonomialKey,
    ParseError,
    Verdict,
    ZeroCheck,
    diff,
    equals_zero,
    eval_numeric,
    parse,
    simplify,
    substitute,
    to_string,
)
from .flow import FlowSystem, doubly_warped_system, flow_residual, warped_system
from .geometry import Chart, MetricFamily, SingularMetricError, generic_metric
from .jets import JetSpace, OnShellError, PointGenerator
from .lie import (
    SymmetryVerdict,
    check_symmetry,
    commutator,
    generators_equal,
    generic_generator,
    scaling_generator,
    spatial_generator,
    standard_generators,
    time_translation,
)
from .reduce import (
    ClosedFormSolution,
    ReducedSystem,
    closed_form_library,
    get_solution,
    reduced_system,
    verify_closed_form,
)
from .restrict import Ansatz, RestrictionResult, get_ansatz, restrict
from .numerics import Grid, fd_cross_check, grid_residual

__version__ = "0.1.0"
