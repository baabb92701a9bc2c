"""Boundary regularity of holomorphic functions via Poisson integrals."""

from rimtrace import _backend
from rimtrace.conformal import (
    ChartError,
    JordanChart,
    build_chart,
    classify_Ap_domain,
    compose,
    domain_seminorms,
    transfer_trace,
    verify_chain_rule,
)
from rimtrace.corpus import CorpusEntry, corpus_all, corpus_get
from rimtrace.extension import (
    ExtensionField,
    OrderError,
    ProximityError,
    arc_extend,
    hermite_bridge,
    poisson_extend,
    poisson_extend_dtheta,
    smooth_arc_completion,
    split_extension,
)
from rimtrace.kernel import KernelDomainError, herglotz_dz, herglotz_eval, poisson_dtheta, poisson_eval
from rimtrace.seminorms import (
    ChainRuleSystem,
    chain_polys,
    chain_rule_system,
    check_equivalence,
    coeff_sums,
    inverse_polys,
    seminorm,
    seminorms,
    trace_seminorms,
)
from rimtrace.series import (
    ArcTrace,
    BoundaryTrace,
    DomainError,
    PowerSeries,
    series_derivative,
    series_eval,
    trace_derivative,
    trace_from_series,
)
from rimtrace.smoothness import (
    ConvergenceReport,
    arc_classify,
    arc_convergence_check,
    arc_decay_check,
    classify_Ap,
    radial_sweep,
    verify_trace_formula,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusEntry",
    "corpus_all",
    "corpus_get",
    "KernelDomainError",
    "herglotz_dz",
    "herglotz_eval",
    "poisson_dtheta",
    "poisson_eval",
    "ChartError",
    "JordanChart",
    "build_chart",
    "classify_Ap_domain",
    "compose",
    "domain_seminorms",
    "transfer_trace",
    "verify_chain_rule",
    "ExtensionField",
    "OrderError",
    "ProximityError",
    "arc_extend",
    "hermite_bridge",
    "poisson_extend",
    "poisson_extend_dtheta",
    "smooth_arc_completion",
    "split_extension",
    "ChainRuleSystem",
    "chain_polys",
    "chain_rule_system",
    "check_equivalence",
    "coeff_sums",
    "inverse_polys",
    "seminorm",
    "seminorms",
    "trace_seminorms",
    "ArcTrace",
    "BoundaryTrace",
    "DomainError",
    "PowerSeries",
    "series_derivative",
    "series_eval",
    "trace_derivative",
    "trace_from_series",
    "ConvergenceReport",
    "arc_classify",
    "arc_convergence_check",
    "arc_decay_check",
    "classify_Ap",
    "radial_sweep",
    "verify_trace_formula",
]

backend = _backend.name
