"""The twelve acceptance criteria, each at its stated tolerance.

Every test prints one ``[criterion N] PASS|FAIL ...`` line (visible with -s,
and collected in the terminal summary by the conftest hook).
"""

import math

import numpy as np
import pytest
from oracles import sympy_chain_polys
from rimtrace.conformal import ChartError, build_chart, compose, transfer_trace, verify_chain_rule
from rimtrace.corpus import CAP, corpus_all, corpus_get
from rimtrace.extension import arc_extend, poisson_extend, poisson_extend_dtheta
from rimtrace.kernel import poisson_eval
from rimtrace.seminorms import chain_polys, chain_rule_system, check_equivalence, composition_residual
from rimtrace.series import BoundaryTrace, PowerSeries, trace_from_series
from rimtrace.smoothness import (
    arc_convergence_check,
    arc_decay_check,
    classify_Ap,
    decay_bound,
    default_schedule,
    radial_sweep,
    verify_trace_formula,
)

TWO_PI = 2.0 * math.pi


@pytest.fixture
def report(acceptance_log):
    def _report(n: int, ok: bool, detail: str):
        line = f"[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        acceptance_log.append(line)
        assert ok, line

    return _report


def test_criterion_01_kernel_normalization(report):
    n = 8192
    t = TWO_PI * np.arange(n) / n
    worst = max(abs(poisson_eval(r, t).mean() - 1.0) for r in (0.0, 0.5, 0.9, 0.99))
    report(1, worst <= 1e-10, f"max |mean P_r - 1| = {worst:.3e} (tol 1e-10)")


def test_criterion_02_eigenfunctions(report):
    m = 128
    worst = 0.0
    theta = np.linspace(0.0, TWO_PI, 17, endpoint=False) + 0.1
    for k in range(-32, 33):
        u = BoundaryTrace.from_function(lambda t: np.exp(1j * k * t), m)
        for r in (0.5, 0.9, 0.99):
            got = poisson_extend(u, r * np.exp(1j * theta))
            want = r ** abs(k) * np.exp(1j * k * theta)
            worst = max(worst, float(np.max(np.abs(got - want))))
    report(2, worst <= 1e-8, f"max |P[e^ikt] - r^|k| e^ik theta| = {worst:.3e} over |k| <= 32 (tol 1e-8)")


def test_criterion_03_derivative_commutation(report):
    rng = np.random.default_rng(3)
    theta = np.linspace(0.0, TWO_PI, 24, endpoint=False)
    worst = 0.0
    for degree in (1, 4, 8):
        c = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
        ks = np.arange(-degree, degree + 1)

        def func(t, c=c, ks=ks):
            return np.exp(1j * np.multiply.outer(t, ks)) @ c

        u = BoundaryTrace.from_function(func, 64)
        for l in (0, 1, 2, 3):
            for r in (0.3, 0.6, 0.9):
                est = poisson_extend_dtheta(u, l, r * np.exp(1j * theta))
                worst = max(worst, est.discrepancy)
    report(3, worst <= 1e-10, f"max both-ways discrepancy = {worst:.3e} (tol 1e-10)")


def test_criterion_04_radial_sweep_closed_form(report):
    radii = default_schedule()
    worst = 0.0
    for k in (1, 3, 5):
        coeffs = np.zeros(k + 1)
        coeffs[k] = 1.0
        rep = radial_sweep(PowerSeries(coeffs), [0, 1, 2, 3], radii)
        for l in rep.orders:
            want = k**l * (1.0 - radii**k)
            worst = max(worst, float(np.max(np.abs(np.array(rep.errors_rim[l]) - want))))
    report(4, worst <= 1e-8, f"max |sweep error - k^l (1 - r^k)| = {worst:.3e} (tol 1e-8)")


def test_criterion_05_arc_decay_bound(report):
    u = corpus_get("arc_indicator").build()
    radii = [0.9, 0.99, 0.999, 0.9999]
    rep = arc_decay_check(u, (2.0, 5.0), 1, radii)
    analytic = float(decay_bound(1.0, 1.0, 0.9999, rep.cos_separation))
    ok = rep.violations == 0 and rep.sups[-1] <= 1e-3
    report(
        5,
        ok,
        f"violations = {rep.violations}, sup at r = 0.9999 is {rep.sups[-1]:.3e} "
        f"(bound {analytic:.2e}, tol 1e-3)",
    )


def test_criterion_06_rim_flatness(report):
    u = corpus_get("arc_cosine").build()
    # distance >= 0.1 from [0, 1] on the circle: theta in [1.1, 2 pi - 0.1]
    theta = np.linspace(1.1, TWO_PI - 0.1, 401)
    values = [arc_extend(u, l, np.exp(1j * theta)) for l in (0, 1, 2)]
    exact = all(np.all(v == 0.0) for v in values)
    worst = max(float(np.max(np.abs(v))) for v in values)
    report(6, exact, f"max |arc_extend| on the rim off the arc = {worst!r} (must be exactly 0)")


def test_criterion_07_chain_rule_polys(report):
    p = 4
    P = chain_polys(p)
    oracle = sympy_chain_polys(p)
    mismatches = 0
    for key, want in oracle.items():
        if P[key].terms != want:
            mismatches += 1
    residual_zero = all(r.is_zero() for r in composition_residual(chain_rule_system(p)).values())
    diag = all(P[(l, l)].terms == {l: _ipow(l)} for l in range(1, p + 1))
    ok = mismatches == 0 and residual_zero and diag
    report(7, ok, f"symbolic mismatches = {mismatches}, residual zero = {residual_zero}, P_ll = (iz)^l: {diag}")


def _ipow(l):
    return [(1, 0), (0, 1), (-1, 0), (0, -1)][l % 4]


def test_criterion_08_trace_formula(report):
    f = corpus_get("cubic_z3_2z").build()
    d1 = verify_trace_formula(f, m=1024, h=1e-4)
    d2 = verify_trace_formula(f, m=1024, h=5e-5)
    ratio = d1 / d2
    ok = d1 <= 1e-6 and 3.5 <= ratio <= 4.5
    report(8, ok, f"discrepancy {d1:.3e} at h = 1e-4 (tol 1e-6), halving ratio {ratio:.3f} (in [3.5, 4.5])")


def test_criterion_09_seminorm_equivalence(report):
    worst = math.inf
    names = []
    for entry in corpus_all(kind="series"):
        rep = check_equivalence(entry.build(), 3)
        worst = min(worst, rep.min_residual)
        names.append(entry.name)
    # chart fixture: the pull-back of w^2 under the accepted disk map
    chart = build_chart(corpus_get("conformal_z_0.3z2").build())
    rep = check_equivalence(compose(PowerSeries([0, 0, 1]), chart.phi).series, 3)
    worst = min(worst, rep.min_residual)
    report(9, worst >= -1e-9, f"min residual {worst:.3e} over {len(names) + 1} functions (tol -1e-9)")


def test_criterion_10_classifier(report):
    names = ["monomial_5", "zeta_series_1.5", "zeta_series_2.5", "zeta_series_3.5", "zeta_series_4.5"]
    want = [CAP, 0, 1, 2, 3]
    got, inconclusive = [], 0
    for name in names:
        res = classify_Ap(corpus_get(name).build(8192), p_max=4, j_range=(3, 14))
        got.append(CAP if res.capped else res.p_hat)
        inconclusive += res.inconclusive
    ok = got == want and inconclusive == 0
    report(10, ok, f"p_hat = {got} (want {want}), inconclusive verdicts = {inconclusive}")


def test_criterion_11_arc_convergence(report):
    u = corpus_get("arc_cosine").build()
    radii = [0.9, 0.99, 0.999]
    details, ok = [], True
    for l in (0, 1):
        rep = arc_convergence_check(u, l, (0.25, 0.75), radii, p=2)
        ok &= rep.decreasing and rep.sup_errors[-1] <= 1e-2
        details.append(f"l={l}: " + ", ".join(f"{e:.2e}" for e in rep.sup_errors))
    report(11, ok, "; ".join(details) + " (decreasing, final <= 1e-2)")


def test_criterion_12_conformal(report):
    chart = build_chart(PowerSeries([0.0, 1.0, 0.3]), m=1024)
    F = PowerSeries([0.0, 0.0, 1.0])
    disc = verify_chain_rule(F, chart, h=1e-4)

    ident = build_chart(PowerSeries([0.0, 1.0]), m=1024)
    f = corpus_get("cubic_z3_2z").build()
    trace_gap = float(np.max(np.abs(transfer_trace(f, ident).samples - trace_from_series(f, 1.0, 1024).samples)))
    fd_gap = abs(verify_chain_rule(f, ident, 1e-4) - verify_trace_formula(f, 1024, 1e-4))
    identity_gap = max(trace_gap, fd_gap)

    witness = None
    try:
        build_chart(PowerSeries([0.0, 1.0, 0.8]))
    except ChartError as exc:
        witness = exc.witness
    rejected = witness is not None and witness["kind"] == "derivative_root"
    ok = disc <= 1e-6 and identity_gap <= 1e-12 and rejected
    report(
        12,
        ok,
        f"chain-rule discrepancy {disc:.3e} (tol 1e-6), identity gap {identity_gap:.1e} (tol 1e-12), "
        f"z + 0.8 z^2 rejected with witness {witness}",
    )
