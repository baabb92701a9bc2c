import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import direct_series
from rimtrace.conformal import (
    ChartError,
    Composition,
    build_chart,
    classify_Ap_domain,
    compose,
    domain_seminorms,
    find_self_intersection,
    transfer_trace,
    verify_chain_rule,
)
from rimtrace.corpus import corpus_get
from rimtrace.series import PowerSeries, trace_from_series

TWO_PI = 2 * math.pi
PHI = PowerSeries([0.0, 1.0, 0.3])


def test_accepted_map_certificate():
    chart = build_chart(PHI, m=256)
    cert = chart.map.certificate
    assert cert.status == "verified" and cert.winding_of_derivative == 0
    assert cert.min_abs_derivative == pytest.approx(0.4, rel=1e-12)
    assert chart.size == 256
    assert np.allclose(chart.gamma, direct_series(PHI.coeffs, np.exp(1j * chart.angles)))
    with pytest.raises(ValueError):
        chart.gamma[0] = 0


def test_interior_critical_point_is_rejected():
    with pytest.raises(ChartError) as exc:
        build_chart(PowerSeries([0.0, 1.0, 0.8]))
    w = exc.value.witness
    assert w["kind"] == "derivative_root" and w["count"] == 1
    assert w["location"] == pytest.approx([-0.625, 0.0])


def test_rim_critical_point_is_rejected():
    with pytest.raises(ChartError) as exc:
        build_chart(PowerSeries([0.0, 1.0, 0.5]), segments=1024)
    assert exc.value.witness["location"] == pytest.approx([-1.0, 0.0], abs=1e-12)


def test_self_intersecting_boundary_is_rejected():
    # a locally univalent map whose boundary curve winds over itself
    coeffs = [0.0] + [4.0 ** (k - 1) / math.factorial(k) for k in range(1, 40)]
    with pytest.raises(ChartError) as exc:
        build_chart(PowerSeries(coeffs))
    w = exc.value.witness
    assert w["kind"] == "intersection"
    i, j = w["segments"]
    assert i != j


def test_radius_requirement():
    with pytest.raises(ValueError):
        build_chart(PowerSeries([0, 1], 1.0))


def test_find_self_intersection():
    square = np.array([0, 1, 1 + 1j, 1j])
    assert find_self_intersection(square) is None
    bowtie = np.array([0, 1 + 1j, 1, 1j])
    assert find_self_intersection(bowtie) is not None


def test_compose_is_exact_for_polynomials():
    comp = compose(PowerSeries([0, 0, 1]), PHI)
    assert comp.tail_estimate == 0.0
    assert np.allclose(comp.series.coeffs, [0, 0, 1, 0.6, 0.09], atol=1e-15)
    assert comp.series.assumed_radius == math.inf


def test_compose_tail_for_entire_series():
    f = corpus_get("exp_truncated").build()
    comp = compose(f, PHI, degree=16)
    assert comp.tail_estimate > 0
    z = np.array([0.3, -0.2 + 0.4j])
    full = compose(f, PHI, degree=64).series
    assert np.allclose(full(z), f(PHI(z)), atol=1e-13)


def test_compose_radius_for_disk_series():
    f = PowerSeries([1, 1, 1], 1.5)
    assert compose(f, PowerSeries([0, 0.5]), 8).series.assumed_radius == 1.0
    with pytest.raises(ValueError):
        compose(f, PowerSeries([2.0, 1.0]))


def test_chain_rule_is_second_order():
    chart = build_chart(PHI)
    F = PowerSeries([0, 0, 1])
    d1 = verify_chain_rule(F, chart, 1e-4)
    d2 = verify_chain_rule(F, chart, 5e-5)
    assert d1 <= 1e-6 and 3.5 <= d1 / d2 <= 4.5


def test_identity_chart_reduces_to_disk():
    ident = build_chart(PowerSeries([0, 1]), m=128)
    f = corpus_get("cubic_z3_2z").build()
    assert np.allclose(transfer_trace(f, ident).samples, trace_from_series(f, 1.0, 128).samples, atol=1e-14)
    assert np.allclose(domain_seminorms(f, ident, 2).values, [3.0, 5.0, 11.0], rtol=1e-12)


def test_domain_seminorms_of_square():
    chart = build_chart(PHI, m=256)
    vals = domain_seminorms(PowerSeries([0, 0, 1]), chart, 0).values
    assert vals[0] == pytest.approx(1.69, rel=1e-12)


def test_transfer_trace_tail_guard():
    chart = build_chart(PHI, m=64)
    with pytest.raises(ValueError):
        transfer_trace(corpus_get("exp_truncated").build(), chart, degree=8)


def test_classify_on_domain():
    chart = build_chart(PHI, m=64)
    comp = compose(PowerSeries([0, 0, 1]), PHI)
    res = classify_Ap_domain(comp, chart, p_max=2)
    assert res.capped and res.thresholds["domain"]
    coarse = compose(corpus_get("exp_truncated").build(), PHI, degree=8)
    res = classify_Ap_domain(coarse, chart, p_max=1)
    assert res.p_hat is None and all(e.verdict == "inconclusive" for e in res.evidence)
    assert isinstance(coarse, Composition)


def test_chart_csv():
    lines = build_chart(PHI, m=16).to_csv().splitlines()
    assert lines[0] == "t,re_gamma,im_gamma,re_dgamma,im_dgamma"
    assert len(lines) == 17


@settings(max_examples=25, deadline=None)
@given(a=st.complex_numbers(max_magnitude=0.45, allow_nan=False, allow_infinity=False))
def test_small_quadratic_perturbations_are_univalent(a):
    # |phi'| = |1 + 2 a z| >= 1 - 2|a| > 0 on the closed disk
    chart = build_chart(PowerSeries([0, 1, a]), m=64, segments=512)
    assert chart.map.certificate.min_abs_derivative >= 1 - 2 * abs(a) - 1e-12


@settings(max_examples=25, deadline=None)
@given(a=st.complex_numbers(min_magnitude=0.55, max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_large_quadratic_perturbations_are_rejected(a):
    with pytest.raises(ChartError):
        build_chart(PowerSeries([0, 1, a]), segments=512)
