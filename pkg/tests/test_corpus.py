import json
import math

import numpy as np
import pytest

from rimtrace.conformal import ChartError, build_chart
from rimtrace.corpus import (
    CAP,
    KINDS,
    UnknownEntry,
    class_rank,
    corpus_all,
    corpus_get,
    registry_json,
    zeta_class,
)
from rimtrace.extension import poisson_extend
from rimtrace.series import ArcTrace, BoundaryTrace, PowerSeries, series_derivative

TWO_PI = 2 * math.pi


def test_registry_size_and_kinds():
    entries = corpus_all()
    assert len(entries) >= 12
    assert {e.kind for e in entries} == set(KINDS)
    assert len({e.name for e in entries}) == len(entries)


def test_filters():
    assert "zeta_series_1.5" in [e.name for e in corpus_all(cls=0)]
    assert len(corpus_all(kind="arc")) >= 2
    assert all(e.ap_class == CAP for e in corpus_all(cls="cap"))
    ranged = [e.name for e in corpus_all(kind="series", cls=(1, 2))]
    assert ranged == ["zeta_series_2.5", "zeta_series_3.5"]
    with pytest.raises(ValueError):
        corpus_all(kind="bogus")


def test_class_rank():
    assert class_rank(CAP) == math.inf and class_rank(3) == 3.0
    assert math.isnan(class_rank(None))


@pytest.mark.parametrize("s,p", [(1.5, 0), (2.0, 0), (2.5, 1), (3.01, 2), (4.5, 3)])
def test_zeta_class(s, p):
    assert zeta_class(s) == p


def test_dynamic_names_and_unknown():
    assert corpus_get("monomial_7").ground_truth["seminorms"][:3] == [1, 7, 42]
    f = corpus_get("zeta_series_2.25").build(16)
    assert f.coeffs[2] == pytest.approx(2**-2.25) and f.assumed_radius == 1.0
    for bad in ("nope", "zeta_series_1", "zeta_series_0.5", "monomial_x"):
        with pytest.raises(UnknownEntry):
            corpus_get(bad)


def test_builds_are_deterministic():
    for e in corpus_all():
        a, b = e.build(), e.build()
        assert type(a) is type(b)
        key = "coeffs" if isinstance(a, PowerSeries) else "samples"
        assert np.array_equal(getattr(a, key), getattr(b, key)), e.name


def test_degree_override():
    assert corpus_get("zeta_series_2.5").build(100).degree == 100
    assert corpus_get("zeta_series_2.5").build().degree == 8192


@pytest.mark.parametrize("entry", [e for e in corpus_all(kind="series") if "seminorms" in e.ground_truth], ids=lambda e: e.name)
def test_series_seminorm_ground_truth(entry):
    # direct oracle: max modulus of f^(l) on a fine rim grid
    f = entry.build()
    z = np.exp(1j * np.linspace(0, TWO_PI, 4001))
    for l, want in enumerate(entry.ground_truth["seminorms"]):
        d = series_derivative(f, l).coeffs
        got = np.max(np.abs(np.polyval(d[::-1], z)))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12), (entry.name, l)


@pytest.mark.parametrize("entry", corpus_all(kind="trace"), ids=lambda e: e.name)
def test_trace_extension_ground_truth(entry):
    g = entry.build()
    assert isinstance(g, BoundaryTrace)
    modes = {int(k): complex(*v) for k, v in entry.params["modes"].items()}
    z = np.array([0.3 + 0.1j, -0.6j])
    r, th = np.abs(z), np.angle(z)
    want = sum(c * r ** abs(k) * np.exp(1j * k * th) for k, c in modes.items())
    assert np.allclose(poisson_extend(g, z), want, atol=1e-13)


@pytest.mark.parametrize("entry", corpus_all(kind="arc"), ids=lambda e: e.name)
def test_arc_endpoint_derivatives_match_finite_differences(entry):
    u = entry.build()
    assert isinstance(u, ArcTrace)
    h = 1e-4
    f = u.func
    for end, t in (("a", u.a), ("b", u.b)):
        d = u.endpoint_derivatives[end]
        assert d[0] == pytest.approx(complex(f(t)), abs=1e-14)
        fd1 = (complex(f(t + h)) - complex(f(t - h))) / (2 * h)
        fd2 = (complex(f(t + h)) - 2 * complex(f(t)) + complex(f(t - h))) / h**2
        assert abs(d[1] - fd1) <= 1e-6
        assert abs(d[2] - fd2) <= 1e-5
    if "sup_norm" in entry.ground_truth:
        assert u.sup_norm() == pytest.approx(entry.ground_truth["sup_norm"], rel=1e-6)


@pytest.mark.parametrize("entry", corpus_all(kind="chart"), ids=lambda e: e.name)
def test_chart_ground_truth(entry):
    phi = entry.build()
    truth = entry.ground_truth
    if truth["univalent"]:
        cert = build_chart(phi).map.certificate
        assert cert.min_abs_derivative == pytest.approx(truth["min_abs_derivative"], rel=1e-12)
    else:
        with pytest.raises(ChartError) as exc:
            build_chart(phi)
        assert exc.value.witness["location"] == pytest.approx(truth["derivative_root"])


def test_registry_json():
    doc = json.loads(registry_json())
    assert [d["name"] for d in doc] == [e.name for e in corpus_all()]
    assert doc[0]["ground_truth"]["class"] == CAP
    assert registry_json() == registry_json()
