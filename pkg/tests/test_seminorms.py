import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import sympy_chain_polys, sympy_inverse_polys
from rimtrace.corpus import corpus_all, corpus_get
from rimtrace.seminorms import (
    PROXY_RHO,
    LaurentPoly,
    chain_polys,
    chain_rule_system,
    check_equivalence,
    coeff_sums,
    composition_residual,
    default_grid,
    inverse_polys,
    seminorm,
    seminorms,
    series_trace_seminorms,
    trace_seminorms,
)
from rimtrace.series import BoundaryTrace, PowerSeries, trace_from_series


@pytest.mark.parametrize("p", [1, 3, 6])
def test_chain_polys_match_symbolic_differentiation(p):
    P = chain_polys(p)
    oracle = sympy_chain_polys(p)
    assert set(P) == set(oracle)
    for key, terms in oracle.items():
        assert P[key].terms == terms, key


def test_inverse_polys_match_symbolic_inverse():
    p = 4
    Q = inverse_polys(chain_polys(p), p)
    for key, terms in sympy_inverse_polys(p).items():
        assert Q[key].terms == terms, key


def test_diagonal_and_first_column():
    P = chain_polys(5)
    for l in range(1, 6):
        assert P[(l, l)].terms == {l: [(1, 0), (0, 1), (-1, 0), (0, -1)][l % 4]}
        # d^l/dt^l applied to f = z picks up only i^l z
        assert P[(1, l)].terms == {1: [(1, 0), (0, 1), (-1, 0), (0, -1)][l % 4]}


@pytest.mark.parametrize("p", [2, 4, 6])
def test_composition_residual_is_zero(p):
    assert all(r.is_zero() for r in composition_residual(chain_rule_system(p)).values())


def test_coefficient_sums_are_stirling_numbers():
    a, b = coeff_sums(chain_rule_system(5))
    for (k, l), v in a.items():
        assert v == sp.functions.combinatorial.numbers.stirling(l, k)
    for (k, l), v in b.items():
        assert v == abs(sp.functions.combinatorial.numbers.stirling(l, k, kind=1, signed=True))


def test_coefficient_sums_frozen():
    a, b = coeff_sums(chain_rule_system(4))
    assert a == {(1, 1): 1, (1, 2): 1, (2, 2): 1, (1, 3): 1, (2, 3): 3, (3, 3): 1,
                 (1, 4): 1, (2, 4): 7, (3, 4): 6, (4, 4): 1}
    assert b == {(1, 1): 1, (1, 2): 1, (2, 2): 1, (1, 3): 2, (2, 3): 3, (3, 3): 1,
                 (1, 4): 6, (2, 4): 11, (3, 4): 6, (4, 4): 1}


def test_system_json():
    doc = chain_rule_system(3).to_json()
    first = doc["P"][0]
    assert first == {"k": 1, "l": 1, "i_power": 1, "coeffs": [0, 1]}
    assert len(doc["Q"]) == 6 and {"k": 2, "l": 3, "value": 3} in doc["a"]


def test_laurent_arithmetic():
    x = LaurentPoly({1: (1, 0)})
    y = LaurentPoly({-1: (0, 1), 0: (2, 0)})
    prod = x * y
    assert prod.terms == {0: (0, 1), 1: (2, 0)}
    assert (prod - prod).is_zero()
    assert y.reflect().terms == {1: (0, 1), 0: (2, 0)}
    assert not y.is_polynomial() and y.low_degree == -1
    assert LaurentPoly({3: (2, 0)}).derivative().terms == {2: (6, 0)}
    assert LaurentPoly({0: (3, 4)}).abs_coeff_sum() == 5
    assert LaurentPoly({0: (1, 1)}).abs_coeff_sum() == pytest.approx(math.sqrt(2))
    assert np.allclose(prod(np.array([2.0])), 1j + 4)
    with pytest.raises(ValueError):
        y.coefficients()
    assert LaurentPoly({0: (1, 1)}).i_power_form() is None


@pytest.mark.parametrize("k", [1, 3, 5])
def test_monomial_seminorms(k):
    f = corpus_get(f"monomial_{k}").build()
    vals = seminorms(f, 4).values
    want = corpus_get(f"monomial_{k}").ground_truth["seminorms"][:5]
    assert np.allclose(vals, want, rtol=1e-13)


@pytest.mark.parametrize("name", ["exp_truncated", "cubic_z3_2z"])
def test_corpus_seminorm_ground_truth(name):
    entry = corpus_get(name)
    want = entry.ground_truth["seminorms"][:4]
    assert np.allclose(seminorms(entry.build(), 3).values, want, rtol=1e-13)


def test_interior_proxy_for_radius_one_series():
    f = corpus_get("zeta_series_2.5").build(512)
    vec = seminorms(f, 1)
    assert vec.proxy and vec.rho == PROXY_RHO
    with pytest.raises(ValueError):
        seminorms(f, 1, rim_policy="rim")
    with pytest.raises(ValueError):
        seminorms(f, 1, rim_policy="bogus")
    assert seminorm(PowerSeries([0, 1]), 0) == pytest.approx(1.0)


def test_default_grid():
    assert default_grid(PowerSeries([1])) == 1024
    assert default_grid(PowerSeries(np.ones(1000))) == 2048
    assert default_grid(PowerSeries([1]), 64) == 64


def test_exact_and_sampled_trace_seminorms_agree():
    f = PowerSeries([0.5, -1j, 0.25, 0, 0.1])
    g = trace_from_series(f, 1.0, 64)
    a = series_trace_seminorms(f, 3, 64).values
    b = trace_seminorms(g, 3).values
    assert np.allclose(a, b, rtol=1e-10)


def test_trace_seminorm_respects_claim():
    g = BoundaryTrace(np.ones(16), smoothness_claim=1)
    with pytest.raises(ValueError):
        trace_seminorms(g, 2)


@pytest.mark.parametrize("entry", corpus_all(kind="series"), ids=lambda e: e.name)
def test_equivalence_holds_on_series_corpus(entry):
    rep = check_equivalence(entry.build(), 3)
    assert rep.holds, rep.to_json()
    assert rep.min_residual >= -1e-9
    assert rep.to_json()["holds"]


def test_tight_relation_on_cubic():
    # |g'| = sup |3 z^3 + 2 z| = 5 = |f'|: the first-order relation is an equality
    rep = check_equivalence(corpus_get("cubic_z3_2z").build(), 2)
    assert rep.g_norms[1] == pytest.approx(5.0, rel=1e-14)
    assert rep.f_bound[1] == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(
    c=st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=8),
    a=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
)
def test_seminorms_are_homogeneous(c, a):
    f = PowerSeries(c)
    base = np.array(seminorms(f, 3, 64).values)
    scaled = np.array(seminorms(f.scaled(a), 3, 64).values)
    assert np.allclose(scaled, abs(a) * base, rtol=1e-12, atol=1e-12 * (1 + abs(a)) * (1 + base.max()))


@settings(max_examples=30, deadline=None)
@given(c=st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=10))
def test_equivalence_holds_for_random_polynomials(c):
    assert check_equivalence(PowerSeries(c), 3, 64).holds
