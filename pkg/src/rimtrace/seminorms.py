"""Chain-rule polynomial systems for t -> f(e^{it}) and the semi-norms they relate.

With g(t) = f(e^{it}):

    g^{(l)}(t)      = sum_k P_{k,l}(e^{it})  f^{(k)}(e^{it})
    f^{(l)}(e^{it}) = sum_k Q_{k,l}(e^{-it}) g^{(k)}(t)

P is generated by P_{k,l+1}(z) = i z (P'_{k,l}(z) + P_{k-1,l}(z)); Q by
triangular back-substitution.  All coefficients are exact Gaussian integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from rimtrace.series import (
    BoundaryTrace,
    PowerSeries,
    exact_trace_derivative,
    sample_values,
    series_derivative,
    trace_derivative,
)

PROXY_RHO = 1.0 - 2.0**-14
SLACK = 1e-9

GaussInt = Tuple[int, int]


def _gmul(x: GaussInt, y: GaussInt) -> GaussInt:
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


@dataclass(frozen=True)
class LaurentPoly:
    """Finite sum of c_e x^e with Gaussian-integer c_e and integer (possibly
    negative) exponents e."""

    terms: Dict[int, GaussInt] = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(e): (int(c[0]), int(c[1])) for e, c in self.terms.items() if c != (0, 0)}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, coef: GaussInt, exp: int) -> "LaurentPoly":
        return cls({exp: coef})

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            a = out.get(e, (0, 0))
            out[e] = (a[0] + c[0], a[1] + c[1])
        return LaurentPoly(out)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: (-c[0], -c[1]) for e, c in self.terms.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        out: Dict[int, GaussInt] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                p = _gmul(c1, c2)
                a = out.get(e1 + e2, (0, 0))
                out[e1 + e2] = (a[0] + p[0], a[1] + p[1])
        return LaurentPoly(out)

    def derivative(self) -> "LaurentPoly":
        return LaurentPoly({e - 1: (e * c[0], e * c[1]) for e, c in self.terms.items() if e})

    def reflect(self) -> "LaurentPoly":
        """Substitute x -> 1/x."""
        return LaurentPoly({-e: c for e, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max(self.terms) if self.terms else -1

    @property
    def low_degree(self) -> int:
        return min(self.terms) if self.terms else 0

    def is_polynomial(self) -> bool:
        return self.low_degree >= 0

    def coefficients(self) -> list:
        """Dense coefficient list [c_0, ..., c_deg] (polynomials only)."""
        if not self.is_polynomial():
            raise ValueError("negative powers present")
        return [self.terms.get(e, (0, 0)) for e in range(self.degree + 1)]

    def abs_coeff_sum(self):
        """Sum of moduli of the coefficients; an int when every modulus is integral."""
        total = 0.0
        exact = 0
        integral = True
        for re, im in self.terms.values():
            sq = re * re + im * im
            root = math.isqrt(sq)
            if root * root == sq:
                exact += root
            else:
                integral = False
            total += math.sqrt(sq)
        return exact if integral else total

    def __call__(self, x):
        x = np.asarray(x, dtype=np.complex128)
        out = np.zeros(x.shape, dtype=np.complex128)
        for e, (re, im) in self.terms.items():
            out = out + complex(re, im) * x**e
        return out

    def i_power_form(self):
        """(m, ints) with coefficients = i^m * ints, when such a form exists."""
        if not self.terms:
            return 0, [0] * (max(self.degree, 0) + 1)
        for m, unit in enumerate([(1, 0), (0, 1), (-1, 0), (0, -1)]):
            inv = (unit[0], -unit[1])
            ints = []
            for c in self.coefficients():
                re, im = _gmul(c, inv)
                if im != 0:
                    break
                ints.append(re)
            else:
                return m, ints
        return None

    def to_json(self) -> dict:
        form = self.i_power_form()
        if form is not None:
            m, ints = form
            return {"i_power": m, "coeffs": ints}
        return {"coeffs": [list(c) for c in self.coefficients()]}

    def __str__(self) -> str:
        parts = []
        for e in sorted(self.terms):
            re, im = self.terms[e]
            parts.append(f"({re}{im:+d}i)*x^{e}")
        return " + ".join(parts) if parts else "0"


_I = (0, 1)
_ONE = (1, 0)
_IZ = LaurentPoly.monomial(_I, 1)


@dataclass(frozen=True)
class ChainRuleSystem:
    """Triangular families P[(k, l)], Q[(k, l)] for 1 <= k <= l <= order."""

    order: int
    P: Dict[Tuple[int, int], LaurentPoly]
    Q: Dict[Tuple[int, int], LaurentPoly]

    def a(self, k: int, l: int):
        return self.P[(k, l)].abs_coeff_sum()

    def b(self, k: int, l: int):
        return self.Q[(k, l)].abs_coeff_sum()

    def to_json(self) -> dict:
        def family(polys):
            return [
                {"k": k, "l": l, **polys[(k, l)].to_json()}
                for l in range(1, self.order + 1)
                for k in range(1, l + 1)
            ]

        a, b = coeff_sums(self)
        return {
            "order": self.order,
            "P": family(self.P),
            "Q": family(self.Q),
            "a": [{"k": k, "l": l, "value": v} for (k, l), v in sorted(a.items())],
            "b": [{"k": k, "l": l, "value": v} for (k, l), v in sorted(b.items())],
        }


def chain_polys(p: int) -> Dict[Tuple[int, int], LaurentPoly]:
    """P_{k,l} for 1 <= k <= l <= p (polynomials in z = e^{it})."""
    if p < 1:
        raise ValueError("order must be at least 1")
    return dict(_chain_polys(p))


@lru_cache(maxsize=None)
def _chain_polys(p: int) -> tuple:
    zero = LaurentPoly()
    level = {1: _IZ}  # P_{1,1} = i z
    out = {(1, 1): _IZ}
    for l in range(1, p):
        nxt = {}
        for k in range(1, l + 2):
            cur = level.get(k, zero)
            prev = level.get(k - 1, zero)
            nxt[k] = _IZ * (cur.derivative() + prev)
        level = nxt
        for k, poly in level.items():
            out[(k, l + 1)] = poly
    for l in range(1, p + 1):
        lead = out[(l, l)]
        expected = LaurentPoly.monomial(_ipow(l), l)
        if lead.terms != expected.terms:
            raise AssertionError(f"P_{{{l},{l}}} is not (iz)^{l}")
    return tuple(sorted(out.items()))


def _ipow(m: int) -> GaussInt:
    return [(1, 0), (0, 1), (-1, 0), (0, -1)][m % 4]


def inverse_polys(P: Dict[Tuple[int, int], LaurentPoly], p: int) -> Dict[Tuple[int, int], LaurentPoly]:
    """Q_{k,l} (polynomials in w = e^{-it}) inverting the P-system to order p.

    Back-substitution runs over Laurent polynomials in z; the result is
    reflected to the variable w = 1/z and must come out polynomial.
    """
    Qz: Dict[Tuple[int, int], LaurentPoly] = {}
    for l in range(1, p + 1):
        lead = P[(l, l)]
        if len(lead.terms) != 1:
            raise AssertionError("leading chain polynomial is not a monomial")
        (e, c), = lead.terms.items()
        if c not in [(1, 0), (0, 1), (-1, 0), (0, -1)]:
            raise AssertionError("leading coefficient is not a unit")
        inv_lead = LaurentPoly.monomial((c[0], -c[1]), -e)
        # f^{(l)} = lead^{-1} (g^{(l)} - sum_{k<l} P_{k,l} f^{(k)})
        row = {l: inv_lead}
        for k in range(1, l):
            pk = P[(k, l)]
            if pk.is_zero():
                continue
            for m in range(1, k + 1):
                term = inv_lead * pk * Qz[(m, k)]
                row[m] = row.get(m, LaurentPoly()) - term
        for m, poly in row.items():
            Qz[(m, l)] = poly
        for m in range(1, l + 1):
            Qz.setdefault((m, l), LaurentPoly())
    Q = {}
    for key, poly in Qz.items():
        w = poly.reflect()
        if not w.is_polynomial():
            raise AssertionError(f"Q_{key} is not a polynomial in e^(-it)")
        Q[key] = w
    return Q


def chain_rule_system(p: int) -> ChainRuleSystem:
    P = chain_polys(p)
    return ChainRuleSystem(p, P, inverse_polys(P, p))


def coeff_sums(system: ChainRuleSystem):
    """(a, b): dicts (k, l) -> sum of coefficient moduli of P_{k,l}, Q_{k,l}."""
    a = {key: poly.abs_coeff_sum() for key, poly in system.P.items()}
    b = {key: poly.abs_coeff_sum() for key, poly in system.Q.items()}
    return a, b


def composition_residual(system: ChainRuleSystem) -> Dict[Tuple[int, int], LaurentPoly]:
    """sum_k Q_{k,l}(1/z) P_{m,k}(z) - delta_{ml}, symbolically, for m <= l."""
    out = {}
    p = system.order
    for l in range(1, p + 1):
        for m in range(1, l + 1):
            acc = LaurentPoly()
            for k in range(m, l + 1):
                acc = acc + system.Q[(k, l)].reflect() * system.P[(m, k)]
            if m == l:
                acc = acc - LaurentPoly.monomial(_ONE, 0)
            out[(m, l)] = acc
    return out


# -- semi-norms --------------------------------------------------------------


@dataclass(frozen=True)
class SeminormVector:
    """|f|_0 .. |f|_p, each a sup over a uniform grid of size ``grid``.

    ``proxy`` marks values taken on the circle of radius ``rho`` < 1 instead
    of the rim.
    """

    values: tuple
    grid: int
    proxy: bool = False
    rho: float = 1.0

    def __getitem__(self, l: int) -> float:
        return self.values[l]

    def to_json(self) -> dict:
        return {"values": list(self.values), "grid": self.grid, "proxy": self.proxy, "rho": self.rho}


def _rim_radius(f: PowerSeries, rim_policy: str) -> tuple:
    if rim_policy not in ("auto", "rim", "interior"):
        raise ValueError(f"unknown rim policy {rim_policy!r}")
    if rim_policy == "interior":
        return PROXY_RHO, True
    if f.assumed_radius > 1.0:
        return 1.0, False
    if rim_policy == "rim":
        raise ValueError("rim policy needs a series convergent beyond the unit circle")
    return PROXY_RHO, True


def default_grid(f: PowerSeries, m: int | None = None) -> int:
    """Power-of-two grid resolving every mode of f (and at least 1024)."""
    need = max(1024, 2 * (f.degree + 1))
    grid = 1 << (need - 1).bit_length()
    return grid if m is None else max(m, 16)


def seminorm(f: PowerSeries, l: int, m: int | None = None, rim_policy: str = "auto") -> float:
    """sup |f^{(l)}| over the rim grid (or the interior proxy circle)."""
    return seminorms(f, l, m, rim_policy).values[l]


def seminorms(f: PowerSeries, p: int, m: int | None = None, rim_policy: str = "auto") -> SeminormVector:
    rho, proxy = _rim_radius(f, rim_policy)
    m = default_grid(f, m)
    values = tuple(
        float(np.max(np.abs(sample_values(series_derivative(f, l), rho, m)))) for l in range(p + 1)
    )
    return SeminormVector(values, m, proxy, rho)


def seminorm_trace(g: BoundaryTrace, l: int) -> float:
    """sup |g^{(l)}| over the samples, by spectral differentiation."""
    if l > g.smoothness_claim:
        raise ValueError(f"order {l} exceeds the trace's smoothness claim")
    return float(np.max(np.abs(trace_derivative(g, l, "spectral").samples)))


def trace_seminorms(g: BoundaryTrace, p: int) -> SeminormVector:
    warn = any(trace_derivative(g, l).spectral_warning for l in range(p + 1))
    vals = tuple(seminorm_trace(g, l) for l in range(p + 1))
    return SeminormVector(vals, g.size, proxy=warn)


def series_trace_seminorms(f: PowerSeries, p: int, m: int | None = None) -> SeminormVector:
    """sup |g^{(l)}| for g(t) = f(e^{it}), l <= p, from the exact Fourier
    coefficients of g (the Taylor coefficients of f).

    Differentiating FFT-resampled values instead would amplify roundoff by
    up to (m/2)^l.
    """
    if not f.assumed_radius > 1.0:
        raise ValueError("rim trace needs a series convergent beyond the unit circle")
    m = default_grid(f, m)
    vals = tuple(float(np.max(np.abs(exact_trace_derivative(f, l, 1.0, m)))) for l in range(p + 1))
    return SeminormVector(vals, m)


@dataclass(frozen=True)
class EquivalenceReport:
    """Residuals (rhs - lhs) / max(1, |rhs|) of the three semi-norm relations.

    ``equality`` is the l = 0 relation |f|_0 = |g|_0 (residual = -|difference|),
    ``f_bound`` the bound of |f|_l by the b-sums, ``g_bound`` of |g|_l by the
    a-sums.
    """

    order: int
    f_norms: tuple
    g_norms: tuple
    equality: float
    f_bound: dict
    g_bound: dict
    dilation: float = 1.0
    slack: float = SLACK

    @property
    def min_residual(self) -> float:
        return min([self.equality, *self.f_bound.values(), *self.g_bound.values()])

    @property
    def holds(self) -> bool:
        return self.min_residual >= -self.slack

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "f_norms": list(self.f_norms),
            "g_norms": list(self.g_norms),
            "equality_residual": self.equality,
            "f_bound_residuals": {str(k): v for k, v in self.f_bound.items()},
            "g_bound_residuals": {str(k): v for k, v in self.g_bound.items()},
            "dilation": self.dilation,
            "holds": self.holds,
        }


def check_equivalence(f: PowerSeries, p: int, m: int | None = None) -> EquivalenceReport:
    """Check |f|_0 = |g|_0, |f|_l <= sum b_{k,l} |g|_k and |g|_l <= sum a_{k,l} |f|_k.

    A series declared only on the unit disk is replaced by its dilation
    f(rho z), rho = 1 - 2^-14, which is a genuine member of A^infinity; the
    relations are then checked for that function.
    """
    rho = 1.0
    if f.assumed_radius <= 1.0:
        rho = PROXY_RHO
        f = f.dilated(rho)
    m = default_grid(f, m)
    fn = seminorms(f, p, m, "rim").values
    gn = series_trace_seminorms(f, p, m).values
    system = chain_rule_system(max(p, 1))
    a, b = coeff_sums(system)

    def resid(rhs, lhs):
        return (rhs - lhs) / max(1.0, abs(rhs))

    equality = -abs(fn[0] - gn[0]) / max(1.0, fn[0])
    f_bound = {}
    g_bound = {}
    for l in range(1, p + 1):
        f_bound[l] = resid(sum(b[(k, l)] * gn[k] for k in range(1, l + 1)), fn[l])
        g_bound[l] = resid(sum(a[(k, l)] * fn[k] for k in range(1, l + 1)), gn[l])
    return EquivalenceReport(p, fn, gn, equality, f_bound, g_bound, rho)
