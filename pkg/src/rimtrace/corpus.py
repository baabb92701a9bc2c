"""Reference functions and arc data with closed-form ground truth.

Every entry records how its ground truth follows (closed form, or the
oracle recipe that reproduces it).  Entries are built lazily and
deterministically from their parameters.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from rimtrace.series import ArcTrace, BoundaryTrace, PowerSeries

TWO_PI = 2.0 * math.pi
CAP = "cap"  # class A^infinity: every derivative extends continuously
DEFAULT_DEGREE = 8192
TRACE_GRID = 256
ARC_SAMPLES = 257
KINDS = ("series", "trace", "arc", "chart")

ApClass = Union[int, str]


class UnknownEntry(KeyError):
    """Name not in the registry and not a recognised family name."""


@dataclass(frozen=True)
class CorpusEntry:
    """A named fixture: ``build(degree)`` returns a PowerSeries, BoundaryTrace or ArcTrace."""

    name: str
    kind: str
    params: dict
    builder: Callable = field(repr=False)
    ground_truth: dict
    note: str

    def build(self, degree: Optional[int] = None):
        return self.builder(degree)

    @property
    def ap_class(self) -> Optional[ApClass]:
        return self.ground_truth.get("class")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "params": self.params,
            "ground_truth": self.ground_truth,
            "note": self.note,
        }


def class_rank(c: Optional[ApClass]) -> float:
    """Numeric rank of a class label, with ``cap`` above every integer."""
    if c is None:
        return math.nan
    return math.inf if c == CAP else float(c)


# -- families --------------------------------------------------------------------


def _falling(k: int, l: int) -> int:
    return math.perm(k, l) if l <= k else 0


def monomial(k: int) -> CorpusEntry:
    if k < 0:
        raise ValueError("monomial exponent must be nonnegative")
    coeffs = np.zeros(k + 1)
    coeffs[k] = 1.0
    seminorms = [_falling(k, l) for l in range(6)]
    return CorpusEntry(
        name=f"monomial_{k}",
        kind="series",
        params={"k": k},
        builder=lambda degree: PowerSeries(coeffs),
        ground_truth={
            "class": CAP,
            "seminorms": seminorms,
            "derivation": "f^(l) = k!/(k-l)! z^(k-l); its sup over the closed disk sits on the rim",
        },
        note="polynomial, entire",
    )


def zeta_class(s: float) -> int:
    """Largest integer p with s - p > 1."""
    return math.ceil(s - 1.0) - 1


def _zeta_coeffs(s: float, degree: int) -> np.ndarray:
    n = np.arange(degree + 1, dtype=float)
    c = np.zeros(degree + 1)
    c[1:] = n[1:] ** -s
    return c


def zeta_series(s: float, default_degree: int = DEFAULT_DEGREE) -> CorpusEntry:
    if not s > 1.0:
        raise ValueError("zeta_series needs s > 1 for continuity on the closed disk")
    p = zeta_class(s)

    def build(degree):
        return PowerSeries(_zeta_coeffs(s, degree or default_degree), 1.0)

    label = f"{s:g}"
    return CorpusEntry(
        name=f"zeta_series_{label}",
        kind="series",
        params={"s": s, "degree": default_degree},
        builder=build,
        ground_truth={
            "class": p,
            "arc_classes": [
                {"arc": [0.5, TWO_PI - 0.5], "class": CAP},
                {"arc": [-0.5, 0.5], "class": p},
            ],
            "derivation": (
                "f^(l) has coefficients ~ n^(l-s): absolutely summable on the rim iff s - l > 1; "
                "for s - l <= 1 the positive terms at z = 1 diverge. Off z = 1 the full series "
                "is a polylogarithm, analytic across the rim"
            ),
        },
        note="sum_{n>=1} n^-s z^n truncated at the given degree",
    )


def _exp_entry(terms: int = 20) -> CorpusEntry:
    coeffs = np.array([1.0 / math.factorial(n) for n in range(terms)])
    return CorpusEntry(
        name="exp_truncated",
        kind="series",
        params={"terms": terms},
        builder=lambda degree: PowerSeries(coeffs),
        ground_truth={
            "class": CAP,
            "seminorms": [float(coeffs[: terms - l].sum()) for l in range(6)],
            "derivation": "positive coefficients: sup |f^(l)| = f^(l)(1) = sum_{n < terms - l} 1/n!",
        },
        note="exp(z) Taylor polynomial with 20 terms",
    )


def _cubic_entry() -> CorpusEntry:
    coeffs = np.array([0.0, 2.0, 0.0, 1.0])
    return CorpusEntry(
        name="cubic_z3_2z",
        kind="series",
        params={"coeffs": [0, 2, 0, 1]},
        builder=lambda degree: PowerSeries(coeffs),
        ground_truth={
            "class": CAP,
            "seminorms": [3, 5, 6, 6, 0],
            "trace_derivative": "g'(t) = i e^{it} (3 e^{2it} + 2)",
            "derivation": "nonnegative coefficients: the sups are attained at z = 1",
        },
        note="z^3 + 2z",
    )


def _trig_entry(name: str, modes: dict, note: str) -> CorpusEntry:
    def func(t):
        t = np.asarray(t, dtype=float)
        return sum(c * np.exp(1j * k * t) for k, c in modes.items())

    kmax = max(abs(k) for k in modes)
    return CorpusEntry(
        name=name,
        kind="trace",
        params={"modes": {str(k): [c.real, c.imag] for k, c in modes.items()}, "grid": TRACE_GRID},
        builder=lambda degree: BoundaryTrace.from_function(func, degree or TRACE_GRID),
        ground_truth={
            "class": CAP,
            "max_mode": kmax,
            "extension": "sum_k c_k r^|k| e^{ik theta}",
            "derivation": "each Fourier mode e^{ikt} extends to r^|k| e^{ik theta}",
        },
        note=note,
    )


def _arc_entry(name: str, arc, func, deriv, order: int, sup: Optional[float], note: str) -> CorpusEntry:
    def build(degree):
        return ArcTrace.from_function(func, arc, degree or ARC_SAMPLES, deriv, order)

    truth = {
        "class": CAP,
        "derivative_order": order,
        "derivation": "endpoint derivatives in closed form",
    }
    if sup is not None:
        truth["sup_norm"] = sup
    return CorpusEntry(
        name=name,
        kind="arc",
        params={"arc": list(arc), "samples": ARC_SAMPLES, "order": order},
        builder=build,
        ground_truth=truth,
        note=note,
    )


def _parabola_deriv(k: int, t: float) -> complex:
    return [t * (1.0 - t), 1.0 - 2.0 * t, -2.0][k] if k < 3 else 0.0


def _chart_entry(name: str, a: float) -> CorpusEntry:
    root = -1.0 / (2.0 * a)
    ok = abs(root) > 1.0
    truth = {
        "univalent": ok,
        "derivative_root": [root, 0.0],
        "min_abs_derivative": 1.0 - 2.0 * a if ok else 0.0,
        "derivation": "phi' = 1 + 2az vanishes only at -1/(2a); min over the rim is 1 - 2|a|",
    }
    return CorpusEntry(
        name=name,
        kind="chart",
        params={"coeffs": [0.0, 1.0, a]},
        builder=lambda degree: PowerSeries(np.array([0.0, 1.0, a])),
        ground_truth=truth,
        note=f"disk map z + {a:g} z^2" + ("" if ok else " (not locally injective: rejected)"),
    )


def _static_entries() -> list:
    out = [monomial(k) for k in (1, 3, 5)]
    out.append(_trig_entry("trig_cos3_sin1", {3: 0.5, -3: 0.5, 1: -0.5j, -1: 0.5j}, "cos 3t + sin t"))
    out.append(_trig_entry("trig_e2_e-5", {2: 1.0 + 0j, -5: 0.25 + 0j}, "e^{2it} + 0.25 e^{-5it}"))
    out.extend(zeta_series(s) for s in (1.5, 2.5, 3.5, 4.5))
    out.append(_exp_entry())
    out.append(_cubic_entry())
    out.append(
        _arc_entry(
            "arc_cosine",
            (0.0, 1.0),
            np.cos,
            lambda k, t: math.cos(t + k * math.pi / 2.0),
            4,
            1.0,
            "cos t on [0, 1]",
        )
    )
    out.append(
        _arc_entry(
            "arc_parabola",
            (0.0, 1.0),
            lambda t: t * (1.0 - t),
            _parabola_deriv,
            4,
            0.25,
            "t (1 - t) on [0, 1]",
        )
    )
    out.append(
        _arc_entry(
            "arc_exp2",
            (0.5, 2.0),
            lambda t: np.exp(2j * np.asarray(t)),
            lambda k, t: (2j) ** k * complex(np.exp(2j * t)),
            4,
            1.0,
            "e^{2it} on [0.5, 2]",
        )
    )
    out.append(
        _arc_entry(
            "arc_indicator",
            (0.0, 1.0),
            lambda t: np.ones_like(np.asarray(t, dtype=float)),
            lambda k, t: 1.0 if k == 0 else 0.0,
            4,
            1.0,
            "u = 1 on [0, 1]",
        )
    )
    out.append(_chart_entry("conformal_z_0.3z2", 0.3))
    out.append(_chart_entry("conformal_z_0.8z2", 0.8))
    return out


_REGISTRY = {e.name: e for e in _static_entries()}
_MONOMIAL = re.compile(r"monomial_(\d+)$")
_ZETA = re.compile(r"zeta_series_(\d+(?:\.\d+)?)$")


def corpus_get(name: str) -> CorpusEntry:
    """Registered entry, or a member of the ``monomial_<k>`` / ``zeta_series_<s>`` families."""
    if name in _REGISTRY:
        return _REGISTRY[name]
    m = _MONOMIAL.match(name)
    if m:
        return monomial(int(m.group(1)))
    m = _ZETA.match(name)
    if m and float(m.group(1)) > 1.0:
        return zeta_series(float(m.group(1)))
    raise UnknownEntry(f"unknown corpus entry {name!r}")


def corpus_all(kind: Optional[str] = None, cls=None) -> list:
    """Registered entries in a fixed order, optionally filtered.

    ``cls`` is a class label (int or ``"cap"``) or an inclusive (lo, hi) range.
    """
    if kind is not None and kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    out = []
    for e in _REGISTRY.values():
        if kind is not None and e.kind != kind:
            continue
        if cls is not None:
            rank = class_rank(e.ap_class)
            if isinstance(cls, (tuple, list)):
                lo, hi = (class_rank(c) for c in cls)
                if not lo <= rank <= hi:
                    continue
            elif rank != class_rank(cls):
                continue
        out.append(e)
    return out


def registry_json(entries=None) -> str:
    entries = corpus_all() if entries is None else entries
    return json.dumps([e.to_json() for e in entries], indent=2, sort_keys=True)
