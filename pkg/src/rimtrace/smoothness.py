"""Radial sweeps, trace-derivative checks, and growth-based A^p classification."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from rimtrace import _backend
from rimtrace.extension import (
    DEFAULT_C,
    angular_distance_to_arc,
    arc_extend,
    hermite_bridge,
    poisson_extend_dtheta,
    smooth_arc_completion,
)
from rimtrace.seminorms import chain_polys, default_grid
from rimtrace.series import (
    ArcTrace,
    DomainError,
    PowerSeries,
    exact_trace_derivative,
    sample_values,
    series_derivative,
    trace_derivative,
)

TWO_PI = 2.0 * math.pi

ALPHA_DIV = 0.1
RESIDUAL_TOL = 0.1
J_RANGE = (3, 14)
FIT_POINTS = 6
RESOLVE_TOL = 0.01
MAX_GRID = 1 << 18


class ScheduleError(ValueError):
    """Radius schedule not strictly increasing inside (0, 1)."""


def default_schedule(j_range: tuple = J_RANGE) -> np.ndarray:
    j0, j1 = j_range
    return 1.0 - 2.0 ** -np.arange(j0, j1 + 1, dtype=float)


def _check_radii(radii) -> np.ndarray:
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0:
        raise ScheduleError("radius schedule must be a nonempty sequence")
    if np.any(radii <= 0.0) or np.any(radii >= 1.0):
        raise ScheduleError("radii must lie strictly inside (0, 1)")
    if np.any(np.diff(radii) <= 0.0):
        raise ScheduleError("radii must be strictly increasing")
    return radii


def _pow2_at_least(n: int) -> int:
    return 1 << (max(int(n), 1) - 1).bit_length()


def angular_derivative_samples(f: PowerSeries, l: int, rho: float, m: int) -> np.ndarray:
    """d^l/dtheta^l f(rho e^{i theta}) on the uniform m-grid, via the chain-rule polynomials."""
    if l == 0:
        return sample_values(f, rho, m)
    z = rho * np.exp(1j * TWO_PI * np.arange(m) / m)
    P = chain_polys(l)
    out = np.zeros(m, dtype=np.complex128)
    for k in range(1, l + 1):
        out += P[(k, l)](z) * sample_values(series_derivative(f, k), rho, m)
    return out


# -- growth fitting ----------------------------------------------------------


@dataclass(frozen=True)
class GrowthFit:
    """Fit of log sup|f^{(l)}| against -log(1 - rho) over resolved radii."""

    slope: float
    residual: float
    used: tuple
    verdict: str  # bounded | divergent | inconclusive

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "residual": self.residual,
            "radii_used": list(self.used),
            "verdict": self.verdict,
        }


def fit_growth(
    radii: np.ndarray,
    sups: np.ndarray,
    resolved: np.ndarray,
    alpha_div: float = ALPHA_DIV,
    residual_tol: float = RESIDUAL_TOL,
    fit_points: int = FIT_POINTS,
) -> GrowthFit:
    sups = np.asarray(sups, dtype=float)
    if np.all(sups == 0.0):
        return GrowthFit(0.0, 0.0, tuple(float(r) for r in radii), "bounded")
    idx = np.flatnonzero(resolved)[-fit_points:]
    if idx.size < 3:
        return GrowthFit(math.nan, math.nan, tuple(float(r) for r in radii[idx]), "inconclusive")
    positive = sups[sups > 0]
    y = np.log(np.maximum(sups[idx], positive.min()))
    x = -np.log1p(-radii[idx])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    if slope <= alpha_div:
        verdict = "bounded"
    elif residual < residual_tol:
        verdict = "divergent"
    else:
        verdict = "inconclusive"
    return GrowthFit(float(slope), residual, tuple(float(r) for r in radii[idx]), verdict)


def _sup_profile(f: PowerSeries, l: int, radii, window=None, base_grid: Optional[int] = None):
    """sup of |f^{(l)}| per radius (over the full circle or an angle window) and a
    mask of radii at which the truncation of f is resolved."""
    deriv = series_derivative(f, l)
    truncate = f.assumed_radius <= 1.0 and f.degree >= 2
    half = series_derivative(f.truncated(f.degree // 2), l) if truncate else None
    base = default_grid(f) if base_grid is None else base_grid
    sups = np.zeros(len(radii))
    resolved = np.ones(len(radii), dtype=bool)
    for q, rho in enumerate(radii):
        m = min(MAX_GRID, max(base, _pow2_at_least(math.ceil(8.0 / (1.0 - rho)))))
        vals = sample_values(deriv, rho, m)
        mask = None
        if window is not None:
            mask = window(TWO_PI * np.arange(m) / m)
            vals = vals[mask]
        sups[q] = float(np.max(np.abs(vals))) if vals.size else 0.0
        if truncate and sups[q] > 0:
            hv = sample_values(half, rho, m)
            if mask is not None:
                hv = hv[mask]
            resolved[q] = float(np.max(np.abs(vals - hv))) <= RESOLVE_TOL * sups[q]
    return sups, resolved


# -- reports -----------------------------------------------------------------


@dataclass
class ConvergenceReport:
    """Per-order radial sweep results.

    ``errors_ref[l][j]`` compares radius j with the largest radius of the
    schedule; ``errors_rim[l][j]`` (when available) with the spectral
    derivative of the rim trace.
    """

    orders: list
    radii: list
    errors_ref: dict
    errors_rim: Optional[dict]
    sup_norms: dict
    exponents: dict
    growth: dict
    verdicts: dict

    def rows(self):
        for l in self.orders:
            errs = self.errors_rim[l] if self.errors_rim is not None else self.errors_ref[l]
            for r, e in zip(self.radii, errs):
                yield l, r, e

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "radius", "sup_error"])
        for l, r, e in self.rows():
            w.writerow([l, repr(float(r)), repr(float(e))])
        return buf.getvalue()

    def to_json(self) -> dict:
        def keyed(d):
            return None if d is None else {str(k): [float(x) for x in v] for k, v in d.items()}

        return {
            "orders": list(self.orders),
            "radii": [float(r) for r in self.radii],
            "errors_ref": keyed(self.errors_ref),
            "errors_rim": keyed(self.errors_rim),
            "sup_norms": keyed(self.sup_norms),
            "exponents": {str(k): v for k, v in self.exponents.items()},
            "growth": {str(k): v.to_json() for k, v in self.growth.items()},
            "verdicts": {str(k): v for k, v in self.verdicts.items()},
        }


def _decay_exponent(radii, errors) -> float:
    """alpha in error ~ (1 - r)^alpha (least squares over positive errors)."""
    errors = np.asarray(errors, dtype=float)
    ok = errors > 0
    if ok.sum() < 2:
        return math.inf if not ok.any() else math.nan
    x = np.log1p(-np.asarray(radii)[ok])
    return float(np.polyfit(x, np.log(errors[ok]), 1)[0])


def radial_sweep(
    f: PowerSeries,
    orders,
    radii,
    m: Optional[int] = None,
    assert_closed_disk: bool = False,
) -> ConvergenceReport:
    """Sup-errors of angular derivatives on circles of increasing radius."""
    radii = _check_radii(radii)
    orders = [int(orders)] if np.isscalar(orders) else [int(l) for l in orders]
    if any(l < 0 for l in orders):
        raise ValueError("orders must be nonnegative")
    m = default_grid(f, m)
    rim_ok = f.assumed_radius > 1.0 or assert_closed_disk
    errors_ref, errors_rim, sup_norms, exps, growth, verdicts = {}, {} if rim_ok else None, {}, {}, {}, {}
    _, resolved = _sup_profile(f, 0, radii)
    for l in orders:
        samples = [angular_derivative_samples(f, l, r, m) for r in radii]
        ref = samples[-1]
        errors_ref[l] = [float(np.max(np.abs(s - ref))) for s in samples]
        if rim_ok:
            rim_d = exact_trace_derivative(f, l, 1.0, m)
            errors_rim[l] = [float(np.max(np.abs(s - rim_d))) for s in samples]
            exps[l] = _decay_exponent(radii, errors_rim[l])
        else:
            exps[l] = _decay_exponent(radii[:-1], errors_ref[l][:-1])
        sups, res = _sup_profile(f, l, radii)
        sup_norms[l] = [float(s) for s in sups]
        growth[l] = fit_growth(radii, sups, res)
        verdicts[l] = {"bounded": "converges", "divergent": "diverges"}.get(
            growth[l].verdict, "inconclusive"
        )
    return ConvergenceReport(orders, [float(r) for r in radii], errors_ref, errors_rim, sup_norms, exps, growth, verdicts)


def _rim_values(f: PowerSeries, z: np.ndarray, assert_closed_disk: bool) -> np.ndarray:
    if f.assumed_radius <= 1.0 and not assert_closed_disk:
        raise DomainError("rim values need a polynomial or a series convergent beyond |z| = 1")
    z = np.ascontiguousarray(z, dtype=np.complex128)
    return _backend.impl.horner(f.coeffs, z)


def verify_trace_formula(
    f: PowerSeries, m: int = 1024, h: float = 1e-4, assert_closed_disk: bool = False
) -> float:
    """max_t |(g(t+h) - g(t-h)) / 2h - i e^{it} f'(e^{it})| with g(t) = f(e^{it})."""
    t = TWO_PI * np.arange(m) / m
    plus = _rim_values(f, np.exp(1j * (t + h)), assert_closed_disk)
    minus = _rim_values(f, np.exp(1j * (t - h)), assert_closed_disk)
    fd = (plus - minus) / (2.0 * h)
    z = np.exp(1j * t)
    exact = 1j * z * _rim_values(series_derivative(f, 1), z, assert_closed_disk)
    return float(np.max(np.abs(fd - exact)))


# -- A^p classification --------------------------------------------------------


@dataclass
class OrderEvidence:
    order: int
    sup_norms: list
    resolved: list
    fit: GrowthFit
    verdict: str
    forced: bool = False

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "sup_norms": self.sup_norms,
            "resolved": self.resolved,
            "fit": self.fit.to_json(),
            "verdict": self.verdict,
            "forced": self.forced,
        }


@dataclass
class ApClassification:
    """Evidence for membership of f in A^p.

    ``p_hat`` is the largest order judged bounded below the first divergent
    order, ``p_max`` with ``capped`` set when no order diverged, and None when
    an inconclusive order precedes any divergence.
    """

    p_hat: Optional[int]
    capped: bool
    p_max: int
    radii: list
    evidence: list
    thresholds: dict

    @property
    def inconclusive(self) -> int:
        return sum(e.verdict == "inconclusive" for e in self.evidence)

    def to_json(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "capped": self.capped,
            "p_max": self.p_max,
            "inconclusive": self.inconclusive,
            "radii": self.radii,
            "thresholds": self.thresholds,
            "evidence": [e.to_json() for e in self.evidence],
        }


def _summarise(evidence: list, p_max: int):
    seen_div = False
    p_hat, capped, undetermined = None, False, False
    for e in evidence:
        if seen_div:
            if e.verdict != "divergent":
                e.verdict = "divergent"
                e.forced = True
            continue
        if e.verdict == "divergent":
            seen_div = True
            if not undetermined:
                p_hat = e.order - 1
        elif e.verdict == "inconclusive":
            undetermined = True
    if not seen_div and not undetermined:
        p_hat, capped = p_max, True
    return p_hat, capped


def classify_Ap(
    f: PowerSeries,
    p_max: int = 4,
    alpha_div: float = ALPHA_DIV,
    j_range: tuple = J_RANGE,
    residual_tol: float = RESIDUAL_TOL,
    fit_points: int = FIT_POINTS,
    radii: Optional[Sequence[float]] = None,
) -> ApClassification:
    """Heuristic A^p class from the growth of sup_{|z| = rho} |f^{(l)}(z)| as rho -> 1."""
    if p_max < 0:
        raise ValueError("p_max must be nonnegative")
    radii = _check_radii(default_schedule(j_range) if radii is None else radii)
    evidence = []
    for l in range(p_max + 1):
        sups, resolved = _sup_profile(f, l, radii)
        fit = fit_growth(radii, sups, resolved, alpha_div, residual_tol, fit_points)
        evidence.append(OrderEvidence(l, [float(s) for s in sups], [bool(b) for b in resolved], fit, fit.verdict))
    p_hat, capped = _summarise(evidence, p_max)
    thresholds = {
        "alpha_div": alpha_div,
        "residual_tol": residual_tol,
        "j_range": list(j_range),
        "fit_points": fit_points,
        "resolve_tol": RESOLVE_TOL,
    }
    return ApClassification(p_hat, capped, p_max, [float(r) for r in radii], evidence, thresholds)


# -- arc checks ----------------------------------------------------------------


def _complement_window(u: ArcTrace, theta1: float, theta2: float):
    """Map [theta1, theta2] into (b, a + 2 pi); raise unless strictly inside."""
    if not theta2 >= theta1:
        raise ValueError("window must satisfy theta1 <= theta2")
    t1 = u.a + math.fmod(theta1 - u.a, TWO_PI)
    if t1 < u.a:
        t1 += TWO_PI
    t2 = t1 + (theta2 - theta1)
    if not (u.b < t1 and t2 < u.a + TWO_PI):
        raise ValueError("compact window is not inside the open complementary arc")
    return t1, t2


@dataclass
class ArcDecayReport:
    order: int
    window: tuple
    radii: list
    sups: list
    bounds: Optional[list]
    violations: int
    decreasing: bool
    cos_separation: float

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def decay_bound(u_sup: float, length: float, r, cos_sep: float):
    """Bound on |dA/dtheta| off the arc: (1/2pi) |u| (b - a) 2r(1-r^2) / ((1-r)^2 + 2r(1-M))."""
    r = np.asarray(r, dtype=float)
    return u_sup * length * 2.0 * r * (1.0 - r * r) / ((1.0 - r) ** 2 + 2.0 * r * (1.0 - cos_sep)) / TWO_PI


def _arc_sup(u: ArcTrace, n: int = 4097) -> float:
    return float(np.max(np.abs(u(np.linspace(u.a, u.b, n)))))


def arc_decay_check(
    u: ArcTrace,
    window: tuple,
    l: int,
    radii,
    n_theta: int = 64,
    c: float = DEFAULT_C,
) -> ArcDecayReport:
    """Sup of |d^l A / dtheta^l| over a window off the arc, per radius; for l = 1
    also counts samples above the explicit cosine-separation bound."""
    radii = _check_radii(radii)
    t1, t2 = _complement_window(u, *window)
    thetas = np.linspace(t1, t2, n_theta)
    cos_sep = max(math.cos(t1 - u.b), math.cos(t2 - u.a))
    u_sup = _arc_sup(u)
    sups, bounds, violations = [], [] if l == 1 else None, 0
    for r in radii:
        vals = np.abs(arc_extend(u, l, r * np.exp(1j * thetas), c))
        sups.append(float(vals.max()))
        if l == 1:
            bound = float(decay_bound(u_sup, u.length, r, cos_sep))
            bounds.append(bound)
            violations += int(np.sum(vals > bound))
    decreasing = all(b < a for a, b in zip(sups, sups[1:])) or all(s == 0.0 for s in sups)
    return ArcDecayReport(l, (t1, t2), [float(r) for r in radii], sups, bounds, violations, decreasing, cos_sep)


@dataclass
class ArcConvergenceReport:
    order: int
    window: tuple
    radii: list
    sup_errors: list  # sup |d^l A - u^{(l)}| on the window
    b_sups: list  # sup |d^l B| on the window
    split_residuals: list  # sup |d^l (A + B) - d^l G|
    completion_order: int
    spectral_warning: bool

    @property
    def decreasing(self) -> bool:
        e = self.sup_errors
        return all(b < a for a, b in zip(e, e[1:]))

    @property
    def verdict(self) -> str:
        return "converges" if self.decreasing else "inconclusive"

    def to_json(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out.update(decreasing=self.decreasing, verdict=self.verdict)
        return out


def arc_convergence_check(
    u: ArcTrace,
    l: int,
    window: tuple,
    radii,
    p: Optional[int] = None,
    m: int = 1024,
    n_theta: int = 64,
    c: float = DEFAULT_C,
) -> ArcConvergenceReport:
    """Convergence of d^l A / dtheta^l to u^{(l)} on a compact window inside the arc.

    The data is completed to a periodic C^p function G = A + B; the reference
    u^{(l)} is the spectral derivative of the completed trace at grid angles in
    the window.
    """
    radii = _check_radii(radii)
    p = u.derivative_order if p is None else p
    if l > p:
        raise ValueError(f"order {l} exceeds completion order {p}")
    cw, dw = window
    if not (u.a < cw <= dw < u.b):
        raise ValueError("window must lie inside the open arc")
    trace = smooth_arc_completion(u, p, m)
    ref_trace = trace_derivative(trace, l, "spectral")
    grid = trace.angles
    idx = np.flatnonzero((grid >= cw) & (grid <= dw))
    if idx.size == 0:
        raise ValueError("window contains no grid angle; increase m")
    if idx.size > n_theta:
        idx = idx[np.linspace(0, idx.size - 1, n_theta).round().astype(int)]
    thetas = grid[idx]
    ref = ref_trace.samples[idx]
    bridge = hermite_bridge(u, p)
    comp_grid = np.linspace(u.b, u.a + TWO_PI, 257)
    b_trace = ArcTrace((u.b, u.a + TWO_PI), bridge(comp_grid), None, bridge)
    errs, bsups, splits = [], [], []
    for r in radii:
        z = r * np.exp(1j * thetas)
        a_vals = arc_extend(u, l, z, c)
        b_vals = arc_extend(b_trace, l, z, c)
        g_vals = poisson_extend_dtheta(trace, l, z, c).value
        errs.append(float(np.max(np.abs(a_vals - ref))))
        bsups.append(float(np.max(np.abs(b_vals))))
        splits.append(float(np.max(np.abs(a_vals + b_vals - g_vals))))
    return ArcConvergenceReport(
        l, (cw, dw), [float(r) for r in radii], errs, bsups, splits, p, ref_trace.spectral_warning
    )


@dataclass
class ArcClassification:
    arc: tuple
    windows: list
    p: int
    radii: list
    verdicts: dict  # window index -> list of per-order verdicts
    evidence: dict
    trace_formula: Optional[dict]

    def to_json(self) -> dict:
        return {
            "arc": list(self.arc),
            "windows": [list(w) for w in self.windows],
            "p": self.p,
            "radii": self.radii,
            "verdicts": {str(k): v for k, v in self.verdicts.items()},
            "evidence": {str(k): [e.to_json() for e in v] for k, v in self.evidence.items()},
            "trace_formula": self.trace_formula,
        }


def arc_classify(
    f: PowerSeries,
    arc: tuple,
    p: int,
    radii: Optional[Sequence[float]] = None,
    windows: Optional[list] = None,
    h: float = 1e-4,
    fd_points: int = 256,
) -> ArcClassification:
    """Per-window growth verdicts for f^{(l)}, l <= p, near an open arc (a, b).

    Sups are taken over angle windows compactly inside the arc (default: the
    arc shrunk by 10% of its length at each end).
    """
    a, b = (float(x) for x in arc)
    if not (b > a and b - a < TWO_PI):
        raise ValueError("arc must satisfy a < b < a + 2 pi")
    radii = _check_radii(default_schedule() if radii is None else radii)
    if windows is None:
        inset = 0.1 * (b - a)
        windows = [(a + inset, b - inset)]
    for wa, wb in windows:
        if not (a < wa <= wb < b):
            raise ValueError("windows must lie compactly inside the arc")
    verdicts, evidence = {}, {}
    tf = None
    for w, (wa, wb) in enumerate(windows):

        def in_window(t, wa=wa, wb=wb):
            return angular_distance_to_arc(t, wa, wb) == 0.0

        ev = []
        for l in range(p + 1):
            sups, resolved = _sup_profile(f, l, radii, in_window)
            fit = fit_growth(radii, sups, resolved)
            ev.append(OrderEvidence(l, [float(s) for s in sups], [bool(x) for x in resolved], fit, fit.verdict))
        _summarise(ev, p)
        evidence[w] = ev
        verdicts[w] = [{"bounded": "convergent", "divergent": "divergent"}.get(e.verdict, "inconclusive") for e in ev]
        if w == 0 and p >= 1 and ev[1].verdict == "bounded":
            tf = _window_trace_formula(f, wa, wb, radii, ev[1], h, fd_points)
    return ArcClassification((a, b), [tuple(x) for x in windows], p, [float(r) for r in radii], verdicts, evidence, tf)


def _window_trace_formula(f, wa, wb, radii, ev, h, n):
    """FD check of d/dt f(rho e^{it}) = i rho e^{it} f'(rho e^{it}) on the window, at
    the rim when f converges beyond it, else at the outermost resolved radius."""
    if f.assumed_radius > 1.0:
        rho = 1.0
    else:
        res = [r for r, ok in zip(radii, ev.resolved) if ok]
        rho = res[-1] if res else float(radii[0])
    t = np.linspace(wa, wb, n)
    horner = _backend.impl.horner
    plus = horner(f.coeffs, np.ascontiguousarray(rho * np.exp(1j * (t + h))))
    minus = horner(f.coeffs, np.ascontiguousarray(rho * np.exp(1j * (t - h))))
    z = np.ascontiguousarray(rho * np.exp(1j * t))
    exact = 1j * z * horner(series_derivative(f, 1).coeffs, z)
    disc = float(np.max(np.abs((plus - minus) / (2 * h) - exact)))
    scale = float(np.max(np.abs(exact)))
    return {"radius": rho, "h": h, "max_discrepancy": disc, "relative": disc / scale if scale else 0.0}
