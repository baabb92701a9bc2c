"""Analytic Jordan domains given by disk maps phi with radius of convergence > 1.

Functions on the domain enter through their pull-back f o phi, so every
analysis runs on the unit disk.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from rimtrace import _backend
from rimtrace.series import BoundaryTrace, PowerSeries, sample_values, series_derivative
from rimtrace.seminorms import SeminormVector, trace_seminorms
from rimtrace.smoothness import ApClassification, classify_Ap

TWO_PI = 2.0 * math.pi
INTERSECT_TOL = 1e-9
DERIV_TOL = 1e-10
DEFAULT_SEGMENTS = 4096
DEFAULT_DEGREE = 256
TAIL_TOL = 1e-10


class ChartError(ValueError):
    """Rejected disk map; ``witness`` says why (root location or crossing segments)."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class Certificate:
    status: str  # verified | asserted | failed
    segments: int
    min_abs_derivative: float
    winding_of_derivative: int

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "segments": self.segments,
            "min_abs_derivative": self.min_abs_derivative,
            "winding_of_derivative": self.winding_of_derivative,
        }


@dataclass(frozen=True)
class AnalyticDiskMap:
    phi: PowerSeries
    certificate: Certificate


@dataclass(frozen=True, eq=False)
class JordanChart:
    """Boundary samples gamma(t_j) = phi(e^{i t_j}) and gamma'(t_j) on an M-grid."""

    map: AnalyticDiskMap
    gamma: np.ndarray = field(repr=False)
    dgamma: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.gamma.size

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.size) / self.size

    @property
    def phi(self) -> PowerSeries:
        return self.map.phi

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "re_gamma", "im_gamma", "re_dgamma", "im_dgamma"])
        for t, g, d in zip(self.angles, self.gamma, self.dgamma):
            w.writerow([repr(float(t)), repr(g.real), repr(g.imag), repr(d.real), repr(d.imag)])
        return buf.getvalue()


def _winding(values: np.ndarray) -> int:
    """Winding number about 0 of the closed polygon through ``values``."""
    steps = np.angle(np.roll(values, -1) / values)
    return int(round(steps.sum() / TWO_PI))


def _segments_cross(p, q, r, s, tol):
    """Vectorised segment intersection test for segments p->q and r->s."""
    d1 = q - p
    d2 = s - r
    cross = lambda a, b: a.real * b.imag - a.imag * b.real  # noqa: E731
    den = cross(d1, d2)
    diff = r - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross(diff, d2) / den
        u = cross(diff, d1) / den
    proper = (np.abs(den) > 0) & (t >= -tol) & (t <= 1 + tol) & (u >= -tol) & (u <= 1 + tol)
    # parallel segments: flag when they overlap within tol
    par = np.abs(den) <= 0
    if np.any(par):
        dist = np.abs(cross(diff, d1)) / np.maximum(np.abs(d1), 1e-300)
        proper |= par & (dist <= tol)
    return proper


def find_self_intersection(points: np.ndarray, tol: float = INTERSECT_TOL):
    """First pair (i, j) of non-adjacent crossing segments of the closed polygon, or None.

    Candidate pairs come from a uniform spatial hash with cell size equal to
    the longest segment.
    """
    n = points.size
    start = points
    end = np.roll(points, -1)
    cell = float(np.max(np.abs(end - start))) + tol
    lo = np.minimum(start.real, end.real), np.minimum(start.imag, end.imag)
    hi = np.maximum(start.real, end.real), np.maximum(start.imag, end.imag)
    ix0 = np.floor((lo[0] - tol) / cell).astype(int)
    iy0 = np.floor((lo[1] - tol) / cell).astype(int)
    ix1 = np.floor((hi[0] + tol) / cell).astype(int)
    iy1 = np.floor((hi[1] + tol) / cell).astype(int)
    buckets = defaultdict(list)
    for s in range(n):
        for gx in range(ix0[s], ix1[s] + 1):
            for gy in range(iy0[s], iy1[s] + 1):
                buckets[(gx, gy)].append(s)
    pairs = set()
    for members in buckets.values():
        if len(members) < 2:
            continue
        arr = np.array(members)
        a, b = np.meshgrid(arr, arr, indexing="ij")
        keep = a < b
        for i, j in zip(a[keep], b[keep]):
            if j - i > 1 and not (i == 0 and j == n - 1):
                pairs.add((int(i), int(j)))
    if not pairs:
        return None
    ij = np.array(sorted(pairs))
    hit = _segments_cross(start[ij[:, 0]], end[ij[:, 0]], start[ij[:, 1]], end[ij[:, 1]], tol)
    if np.any(hit):
        i, j = ij[np.argmax(hit)]
        return int(i), int(j)
    return None


def _derivative_roots_in_disk(phi: PowerSeries) -> list:
    d = series_derivative(phi, 1).coeffs
    nz = np.flatnonzero(np.abs(d) > 0)
    if nz.size == 0:
        return [0.0]
    d = d[: nz[-1] + 1]
    if d.size < 2:
        return []
    roots = np.roots(d[::-1])
    return [complex(z) for z in roots if abs(z) <= 1.0 + 1e-12]


def build_chart(
    phi: PowerSeries,
    m: int = 1024,
    segments: int = DEFAULT_SEGMENTS,
    tol: float = INTERSECT_TOL,
) -> JordanChart:
    """Sample gamma = phi(e^{it}) and gamma' = i e^{it} phi'(e^{it}); reject maps
    whose derivative vanishes on the closed disk or whose boundary curve is not
    simple on the check grid."""
    if not phi.assumed_radius > 1.0:
        raise ValueError("disk map must converge on a disk of radius > 1")
    dphi = series_derivative(phi, 1)
    rim_d = sample_values(dphi, 1.0, segments)
    min_d = float(np.min(np.abs(rim_d)))
    if min_d < DERIV_TOL:
        k = int(np.argmin(np.abs(rim_d)))
        raise ChartError(
            "phi' vanishes on the unit circle",
            {"kind": "derivative_root", "location": [math.cos(TWO_PI * k / segments), math.sin(TWO_PI * k / segments)]},
        )
    wind = _winding(rim_d)
    if wind != 0:
        roots = _derivative_roots_in_disk(phi)
        loc = roots[0] if roots else None
        raise ChartError(
            f"phi' has {wind} zero(s) inside the unit disk",
            {
                "kind": "derivative_root",
                "count": wind,
                "location": None if loc is None else [loc.real, loc.imag],
            },
        )
    curve = sample_values(phi, 1.0, segments)
    pair = find_self_intersection(curve, tol)
    if pair is not None:
        i, j = pair
        raise ChartError(
            "boundary curve intersects itself",
            {"kind": "intersection", "segments": [i, j], "t": [TWO_PI * i / segments, TWO_PI * j / segments]},
        )
    cert = Certificate("verified", segments, min_d, wind)
    t = TWO_PI * np.arange(m) / m
    gamma = sample_values(phi, 1.0, m)
    dgamma = 1j * np.exp(1j * t) * sample_values(dphi, 1.0, m)
    if np.min(np.abs(dgamma)) < DERIV_TOL:
        raise ChartError("gamma' vanishes on the sample grid", {"kind": "derivative_root", "location": None})
    gamma.setflags(write=False)
    dgamma.setflags(write=False)
    return JordanChart(AnalyticDiskMap(phi, cert), gamma, dgamma)


# -- composition ---------------------------------------------------------------


def _mul_trunc(x: np.ndarray, y: np.ndarray, degree: int) -> np.ndarray:
    n = min(x.size + y.size - 1, degree + 1)
    size = 1 << (x.size + y.size - 2).bit_length()
    return np.fft.ifft(np.fft.fft(x, size) * np.fft.fft(y, size))[:n]


def _compose(f: PowerSeries, phi: PowerSeries, degree: int) -> np.ndarray:
    out = np.array([f.coeffs[-1]], dtype=np.complex128)
    for a in f.coeffs[-2::-1]:
        out = _mul_trunc(out, phi.coeffs, degree)
        out[0] += a
    if out.size < degree + 1:
        out = np.concatenate([out, np.zeros(degree + 1 - out.size)])
    return out


@dataclass(frozen=True)
class Composition:
    """Truncated series of f o phi and the estimated tail sum_{n > degree} |c_n|."""

    series: PowerSeries
    tail_estimate: float


def compose(f: PowerSeries, phi: PowerSeries, degree: int = DEFAULT_DEGREE) -> Composition:
    """f o phi truncated at ``degree``; the tail is estimated from degrees (degree, 2 degree]."""
    if phi.coeffs.size and abs(phi.coeffs[0]) >= f.assumed_radius:
        raise ValueError("phi(0) lies outside the disk of convergence of f")
    exact_degree = f.degree * max(phi.degree, 1)
    if exact_degree <= degree:
        coeffs = _compose(f, phi, exact_degree)
        tail = 0.0
    else:
        full = _compose(f, phi, 2 * degree)
        coeffs = full[: degree + 1]
        tail = float(np.sum(np.abs(full[degree + 1 :])))
    # entire f keeps phi's radius; otherwise only the closed disk is asserted
    radius = phi.assumed_radius if math.isinf(f.assumed_radius) else 1.0
    return Composition(PowerSeries(coeffs, radius), tail)


def transfer_trace(
    f: PowerSeries,
    chart: JordanChart,
    degree: int = DEFAULT_DEGREE,
    tail_tol: float = TAIL_TOL,
) -> BoundaryTrace:
    """Samples of g(t) = f(gamma(t)) from the composed series f o phi."""
    if np.max(np.abs(chart.gamma)) >= f.assumed_radius:
        raise ValueError("boundary curve leaves the disk of convergence of f")
    comp = compose(f, chart.phi, degree)
    if comp.tail_estimate > tail_tol:
        raise ValueError(f"composition truncation tail {comp.tail_estimate:.3g} above tolerance {tail_tol:.3g}")
    return BoundaryTrace(sample_values(comp.series, 1.0, chart.size))


def verify_chain_rule(F: PowerSeries, chart: JordanChart, h: float = 1e-4) -> float:
    """max_t |(F(gamma(t+h)) - F(gamma(t-h))) / 2h - F'(gamma(t)) gamma'(t)|."""
    horner = _backend.impl.horner
    t = chart.angles
    phi = chart.phi.coeffs
    gp = horner(phi, np.ascontiguousarray(np.exp(1j * (t + h))))
    gm = horner(phi, np.ascontiguousarray(np.exp(1j * (t - h))))
    if max(np.max(np.abs(gp)), np.max(np.abs(gm))) >= F.assumed_radius:
        raise ValueError("boundary curve leaves the disk of convergence of F")
    fd = (horner(F.coeffs, gp) - horner(F.coeffs, gm)) / (2.0 * h)
    exact = horner(series_derivative(F, 1).coeffs, np.ascontiguousarray(chart.gamma)) * chart.dgamma
    return float(np.max(np.abs(fd - exact)))


def classify_Ap_domain(
    composition, chart: JordanChart, p_max: int = 4, tail_tol: float = TAIL_TOL, **kwargs
) -> ApClassification:
    """A^p evidence for f on the domain, read off the pull-back f o phi on the disk."""
    if isinstance(composition, Composition):
        series, tail = composition.series, composition.tail_estimate
    else:
        series, tail = composition, 0.0
    result = classify_Ap(series, p_max, **kwargs)
    if tail > tail_tol:
        for e in result.evidence:
            e.verdict = "inconclusive"
        result.p_hat, result.capped = None, False
    result.thresholds = {**result.thresholds, "tail_estimate": tail, "tail_tol": tail_tol, "domain": True}
    return result


def domain_seminorms(
    f: PowerSeries, chart: JordanChart, p: int, degree: int = DEFAULT_DEGREE
) -> SeminormVector:
    """sup_t |d^l (f o gamma) / dt^l| for l <= p, by spectral differentiation."""
    return trace_seminorms(transfer_trace(f, chart, degree), p)
