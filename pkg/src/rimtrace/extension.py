"""Poisson integrals of full-circle and arc data, and their angular derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.interpolate import BPoly

from rimtrace.kernel import kernel_sum
from rimtrace.series import (
    ArcTrace,
    BoundaryTrace,
    DomainError,
    resample,
    trace_derivative,
    trig_interpolate,
)

TWO_PI = 2.0 * math.pi
DEFAULT_C = 64
DELTA_MIN = 1e-8
PANEL = 16
RIM_TOL = 8 * np.finfo(float).eps

__all__ = [
    "ProximityError",
    "OrderError",
    "DerivativeEstimate",
    "ExtensionField",
    "poisson_extend",
    "poisson_extend_dtheta",
    "arc_extend",
    "split_extension",
    "hermite_bridge",
    "smooth_arc_completion",
    "angular_distance_to_arc",
    "circle_nodes",
]


class ProximityError(DomainError):
    """Rim evaluation too close to the closed arc carrying the data."""


class OrderError(ValueError):
    """Derivative order beyond the smoothness claimed for the data."""


def _polar(z):
    z = np.asarray(z, dtype=np.complex128)
    return z, np.abs(z), np.angle(z)


def circle_nodes(m: int, rmax: float, c: float = DEFAULT_C) -> int:
    """Periodic trapezoid node count: at least 4 M, and C / (1 - r) near the rim."""
    need = max(4 * m, math.ceil(c / max(1.0 - rmax, 1e-300)))
    return 1 << (need - 1).bit_length()


def _circle_integral(samples: np.ndarray, l: int, r, theta, c: float) -> np.ndarray:
    q = circle_nodes(samples.size, float(np.max(r)) if np.size(r) else 0.0, c)
    values = resample(samples, q)
    nodes = TWO_PI * np.arange(q) / q
    return kernel_sum(l, r, theta, nodes, values / q)


def poisson_extend(u: BoundaryTrace, z, c: float = DEFAULT_C):
    """(1/2 pi) int u(t) P_z(t) dt for |z| < 1 (vectorised over z)."""
    z, r, theta = _polar(z)
    if np.any(r >= 1.0):
        raise DomainError("Poisson extension is evaluated inside the disk only")
    out = _circle_integral(u.samples, 0, r.ravel(), theta.ravel(), c).reshape(z.shape)
    return complex(out) if z.ndim == 0 else out


@dataclass(frozen=True)
class DerivativeEstimate:
    """Angular derivative computed by differentiating the data (``value``) and
    by differentiating the kernel (``alternate``)."""

    value: Union[complex, np.ndarray]
    alternate: Union[complex, np.ndarray]

    @property
    def discrepancy(self) -> float:
        return float(np.max(np.abs(np.asarray(self.value) - np.asarray(self.alternate))))


def poisson_extend_dtheta(u: BoundaryTrace, l: int, z, c: float = DEFAULT_C) -> DerivativeEstimate:
    """d^l/dtheta^l of the Poisson extension at z = r e^{i theta}, computed two ways."""
    if l > u.smoothness_claim:
        raise OrderError(f"order {l} exceeds the trace's smoothness claim {u.smoothness_claim}")
    z, r, theta = _polar(z)
    if np.any(r >= 1.0):
        raise DomainError("Poisson extension is evaluated inside the disk only")
    du = trace_derivative(u, l, "spectral")
    a = _circle_integral(du.samples, 0, r.ravel(), theta.ravel(), c).reshape(z.shape)
    b = _circle_integral(u.samples, l, r.ravel(), theta.ravel(), c).reshape(z.shape)
    if z.ndim == 0:
        return DerivativeEstimate(complex(a), complex(b))
    return DerivativeEstimate(a, b)


def angular_distance_to_arc(theta, a: float, b: float) -> np.ndarray:
    """Distance in angle from theta to the closed parameter arc [a, b]."""
    phi = np.mod(np.asarray(theta, dtype=float) - a, TWO_PI)
    length = b - a
    return np.where(phi <= length, 0.0, np.minimum(phi - length, TWO_PI - phi))


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def arc_nodes(a: float, b: float, n_min: int, scale: float, c: float = DEFAULT_C):
    """Composite Gauss-Legendre nodes/weights on [a, b] with panels of width ~ scale / 4."""
    length = b - a
    n_nodes = max(n_min, math.ceil(c * length / scale))
    panels = max(1, math.ceil(n_nodes / PANEL))
    x, w = _gauss(PANEL)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def arc_extend(u: ArcTrace, l: int, z, c: float = DEFAULT_C, delta_min: float = DELTA_MIN):
    """(1/2 pi) int_a^b u(t) d^l/dtheta^l P(z, t) dt, vectorised over z.

    On the rim (|z| = 1) off the closed arc the kernel factor 1 - r^2 vanishes
    and the result is exactly zero.  Points outside the closed disk are not
    supported.
    """
    if l < 0:
        raise ValueError("derivative order must be nonnegative")
    z, r, theta = _polar(z)
    r = r.ravel()
    theta = theta.ravel()
    # |e^{i theta}| may round to 1 +- a few ulps
    r = np.where(np.abs(r - 1.0) <= RIM_TOL, 1.0, r)
    if np.any(r > 1.0):
        raise DomainError("arc extension is only evaluated on the closed disk")
    dist = angular_distance_to_arc(theta, u.a, u.b)
    rim = r == 1.0
    chord = 2.0 * np.sin(0.5 * dist)
    if np.any(rim & (chord < delta_min)):
        raise ProximityError(f"rim point within {delta_min} of the closed arc [{u.a}, {u.b}]")
    out = np.zeros(r.shape, dtype=np.complex128)
    if r.size:
        scale = float(np.min(np.maximum(1.0 - r, dist)))
        scale = max(scale, 1e-12)
        nodes, weights = arc_nodes(u.a, u.b, 4 * u.samples.size, scale, c)
        vals = u(nodes) * weights / TWO_PI
        out = kernel_sum(l, r, theta, nodes, vals)
    out = out.reshape(z.shape)
    return complex(out) if z.ndim == 0 else out


@dataclass(frozen=True)
class ExtensionField:
    """Poisson integral of a full trace or an arc trace, evaluable at any z."""

    source: Union[BoundaryTrace, ArcTrace]
    c: float = DEFAULT_C

    def __call__(self, z, l: int = 0):
        if isinstance(self.source, ArcTrace):
            return arc_extend(self.source, l, z, self.c)
        if l == 0:
            return poisson_extend(self.source, z, self.c)
        return poisson_extend_dtheta(self.source, l, z, self.c).value


def split_extension(g: BoundaryTrace, t1: float, t2: float, c: float = DEFAULT_C):
    """Split the Poisson extension of g into the arc pieces over [t1, t2] and
    [t2, t1 + 2 pi]; returns the two fields (A, B) with A + B = extension of g."""
    if not (0.0 <= t1 < t2 < t1 + TWO_PI):
        raise ValueError("arc must satisfy 0 <= t1 < t2 < t1 + 2 pi")
    samples = np.array(g.samples)

    def interp(t):
        return trig_interpolate(samples, t)

    n = g.size + 1
    first = ArcTrace((t1, t2), interp(np.linspace(t1, t2, n)), None, interp)
    second = ArcTrace((t2, t1 + TWO_PI), interp(np.linspace(t2, t1 + TWO_PI, n)), None, interp)
    return ExtensionField(first, c), ExtensionField(second, c)


def hermite_bridge(u: ArcTrace, p: int):
    """Two-point Hermite polynomial on [b, a + 2 pi] matching u to order p at both ends."""
    if p < 0:
        raise ValueError("completion order must be nonnegative")
    if u.endpoint_derivatives is None:
        raise ValueError("smooth completion needs endpoint derivative data")
    if u.derivative_order < p:
        raise ValueError(f"endpoint data available to order {u.derivative_order}, requested {p}")
    left = np.array(u.endpoint_derivatives["b"][: p + 1])
    right = np.array(u.endpoint_derivatives["a"][: p + 1])
    x = [u.b, u.a + TWO_PI]
    re = BPoly.from_derivatives(x, [left.real, right.real])
    im = BPoly.from_derivatives(x, [left.imag, right.imag])

    def bridge(t, nu: int = 0):
        t = np.asarray(t, dtype=float)
        return re(t, nu) + 1j * im(t, nu)

    return bridge


def completion_function(u: ArcTrace, p: int):
    """The completed 2 pi-periodic function: u on [a, b], Hermite bridge elsewhere."""
    bridge = hermite_bridge(u, p)

    def g(t):
        t = np.asarray(t, dtype=float)
        phi = u.a + np.mod(t - u.a, TWO_PI)
        on_arc = phi <= u.b
        out = np.empty(phi.shape, dtype=np.complex128)
        out[on_arc] = u(phi[on_arc])
        out[~on_arc] = bridge(phi[~on_arc])
        return out

    return g


def smooth_arc_completion(u: ArcTrace, p: int, m: int = 1024) -> BoundaryTrace:
    """Periodic C^p trace equal to u on the arc and to a Hermite bridge off it."""
    g = completion_function(u, p)
    t = TWO_PI * np.arange(m) / m
    return BoundaryTrace(g(t), smoothness_claim=p)
