"""Poisson and Herglotz kernels on the unit disk.

Angular derivatives of the Poisson kernel are evaluated from the Herglotz
form P_r(x) = Re[(1 + w) / (1 - w)], w = r e^{ix}:

    d^l/dx^l P_r(x) = 2 Re[ i^l sum_{k=1}^{l} S(l, k) k! w^k / (1 - w)^{k+1} ],  l >= 1,

with S the Stirling numbers of the second kind, and 1 - w computed as
(1 - r) + 2 r sin^2(x/2) - i r sin x to avoid cancellation near the peak.
Every derivative carries the factor 1 - r^2 and vanishes identically on the
rim away from the peak; there it is returned as an exact zero.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from rimtrace import _backend

__all__ = [
    "KernelDomainError",
    "KernelPoint",
    "kernel_coefficients",
    "poisson_eval",
    "poisson_dtheta",
    "herglotz_eval",
    "herglotz_dz",
    "kernel_sum",
    "POLE_TOL",
]

POLE_TOL = 1e-14
TWO_PI = 2.0 * math.pi


class KernelDomainError(ValueError):
    """Evaluation point outside the kernel's domain."""


class KernelPoint:
    """A radius/angle-difference pair validated against the kernel domain."""

    __slots__ = ("r", "dtheta")

    def __init__(self, r: float, dtheta: float):
        r = float(r)
        if not 0.0 <= r <= 1.0:
            raise KernelDomainError(f"radius {r} outside [0, 1]")
        dtheta = float(dtheta)
        if r == 1.0 and _on_peak(dtheta):
            raise KernelDomainError("kernel is singular at r = 1, dtheta = 0 (mod 2pi)")
        self.r = r
        self.dtheta = dtheta

    def __repr__(self) -> str:
        return f"KernelPoint(r={self.r!r}, dtheta={self.dtheta!r})"


def _on_peak(dtheta) -> np.ndarray:
    red = np.mod(dtheta, TWO_PI)
    return (red == 0.0) | (red == TWO_PI)


@lru_cache(maxsize=None)
def kernel_coefficients(l: int) -> np.ndarray:
    """A_k = S(l, k) k! for k = 0..l (exact integers stored as float64)."""
    if l < 0:
        raise ValueError("derivative order must be nonnegative")
    row = [1]  # S(0, k)
    for n in range(1, l + 1):
        prev = row + [0]
        row = [0] + [k * prev[k] + prev[k - 1] for k in range(1, n + 1)]
    coef = [s * math.factorial(k) for k, s in enumerate(row)]
    if max(coef) >= 2**53:
        raise OverflowError(f"kernel coefficient too large at order {l}")
    out = np.array(coef, dtype=np.float64)
    out.setflags(write=False)
    return out


def _check_radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any((r < 0.0) | (r > 1.0)) or np.any(np.isnan(r)):
        raise KernelDomainError("radius outside [0, 1]")
    return r


def poisson_dtheta(l: int, r, dtheta):
    """l-th angular derivative of P_r at ``dtheta`` (vectorised over r, dtheta)."""
    if l < 0:
        raise ValueError("derivative order must be nonnegative")
    r = _check_radius(r)
    dtheta = np.asarray(dtheta, dtype=float)
    r, dtheta = np.broadcast_arrays(r, dtheta)
    if np.any((r == 1.0) & _on_peak(dtheta)):
        raise KernelDomainError("kernel is singular at r = 1, dtheta = 0 (mod 2pi)")
    out = _backend.pure.kernel_values(l, kernel_coefficients(l), r, dtheta)
    return float(out) if out.ndim == 0 else out


def poisson_eval(r, dtheta):
    """Poisson kernel (1 - r^2) / (1 + r^2 - 2 r cos dtheta)."""
    return poisson_dtheta(0, r, dtheta)


def _herglotz_denominator(z, t, pole_tol):
    e = np.exp(-1j * np.asarray(t, dtype=float))
    den = 1.0 - e * np.asarray(z, dtype=complex)
    if np.any(np.abs(den) < pole_tol):
        raise KernelDomainError("evaluation at the Herglotz kernel pole z = e^{it}")
    return e, den


def herglotz_eval(z, t, pole_tol: float = POLE_TOL):
    """Herglotz kernel (1 + e^{-it} z) / (1 - e^{-it} z); its real part is P_z(t)."""
    e, den = _herglotz_denominator(z, t, pole_tol)
    out = (1.0 + e * np.asarray(z, dtype=complex)) / den
    return complex(out) if np.ndim(out) == 0 else out


def herglotz_dz(z, t, pole_tol: float = POLE_TOL):
    """z-derivative of the Herglotz kernel, 2 e^{-it} / (1 - e^{-it} z)^2."""
    e, den = _herglotz_denominator(z, t, pole_tol)
    out = 2.0 * e / den**2
    return complex(out) if np.ndim(out) == 0 else out


def kernel_sum(l: int, r, theta, nodes, weights) -> np.ndarray:
    """sum_j weights[j] * d^l P_{r_i}(theta_i - nodes[j]) for every target i.

    This is the hot loop behind every Poisson integral in the package and is
    dispatched to the compiled backend when it is available.
    """
    r = np.ascontiguousarray(np.atleast_1d(r), dtype=np.float64)
    theta = np.ascontiguousarray(np.atleast_1d(theta), dtype=np.float64)
    r, theta = (np.ascontiguousarray(a) for a in np.broadcast_arrays(r, theta))
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    return _backend.impl.kernel_sum(l, kernel_coefficients(l), r, theta, nodes, weights)
