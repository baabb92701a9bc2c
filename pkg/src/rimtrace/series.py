"""Holomorphic functions as truncated Taylor series, and sampled boundary data."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from rimtrace import _backend

TWO_PI = 2.0 * math.pi
UNBOUNDED = math.inf

__all__ = [
    "DomainError",
    "PowerSeries",
    "BoundaryTrace",
    "ArcTrace",
    "CircleGrid",
    "series_eval",
    "series_derivative",
    "trace_from_series",
    "trace_derivative",
    "trig_interpolate",
    "sample_values",
    "falling_factorial",
    "UNBOUNDED",
]


class DomainError(ValueError):
    """Argument outside the domain where the object is defined."""


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """f(z) = sum_n coeffs[n] z^n, declared convergent for |z| < assumed_radius."""

    coeffs: np.ndarray
    assumed_radius: float = UNBOUNDED

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=np.complex128)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if not self.assumed_radius > 0:
            raise ValueError("assumed_radius must be positive")

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return series_eval(self, z)

    def scaled(self, c: complex) -> "PowerSeries":
        return PowerSeries(self.coeffs * c, self.assumed_radius)

    def dilated(self, rho: float) -> "PowerSeries":
        """z -> f(rho z), convergent for |z| < assumed_radius / rho."""
        n = np.arange(self.coeffs.size)
        return PowerSeries(self.coeffs * rho**n, self.assumed_radius / rho)

    def truncated(self, degree: int) -> "PowerSeries":
        return PowerSeries(self.coeffs[: degree + 1], self.assumed_radius)

    def to_json(self) -> dict:
        return {
            "coeffs": [[float(a.real), float(a.imag)] for a in self.coeffs],
            "assumed_radius": _json_radius(self.assumed_radius),
        }

    @classmethod
    def from_json(cls, spec: dict) -> "PowerSeries":
        unknown = set(spec) - {"coeffs", "assumed_radius"}
        if unknown:
            raise ValueError(f"unknown keys in series spec: {sorted(unknown)}")
        coeffs = []
        for a in spec["coeffs"]:
            if isinstance(a, (list, tuple)):
                re, im = a
                coeffs.append(complex(re, im))
            else:
                coeffs.append(complex(a))
        radius = spec.get("assumed_radius", UNBOUNDED)
        return cls(np.array(coeffs), _parse_radius(radius))


def _json_radius(r: float):
    return "inf" if math.isinf(r) else float(r)


def _parse_radius(r) -> float:
    if isinstance(r, str):
        return float(r)
    return float(r)


def series_eval(f: PowerSeries, z):
    """Horner evaluation; vectorised over ``z``."""
    z_arr = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z_arr) >= f.assumed_radius):
        raise DomainError("evaluation point outside the disk of convergence")
    flat = np.ascontiguousarray(z_arr.ravel())
    out = _backend.impl.horner(f.coeffs, flat).reshape(z_arr.shape)
    return complex(out) if z_arr.ndim == 0 else out


def falling_factorial(n: np.ndarray, l: int) -> np.ndarray:
    """n (n-1) ... (n-l+1) elementwise, as float."""
    out = np.ones(np.shape(n))
    for q in range(l):
        out = out * (np.asarray(n, dtype=float) - q)
    return out


def series_derivative(f: PowerSeries, l: int) -> PowerSeries:
    if l < 0:
        raise ValueError("derivative order must be nonnegative")
    if l == 0:
        return f
    n = np.arange(l, f.coeffs.size)
    if n.size == 0:
        return PowerSeries(np.zeros(1), f.assumed_radius)
    return PowerSeries(f.coeffs[l:] * falling_factorial(n, l), f.assumed_radius)


def sample_values(f: PowerSeries, rho: float, m: int) -> np.ndarray:
    """f(rho e^{2 pi i j / m}) for j < m, by folding coefficients into one FFT."""
    n = np.arange(f.coeffs.size)
    with np.errstate(over="ignore"):
        weighted = f.coeffs * (rho**n if rho != 1.0 else 1.0)
    folded = np.bincount(n % m, weights=weighted.real, minlength=m) + 1j * np.bincount(
        n % m, weights=weighted.imag, minlength=m
    )
    return np.fft.ifft(folded) * m


def exact_trace_derivative(f: PowerSeries, l: int, rho: float, m: int) -> np.ndarray:
    """d^l/dt^l f(rho e^{it}) on the uniform m-grid, from the exact Fourier
    coefficients c_n rho^n (i n)^l; no roundoff amplification by (m/2)^l."""
    n = np.arange(f.coeffs.size)
    spec = np.zeros(m, dtype=np.complex128)
    np.add.at(spec, n % m, f.coeffs * rho**n * (1j * n) ** l)
    return np.fft.ifft(spec) * m


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Uniform samples g(2 pi j / M) of a 2 pi-periodic function.

    ``smoothness_claim`` is the order p for which g is claimed C^p
    (``UNBOUNDED`` for C^infinity).  ``spectral_warning`` is set by operations
    whose output is not trustworthy because the input spectrum is unresolved.
    """

    samples: np.ndarray
    smoothness_claim: float = UNBOUNDED
    spectral_warning: bool = False

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128).ravel()
        if s.size < 16 or not _is_pow2(s.size):
            raise ValueError("trace length must be a power of two and at least 16")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.smoothness_claim < 0:
            raise ValueError("smoothness claim must be nonnegative")

    @property
    def size(self) -> int:
        return self.samples.size

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.size) / self.size

    def mean(self) -> complex:
        return complex(self.samples.mean())

    def __call__(self, t):
        return trig_interpolate(self.samples, t)

    @classmethod
    def from_function(cls, func: Callable, m: int, smoothness_claim: float = UNBOUNDED):
        t = TWO_PI * np.arange(m) / m
        return cls(func(t), smoothness_claim)

    def to_json(self) -> dict:
        return {
            "samples": [[float(v.real), float(v.imag)] for v in self.samples],
            "smoothness_claim": _json_radius(self.smoothness_claim),
        }

    @classmethod
    def from_json(cls, spec: dict) -> "BoundaryTrace":
        unknown = set(spec) - {"samples", "smoothness_claim"}
        if unknown:
            raise ValueError(f"unknown keys in trace spec: {sorted(unknown)}")
        samples = [complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in spec["samples"]]
        return cls(np.array(samples), _parse_radius(spec.get("smoothness_claim", UNBOUNDED)))


def _signed_frequencies(m: int) -> np.ndarray:
    return np.fft.fftfreq(m, d=1.0 / m)


def trig_interpolate(samples: np.ndarray, t) -> np.ndarray:
    """Evaluate the trigonometric interpolant of uniform samples at arbitrary t.

    The Nyquist mode is split evenly between +-M/2 so real data interpolate
    to a real function.
    """
    samples = np.asarray(samples, dtype=np.complex128)
    m = samples.size
    coef = np.fft.fft(samples) / m
    k = _signed_frequencies(m)
    t_arr = np.asarray(t, dtype=float)
    flat = t_arr.ravel()
    out = np.zeros(flat.size, dtype=np.complex128)
    step = max(1, (1 << 22) // m)
    for lo in range(0, flat.size, step):
        e = np.exp(1j * np.outer(flat[lo : lo + step], k))
        if m % 2 == 0:
            nyq = m // 2
            # k[nyq] = -M/2; average with +M/2
            e[:, nyq] = np.cos(0.5 * m * flat[lo : lo + step])
        out[lo : lo + step] = e @ coef
    return out.reshape(t_arr.shape)


def resample(samples: np.ndarray, q: int) -> np.ndarray:
    """Trigonometric interpolation of M uniform samples onto q >= M uniform nodes."""
    m = samples.size
    if q == m:
        return np.asarray(samples, dtype=np.complex128)
    if q < m:
        raise ValueError("resampling only refines the grid")
    coef = np.fft.fft(samples)
    padded = np.zeros(q, dtype=np.complex128)
    half = m // 2
    padded[:half] = coef[:half]
    padded[q - half + 1 :] = coef[half + 1 :]
    if m % 2 == 0:
        padded[half] = 0.5 * coef[half]
        padded[q - half] = 0.5 * coef[half]
    return np.fft.ifft(padded) * (q / m)


def trace_from_series(
    f: PowerSeries, rho: float, m: int, assert_closed_disk: bool = False
) -> BoundaryTrace:
    """Samples t -> f(rho e^{it}).

    Rim sampling of a series whose declared radius is exactly ``rho`` is only
    allowed when the caller asserts continuity on the closed disk.
    """
    if rho < 0 or rho > 1:
        raise DomainError("sampling radius must lie in [0, 1]")
    if rho > f.assumed_radius or (rho == f.assumed_radius and not assert_closed_disk):
        raise DomainError("sampling radius reaches the boundary of convergence")
    return BoundaryTrace(sample_values(f, rho, m))


def spectral_energy_warning(samples: np.ndarray) -> bool:
    """True when the top quarter of the discrete spectrum holds > 1% of the energy."""
    m = samples.size
    power = np.abs(np.fft.fft(samples)) ** 2
    total = power.sum()
    if total == 0.0:
        return False
    k = np.abs(_signed_frequencies(m))
    top = power[k >= 0.375 * m].sum()
    return bool(top > 0.01 * total)


def trace_derivative(
    g: BoundaryTrace, l: int, scheme: str = "spectral", h: Optional[float] = None
) -> BoundaryTrace:
    """l-th derivative of a trace, spectrally or by periodic central differences.

    ``h`` is the finite-difference step for ``central_fd``; it must be an
    integer multiple of the grid spacing (default: the grid spacing).
    """
    if l < 0:
        raise ValueError("derivative order must be nonnegative")
    m = g.size
    claim = max(g.smoothness_claim - l, 0) if g.smoothness_claim != UNBOUNDED else UNBOUNDED
    warn = g.spectral_warning or spectral_energy_warning(g.samples)
    if l == 0:
        return BoundaryTrace(g.samples, g.smoothness_claim, warn)
    if scheme == "spectral":
        k = _signed_frequencies(m)
        mult = (1j * k) ** l
        if l % 2 == 1:
            mult[m // 2] = 0.0
        out = np.fft.ifft(np.fft.fft(g.samples) * mult)
        return BoundaryTrace(out, claim, warn)
    if scheme == "central_fd":
        dx = TWO_PI / m
        h = dx if h is None else float(h)
        shift = round(h / dx)
        if shift < 1 or abs(shift * dx - h) > 1e-9 * dx:
            raise ValueError("finite-difference step must be a multiple of the grid spacing")
        y = np.array(g.samples)
        remaining = l
        while remaining >= 2:
            y = (np.roll(y, -shift) - 2.0 * y + np.roll(y, shift)) / h**2
            remaining -= 2
        if remaining:
            y = (np.roll(y, -shift) - np.roll(y, shift)) / (2.0 * h)
        return BoundaryTrace(y, claim, warn)
    raise ValueError(f"unknown differentiation scheme {scheme!r}")


@dataclass(frozen=True, eq=False)
class ArcTrace:
    """Data u on the closed parameter arc [a, b], b - a < 2 pi.

    ``samples`` lie on a uniform grid including both endpoints.
    ``endpoint_derivatives`` maps ``"a"`` / ``"b"`` to [u, u', u'', ...] at that
    endpoint.  When ``func`` is given it is used to evaluate u off the grid;
    otherwise a cubic spline through the samples is used (clamped with the
    endpoint slopes when those are known).
    """

    arc: tuple
    samples: np.ndarray
    endpoint_derivatives: Optional[dict] = None
    func: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        a, b = (float(x) for x in self.arc)
        if not b > a:
            raise ValueError("arc must satisfy a < b")
        if not b - a < TWO_PI:
            raise ValueError("arc length must be strictly less than 2 pi")
        object.__setattr__(self, "arc", (a, b))
        s = np.array(self.samples, dtype=np.complex128).ravel()
        if s.size < 2:
            raise ValueError("arc samples must include both endpoints")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.endpoint_derivatives is not None:
            ed = {}
            for key in ("a", "b"):
                if key not in self.endpoint_derivatives:
                    raise ValueError(f"endpoint data for {key!r} missing")
                ed[key] = tuple(complex(v) for v in self.endpoint_derivatives[key])
            object.__setattr__(self, "endpoint_derivatives", ed)

    @property
    def a(self) -> float:
        return self.arc[0]

    @property
    def b(self) -> float:
        return self.arc[1]

    @property
    def length(self) -> float:
        return self.arc[1] - self.arc[0]

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.samples.size)

    @property
    def derivative_order(self) -> int:
        """Highest order for which endpoint data is available at both ends (-1: none)."""
        if self.endpoint_derivatives is None:
            return -1
        return min(len(self.endpoint_derivatives["a"]), len(self.endpoint_derivatives["b"])) - 1

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(t), dtype=np.complex128)
        return self._spline()(t)

    def _spline(self):
        cached = self.__dict__.get("_spline_cache")
        if cached is not None:
            return cached
        x = self.grid
        bc: object = "not-a-knot"
        if self.derivative_order >= 1:
            bc = ((1, self.endpoint_derivatives["a"][1]), (1, self.endpoint_derivatives["b"][1]))
        if x.size < 4 and bc == "not-a-knot":
            bc = "natural"
        re = CubicSpline(x, self.samples.real, bc_type=_real_bc(bc))
        im = CubicSpline(x, self.samples.imag, bc_type=_imag_bc(bc))

        def spline(t):
            return re(t) + 1j * im(t)

        object.__setattr__(self, "_spline_cache", spline)
        return spline

    @classmethod
    def from_function(
        cls,
        func: Callable,
        arc: tuple,
        n: int = 257,
        derivatives: Optional[Callable[[int, float], complex]] = None,
        order: int = -1,
    ) -> "ArcTrace":
        """Sample ``func`` on ``n`` uniform points; ``derivatives(k, t)`` feeds endpoint data."""
        a, b = (float(x) for x in arc)
        grid = np.linspace(a, b, n)
        ed = None
        if derivatives is not None and order >= 0:
            ed = {
                "a": [derivatives(k, a) for k in range(order + 1)],
                "b": [derivatives(k, b) for k in range(order + 1)],
            }
        return cls((a, b), func(grid), ed, func)

    def to_json(self) -> dict:
        out = {
            "arc": [self.a, self.b],
            "samples": [[float(v.real), float(v.imag)] for v in self.samples],
        }
        if self.endpoint_derivatives is not None:
            out["endpoint_derivatives"] = {
                key: [[float(v.real), float(v.imag)] for v in vals]
                for key, vals in self.endpoint_derivatives.items()
            }
        return out

    @classmethod
    def from_json(cls, spec: dict) -> "ArcTrace":
        unknown = set(spec) - {"arc", "samples", "endpoint_derivatives"}
        if unknown:
            raise ValueError(f"unknown keys in arc spec: {sorted(unknown)}")

        def cplx(v):
            return complex(*v) if isinstance(v, (list, tuple)) else complex(v)

        ed = spec.get("endpoint_derivatives")
        if ed is not None:
            ed = {key: [cplx(v) for v in vals] for key, vals in ed.items()}
        return cls(tuple(spec["arc"]), np.array([cplx(v) for v in spec["samples"]]), ed)


def _real_bc(bc):
    if isinstance(bc, str):
        return bc
    return tuple((o, complex(v).real) for o, v in bc)


def _imag_bc(bc):
    if isinstance(bc, str):
        return bc
    return tuple((o, complex(v).imag) for o, v in bc)


@dataclass(frozen=True)
class CircleGrid:
    """M uniform angles on the circle of radius r < 1."""

    radius: float
    size: int

    def __post_init__(self):
        if not 0.0 <= self.radius < 1.0:
            raise ValueError("grid radius must lie in [0, 1)")
        if self.size < 1:
            raise ValueError("grid size must be positive")

    @property
    def angles(self) -> np.ndarray:
        return TWO_PI * np.arange(self.size) / self.size

    @property
    def points(self) -> np.ndarray:
        return self.radius * np.exp(1j * self.angles)


def dumps(obj) -> str:
    """JSON with 17 significant digits (lossless float round-trip)."""
    return json.dumps(obj, indent=None, allow_nan=False)
