"""Sampling (test) functions and their transforms.

Conventions used throughout:

* Fourier transform ``f^(w) = integral f(u) exp(i w u) du``.
* Hilbert transform ``(H g)(u) = (1/pi) p.v. integral g(w) / (w - u) dw``.
  This orientation makes ``star(gaussian)`` come out as a positive multiple
  of the Gaussian.
* ``star(f)(u) = integral [f(w) f'(u) - f'(w) f(u)] / (2 pi (w - u)) dw
  = (f' H f - f H f') / 2``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import EdgeLeak, GridTooCoarse, NegativeWindow

GAUSSIAN = "gaussian"
LORENTZIAN = "lorentzian"
SQUARED_LORENTZIAN = "squared_lorentzian"
GRID = "grid"
ANALYTIC_KINDS = (GAUSSIAN, LORENTZIAN, SQUARED_LORENTZIAN)

DEFAULT_POINTS = 4096
DEFAULT_HALF_WIDTH = 16.0  # in units of tau
DEFAULT_PAD = 16
EDGE_DECAY = 1e-10
INVOLUTION_TOL = 1e-6

# integral (d sqrt(f)/du)^2 du for the unit-width windows
_QI_INTEGRALS = {
    GAUSSIAN: Fraction(1, 2),
    LORENTZIAN: Fraction(1, 8),
    SQUARED_LORENTZIAN: Fraction(1, 2),
}


@dataclass(frozen=True, eq=False)
class SamplingFunction:
    """A real window ``weight * shape(u / tau) / tau`` or a sampled grid.

    Analytic windows are normalized to integrate to ``weight`` (1 for a
    sampling function; other values arise along the flow). Grid windows
    hold ``samples`` at ``origin + spacing * j``.
    """

    kind: str
    tau: float = 1.0
    weight: float = 1.0
    samples: np.ndarray | None = None
    spacing: float | None = None
    origin: float | None = None

    def __post_init__(self):
        if self.kind not in ANALYTIC_KINDS + (GRID,):
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.kind == GRID:
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 1 or s.size < 4:
                raise ValueError("grid samples must be a 1-d array of length >= 4")
            if not np.all(np.isfinite(s)):
                raise ValueError("grid samples must be finite")
            if not self.spacing or self.spacing <= 0:
                raise ValueError("grid spacing must be positive")
            s.setflags(write=False)
            object.__setattr__(self, "samples", s)
            object.__setattr__(self, "origin", float(self.origin))
            object.__setattr__(self, "spacing", float(self.spacing))

    # constructors -------------------------------------------------------

    @classmethod
    def gaussian(cls, tau=1.0):
        return cls(GAUSSIAN, tau)

    @classmethod
    def lorentzian(cls, tau=1.0):
        return cls(LORENTZIAN, tau)

    @classmethod
    def squared_lorentzian(cls, tau=1.0):
        return cls(SQUARED_LORENTZIAN, tau)

    @classmethod
    def from_samples(cls, samples, spacing, origin, tau=1.0, normalize=True):
        """Grid window; renormalized so the trapezoid sum is exactly 1."""
        s = np.asarray(samples, dtype=float)
        if normalize:
            total = _trapezoid(s, spacing)
            if total == 0:
                raise ValueError("cannot normalize a window with zero integral")
            s = s / total
        return cls(GRID, tau, 1.0, s, spacing, origin)

    # grid helpers -------------------------------------------------------

    @property
    def is_grid(self) -> bool:
        return self.kind == GRID

    def points(self) -> np.ndarray:
        if not self.is_grid:
            raise ValueError("analytic windows have no grid")
        return self.origin + self.spacing * np.arange(self.samples.size)

    def to_grid(self, n=DEFAULT_POINTS, half_width=DEFAULT_HALF_WIDTH) -> "SamplingFunction":
        """Sample on ``n`` points spanning ``[-half_width*tau, half_width*tau]``."""
        if self.is_grid:
            return self
        u = np.linspace(-half_width * self.tau, half_width * self.tau, n)
        spacing = 2 * half_width * self.tau / (n - 1)
        return SamplingFunction(GRID, self.tau, 1.0, evaluate(self, u), spacing, u[0])

    def with_samples(self, samples) -> "SamplingFunction":
        return SamplingFunction(GRID, self.tau, 1.0, samples, self.spacing, self.origin)

    def integral(self) -> float:
        if self.is_grid:
            return _trapezoid(self.samples, self.spacing)
        return self.weight

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        if not self.is_grid:
            return {"kind": self.kind, "tau": self.tau, "weight": self.weight}
        return {
            "kind": self.kind,
            "tau": self.tau,
            "origin": self.origin,
            "spacing": self.spacing,
            "samples": [float(v) for v in self.samples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "SamplingFunction":
        if data["kind"] != GRID:
            return cls(data["kind"], data["tau"], data.get("weight", 1.0))
        return cls(GRID, data["tau"], 1.0, np.array(data["samples"]), data["spacing"],
                   data["origin"])

    @classmethod
    def from_json(cls, text: str) -> "SamplingFunction":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["u", "f"])
        for u, v in zip(self.points(), self.samples):
            w.writerow([repr(float(u)), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, tau=1.0, normalize=False) -> "SamplingFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        spacing = float(np.mean(np.diff(data[:, 0])))
        if not np.allclose(np.diff(data[:, 0]), spacing, rtol=1e-9, atol=0):
            raise ValueError("CSV abscissae are not uniformly spaced")
        return cls.from_samples(data[:, 1], spacing, data[0, 0], tau, normalize)


def _trapezoid(samples, spacing) -> float:
    s = np.asarray(samples)
    return float(spacing * (s.sum() - 0.5 * (s[0] + s[-1])))


def evaluate(f: SamplingFunction, u):
    """Window value ``f(u)``; grids use a cubic spline and vanish outside."""
    u = np.asarray(u, dtype=float)
    t = f.tau
    if f.kind == GAUSSIAN:
        out = np.exp(-(u / t) ** 2) / (t * math.sqrt(math.pi))
    elif f.kind == LORENTZIAN:
        out = t / (math.pi * (u**2 + t**2))
    elif f.kind == SQUARED_LORENTZIAN:
        out = 2 * t**3 / (math.pi * (u**2 + t**2) ** 2)
    else:
        x = f.points()
        spline = CubicSpline(x, f.samples)
        inside = (u >= x[0]) & (u <= x[-1])
        out = np.where(inside, spline(np.clip(u, x[0], x[-1])), 0.0)
        return out if out.ndim else float(out)
    out = f.weight * out
    return out if out.ndim else float(out)


def derivative(f: SamplingFunction, u):
    """``f'(u)`` for analytic windows."""
    u = np.asarray(u, dtype=float)
    t = f.tau
    if f.kind == GAUSSIAN:
        out = -2 * u / t**3 * np.exp(-(u / t) ** 2) / math.sqrt(math.pi)
    elif f.kind == LORENTZIAN:
        out = -2 * t * u / (math.pi * (u**2 + t**2) ** 2)
    elif f.kind == SQUARED_LORENTZIAN:
        out = -8 * t**3 * u / (math.pi * (u**2 + t**2) ** 3)
    else:
        raise ValueError("use the spectral grid derivative for grid windows")
    out = f.weight * out
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class FrequencyProfile:
    """Fourier transform of a window, normalized to ``weight`` at zero."""

    kind: str
    tau: float
    weight: float = 1.0
    omegas: np.ndarray | None = None
    values: np.ndarray | None = None

    def __call__(self, omega):
        w = np.abs(np.asarray(omega, dtype=float))
        t = self.tau
        if self.kind == GAUSSIAN:
            out = np.exp(-(w * t) ** 2 / 4)
        elif self.kind == LORENTZIAN:
            out = np.exp(-w * t)
        elif self.kind == SQUARED_LORENTZIAN:
            out = (1 + w * t) * np.exp(-w * t)
        else:
            out = np.interp(w, self.omegas, self.values, right=0.0)
            return out if out.ndim else float(out)
        out = self.weight * out
        return out if out.ndim else float(out)


def _grid_transform(f: SamplingFunction, omega) -> np.ndarray:
    # trapezoid rule for integral f(u) exp(i w u) du (edges are negligible)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    u = f.points()
    w = np.full(u.size, f.spacing)
    w[0] = w[-1] = f.spacing / 2
    out = np.empty(omega.size, dtype=complex)
    step = max(1, 4_000_000 // u.size)
    for i in range(0, omega.size, step):
        out[i:i + step] = np.exp(1j * np.outer(omega[i:i + step], u)) @ (w * f.samples)
    return out


def frequency_profile(f: SamplingFunction, n_omega=2049) -> FrequencyProfile:
    """Closed form for analytic windows; symmetrized sampled transform for grids."""
    if not f.is_grid:
        return FrequencyProfile(f.kind, f.tau, f.weight)
    omegas = np.linspace(0.0, math.pi / f.spacing, n_omega)
    return FrequencyProfile(GRID, f.tau, f.integral(), omegas, _grid_transform(f, omegas).real)


def fourier(f: SamplingFunction, omega):
    """``f^(omega)``; for grids the real (even-part) transform."""
    if not f.is_grid:
        return frequency_profile(f)(omega)
    out = _grid_transform(f, omega).real
    return out if np.ndim(omega) else float(out[0])


def fourier_complex(f: SamplingFunction, omega) -> np.ndarray:
    """Full complex transform of a grid window."""
    if not f.is_grid:
        return np.asarray(fourier(f, omega), dtype=complex)
    return _grid_transform(f, omega)


# spectral machinery on grids ----------------------------------------------


def _check_edges(samples):
    peak = np.max(np.abs(samples))
    edge = max(abs(samples[0]), abs(samples[-1]))
    if peak == 0:
        return
    if edge > EDGE_DECAY * peak:
        raise EdgeLeak(
            f"grid edge value {edge:.3g} exceeds {EDGE_DECAY:g} of the peak {peak:.3g}; "
            "widen the grid"
        )


class _Spectrum:
    """Zero-padded real FFT of a grid function with the multipliers we need.

    Padding turns the 1/x Hilbert kernel into a cotangent on the padded
    period P. The difference is smooth, ``(1/x - (pi/P) cot(pi x/P)) / pi``,
    and its Taylor terms only see low moments of the input, so they are
    subtracted exactly (through x^5) after the FFT.
    """

    def __init__(self, samples, spacing, origin=0.0, pad=DEFAULT_PAD):
        self.n = samples.size
        nfft = 1 << int(math.ceil(math.log2(pad * self.n)))
        self.nfft = nfft
        self.period = nfft * spacing
        self.u = origin + spacing * np.arange(self.n)
        self.spacing = spacing
        self.samples = samples
        self.F = np.fft.rfft(samples, nfft)
        k = 2 * math.pi * np.fft.rfftfreq(nfft, spacing)
        sign = np.sign(k)
        ik = 1j * k
        if nfft % 2 == 0:
            sign[-1] = 0.0
            ik[-1] = 0.0
        # numpy's forward transform uses exp(-i k u); the Hilbert multiplier
        # for the kernel -1/(pi x) is then +i sign(k)
        self.hilbert_mult = 1j * sign
        self.deriv_mult = ik
        self.mean = samples.sum() / nfft

    def back(self, mult) -> np.ndarray:
        return np.fft.irfft(mult * self.F, self.nfft)[: self.n]

    def _kernel_correction(self, g) -> np.ndarray:
        P = self.period
        coeffs = {1: math.pi**2 / (3 * P**2), 3: math.pi**4 / (45 * P**4),
                  5: 2 * math.pi**6 / (945 * P**6)}
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = self.spacing / 2
        mom = [float(np.dot(w, g * self.u**i)) for i in range(6)]
        out = np.zeros(self.n)
        for j, c in coeffs.items():
            for i in range(j + 1):
                out += c * math.comb(j, i) * (-1) ** i * mom[i] * self.u ** (j - i)
        return out / math.pi

    def hilbert(self, deriv=False) -> np.ndarray:
        if deriv:
            g = self.back(self.deriv_mult)
            raw = self.back(self.hilbert_mult * self.deriv_mult)
        else:
            g = self.samples
            raw = self.back(self.hilbert_mult)
        return raw - self._kernel_correction(g)

    def involution_error(self) -> float:
        hh = self.back(self.hilbert_mult**2)
        g = self.samples
        lo, hi = self.n // 10, self.n - self.n // 10
        peak = np.max(np.abs(g))
        err = np.max(np.abs(hh[lo:hi] + g[lo:hi] - self.mean))
        return float(err / peak) if peak else 0.0


def hilbert(g: SamplingFunction, pad=DEFAULT_PAD) -> SamplingFunction:
    """Hilbert transform of a grid function by padded FFT convolution."""
    g = g.to_grid()
    _check_edges(g.samples)
    spec = _Spectrum(g.samples, g.spacing, g.origin, pad)
    return g.with_samples(spec.hilbert())


def involution_error(g: SamplingFunction, pad=DEFAULT_PAD) -> float:
    """Relative interior defect of ``H(H g) = -g`` (mean of the padded period removed)."""
    g = g.to_grid()
    return _Spectrum(g.samples, g.spacing, g.origin, pad).involution_error()


def grid_derivative(g: SamplingFunction, pad=DEFAULT_PAD) -> SamplingFunction:
    g = g.to_grid()
    _check_edges(g.samples)
    spec = _Spectrum(g.samples, g.spacing, g.origin, pad)
    return g.with_samples(spec.back(spec.deriv_mult))


def spectral_cutoff(samples, spacing, rel=1e-13, pad=DEFAULT_PAD) -> float:
    """Largest angular frequency where ``|f^|`` still exceeds ``rel`` of its peak."""
    nfft = 1 << int(math.ceil(math.log2(pad * samples.size)))
    mag = np.abs(np.fft.rfft(samples, nfft))
    k = 2 * math.pi * np.fft.rfftfreq(nfft, spacing)
    above = np.nonzero(mag > rel * mag.max())[0]
    return float(k[above[-1]]) if above.size else 0.0


def band_limit(samples, spacing, cutoff, pad=DEFAULT_PAD) -> np.ndarray:
    """Remove all content above angular frequency ``cutoff``."""
    n = samples.size
    nfft = 1 << int(math.ceil(math.log2(pad * n)))
    F = np.fft.rfft(samples, nfft)
    F[2 * math.pi * np.fft.rfftfreq(nfft, spacing) > cutoff] = 0.0
    return np.fft.irfft(F, nfft)[:n]


def star_samples(samples, spacing, origin, pad=DEFAULT_PAD, cutoff=None) -> np.ndarray:
    """``f * f`` on a grid, given raw samples. Used directly by the flow.

    With ``cutoff`` set, input and output are band-limited to that angular
    frequency. The flow amplifies a mode of wavenumber k at a rate of about
    ``f |k| / 2``, so unfiltered grid noise near Nyquist swamps the solution.
    """
    _check_edges(samples)
    if cutoff is not None:
        samples = band_limit(samples, spacing, cutoff, pad)
    spec = _Spectrum(samples, spacing, origin, pad)
    err = spec.involution_error()
    if err > INVOLUTION_TOL:
        raise GridTooCoarse(f"H(Hg) = -g violated by {err:.3g} (relative); refine the grid")
    hf = spec.hilbert()
    df = spec.back(spec.deriv_mult)
    hdf = spec.hilbert(deriv=True)
    out = 0.5 * (df * hf - samples * hdf)
    if cutoff is not None:
        out = band_limit(out, spacing, cutoff, pad)
    return out


def star(f: SamplingFunction, pad=DEFAULT_PAD) -> SamplingFunction:
    """The quadratic map ``f -> f * f`` that drives the flow.

    A Gaussian maps to itself scaled by ``weight / (pi tau^2)``; every other
    window is sampled on the default grid and transformed spectrally.
    """
    if f.kind == GAUSSIAN:
        return SamplingFunction(GAUSSIAN, f.tau, f.weight**2 / (math.pi * f.tau**2))
    g = f.to_grid()
    return g.with_samples(star_samples(g.samples, g.spacing, g.origin, pad))


def qi_integral_exact(kind: str) -> Fraction:
    """``tau^2 * integral (d sqrt(f)/du)^2 du`` for a normalized analytic window."""
    return _QI_INTEGRALS[kind]


def qi_functional(f: SamplingFunction, coeff: float, method: str = "auto") -> float:
    """``-coeff * integral (d sqrt(f)/du)^2 du``.

    ``method="quad"`` forces adaptive quadrature of ``f'^2 / (4 f)`` for
    analytic windows; grids always use the spectral derivative of ``sqrt(f)``.
    """
    if f.is_grid:
        if np.min(f.samples) < -1e-14:
            raise NegativeWindow(f"window reaches {np.min(f.samples):.3g}")
        root = np.sqrt(np.clip(f.samples, 0.0, None))
        d = grid_derivative(f.with_samples(root)).samples
        return -coeff * _trapezoid(d**2, f.spacing)
    if method == "auto":
        return -coeff * f.weight * float(_QI_INTEGRALS[f.kind]) / f.tau**2
    from scipy.integrate import quad

    def integrand(u):
        v = evaluate(f, u)
        if v < 1e-300:
            return 0.0
        return derivative(f, u) ** 2 / (4 * v)

    val, _ = quad(integrand, -np.inf, np.inf, epsabs=0, epsrel=1e-12, limit=500)
    return -coeff * val
