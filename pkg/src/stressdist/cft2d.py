"""Vacuum statistics of the time-smeared chiral stress tensor of a 2D CFT.

The smeared moments obey the Ward-identity recursion

    G_n[f] = (n-1) G_2[f] G_{n-2}[f] + d/dlam G_{n-1}[f_lam]

along the flow ``df_lam/dlam = f_lam * f_lam`` (see :func:`func.star`), and
the cumulant generating function is

    W[mu f] = integral_0^mu (mu - lam) G_2[f_lam] dlam.

For a Gaussian window the flow is a pure rescaling by
``A(lam) = pi tau^2 / (pi tau^2 - lam)``, which makes everything closed form.
Other windows are flowed numerically on a grid.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import quad, solve_ivp

from . import func
from .dist import MomentSequence, ShiftedGamma
from .errors import FlowPole, OutOfRadius
from .exact import PiMonomial, as_fraction, is_exact
from .func import GAUSSIAN, SamplingFunction

BLOWUP_FACTOR = 1e6
FLOW_POINTS = 512
PI = PiMonomial(1, 1)


@dataclass(frozen=True)
class CftParams:
    c: object = 1
    tau: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("central charge must be positive")
        if not self.tau > 0:
            raise ValueError("tau must be positive")


def gamma2(f: SamplingFunction, params: CftParams) -> float:
    """Second moment ``(c / 48 pi^2) integral_0^inf w^3 |f^(w)|^2 dw``."""
    c = float(params.c)
    if f.kind == GAUSSIAN:
        return c * f.weight**2 / (24 * math.pi**2 * f.tau**4)
    if f.is_grid:
        return c / (48 * math.pi**2) * _grid_spectral_moment(f)
    prof = func.frequency_profile(f)
    val, _ = quad(lambda w: w**3 * prof(w) ** 2, 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    return c / (48 * math.pi**2) * val


def _grid_spectral_moment(f: SamplingFunction, pad=func.DEFAULT_PAD) -> float:
    # trapezoid over the padded FFT bins; the integrand vanishes at both ends
    n = f.samples.size
    nfft = 1 << int(math.ceil(math.log2(pad * n)))
    F = np.fft.rfft(f.samples, nfft) * f.spacing
    k = 2 * math.pi * np.fft.rfftfreq(nfft, f.spacing)
    return float(np.sum(k**3 * np.abs(F) ** 2) * (k[1] - k[0]))


def flow_amplitude_gaussian(tau: float, lam: float) -> float:
    """``A(lam) = pi tau^2 / (pi tau^2 - lam)``, the Gaussian flow amplitude."""
    p = math.pi * tau**2
    if lam >= p:
        raise FlowPole(f"lambda = {lam} is at or beyond the pole pi tau^2 = {p}")
    return p / (p - lam)


@dataclass(frozen=True, eq=False)
class FlowState:
    lam: float
    f: SamplingFunction
    blown_up: bool = False


@dataclass(frozen=True, eq=False)
class FlowPath:
    """Accepted steps of a numeric flow plus its dense interpolant."""

    states: tuple
    blown_up: bool
    blowup_lambda: float | None
    template: SamplingFunction
    _sol: object = field(default=None, repr=False)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s.lam for s in self.states])

    @property
    def last(self) -> FlowState:
        return self.states[-1]

    def at(self, lam: float) -> SamplingFunction:
        lo, hi = sorted((self.states[0].lam, self.states[-1].lam))
        if not lo - 1e-15 <= lam <= hi + 1e-15:
            raise OutOfRadius(f"lambda = {lam} outside the integrated range [{lo}, {hi}]")
        if self._sol is None:
            return self.states[0].f
        return self.template.with_samples(self._sol(lam))


def flow_numeric(f: SamplingFunction, lambda_max: float, tol: float = 1e-10,
                 blowup_factor: float = BLOWUP_FACTOR, grid_points: int = FLOW_POINTS,
                 half_width: float = func.DEFAULT_HALF_WIDTH,
                 band_rel: float = 1e-13) -> FlowPath:
    """Integrate ``df/dlam = f * f`` on a grid from 0 to ``lambda_max``.

    Adaptive Runge-Kutta (Dormand-Prince 5(4)) with relative tolerance
    ``tol``; negative ``lambda_max`` runs the flow backwards. Blow-up is
    flagged once ``max|f|`` passes ``blowup_factor`` times its initial
    value, or when the step size collapses before ``lambda_max``.

    The state is band-limited to the wavenumbers where the initial spectrum
    exceeds ``band_rel`` of its peak (see :func:`func.star_samples`).
    """
    g = f if f.is_grid else f.to_grid(grid_points, half_width)
    y0 = np.array(g.samples, dtype=float)
    first = FlowState(0.0, g)
    if lambda_max == 0:
        return FlowPath((first,), False, None, g)
    peak0 = float(np.max(np.abs(y0)))
    h, origin = g.spacing, g.origin
    func._check_edges(y0)
    cutoff = func.spectral_cutoff(y0, h, band_rel)
    y0 = func.band_limit(y0, h, cutoff)

    def rhs(_lam, y):
        return func.star_samples(y, h, origin, cutoff=cutoff)

    def blowup(_lam, y):
        return float(np.max(np.abs(y))) - blowup_factor * peak0

    blowup.terminal = True
    blowup.direction = 1

    sol = solve_ivp(rhs, (0.0, lambda_max), y0, method="RK45", rtol=tol,
                    atol=tol * peak0, dense_output=True, events=blowup)
    blown = sol.status != 0 or (sol.t_events[0].size > 0)
    lam_end = float(sol.t[-1])
    if sol.t_events[0].size:
        lam_end = float(sol.t_events[0][0])
    states = tuple(FlowState(float(t), g.with_samples(sol.y[:, i]))
                   for i, t in enumerate(sol.t))
    if blown:
        states = states[:-1] + (FlowState(states[-1].lam, states[-1].f, True),)
    return FlowPath(states, blown, lam_end if blown else None, g, sol.sol)


def _gauss_legendre(fn, a, b, panels, order=12):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        total += half * np.dot(w, fn(mid + half * x))
    return total


def _w_integral(gamma2_at, mu, rtol=1e-8, max_panels=512):
    """``integral_0^mu (mu - lam) G_2(lam) dlam`` by composite Gauss-Legendre,
    doubling the panel count until successive values agree to ``rtol``."""
    if mu == 0:
        return 0.0

    def integrand(lams):
        return np.array([(mu - l) * gamma2_at(l) for l in lams])

    panels = 2
    prev = _gauss_legendre(integrand, 0.0, mu, panels)
    while panels < max_panels:
        panels *= 2
        cur = _gauss_legendre(integrand, 0.0, mu, panels)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    return cur


def gaussian_radius(f: SamplingFunction) -> float:
    return math.pi * f.tau**2 / f.weight


def _gaussian_cgf(f: SamplingFunction, params: CftParams, mu):
    # W[mu (a g)] = W[(a mu) g] for a Gaussian g of weight a
    p = math.pi * f.tau**2
    m = np.asarray(mu) * f.weight
    if np.isrealobj(m) and np.any(m >= p):
        raise OutOfRadius(f"mu must stay below the radius {gaussian_radius(f)}")
    m = m.astype(complex) if np.iscomplexobj(m) else m.astype(float)
    out = float(params.c) / 24 * (np.log(p / (p - m)) - m / p)
    return out if np.ndim(out) else out.item()


def cgf(f: SamplingFunction, params: CftParams, mu, tol: float = 1e-10):
    """Cumulant generating function ``W[mu f] = log <exp(mu T(f))>``.

    Closed form (complex ``mu`` allowed) for Gaussian windows; numeric flow
    plus quadrature for everything else.
    """
    if f.kind == GAUSSIAN:
        return _gaussian_cgf(f, params, mu)
    return cgf_curve(f, params, [mu], tol=tol).W_values[0]


@dataclass(frozen=True)
class CgfCurve:
    mu_values: tuple
    W_values: tuple
    radius: float

    def __post_init__(self):
        for m, w in zip(self.mu_values, self.W_values):
            if m == 0 and w != 0:
                raise ValueError("W(0) must vanish")

    def second_differences(self) -> np.ndarray:
        mu, w = np.asarray(self.mu_values), np.asarray(self.W_values)
        order = np.argsort(mu)
        mu, w = mu[order], w[order]
        slopes = np.diff(w) / np.diff(mu)
        return np.diff(slopes)

    def is_convex(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.second_differences() >= -tol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["mu", "W"])
        for m, w in zip(self.mu_values, self.W_values):
            wr.writerow([repr(float(m)), repr(float(w))])
        return buf.getvalue()

    def to_json(self) -> str:
        data = {"mu": [float(m) for m in self.mu_values],
                "W": [float(w) for w in self.W_values],
                "radius": self.radius if math.isfinite(self.radius) else None}
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CgfCurve":
        d = json.loads(text)
        radius = d["radius"] if d["radius"] is not None else math.inf
        return cls(tuple(d["mu"]), tuple(d["W"]), radius)


def cgf_curve(f: SamplingFunction, params: CftParams, mu_values, tol: float = 1e-10,
              probe_radius: float | None = None, **grid) -> CgfCurve:
    """Sample ``W`` on ``mu_values``; one forward and one backward flow at most.

    ``probe_radius`` extends the forward flow (for grid windows) so that a
    blow-up, if any, below that value is detected and reported as the radius.
    """
    mus = [float(m) for m in mu_values]
    if f.kind == GAUSSIAN:
        vals = [_gaussian_cgf(f, params, m) for m in mus]
        return CgfCurve(tuple(mus), tuple(vals), gaussian_radius(f))

    hi = max([0.0] + mus + ([probe_radius] if probe_radius else []))
    lo = min([0.0] + mus)
    fwd = flow_numeric(f, hi, tol, **grid) if hi > 0 else None
    bwd = flow_numeric(f, lo, tol, **grid) if lo < 0 else None
    radius = fwd.blowup_lambda if fwd is not None and fwd.blown_up else math.inf

    vals = []
    for m in mus:
        if m >= radius:
            raise OutOfRadius(f"mu = {m} is beyond the detected flow blow-up at {radius}")
        path = fwd if m > 0 else bwd
        if m == 0:
            vals.append(0.0)
            continue
        vals.append(_w_integral(lambda l: gamma2(path.at(l), params), m))
    return CgfCurve(tuple(mus), tuple(vals), radius)


def moments_recursion_gaussian(params: CftParams, n_max: int) -> MomentSequence:
    """Exact normalized moments ``gamma_n = (pi tau^2)^n G_n`` of a Gaussian smearing.

    ``gamma_0 = 1``, ``gamma_1 = 0``,
    ``gamma_n = (n-1) (c/24) gamma_{n-2} + (n-1) gamma_{n-1}``.
    The values do not depend on tau. Exact when ``c`` is rational.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    c = Fraction(params.c) if is_exact(params.c) else float(params.c)
    g2 = c / 24
    gam = [Fraction(1) if is_exact(c) else 1.0, 0 * g2]
    for n in range(2, n_max + 1):
        gam.append((n - 1) * g2 * gam[n - 2] + (n - 1) * gam[n - 1])
    return MomentSequence(tuple(gam[: n_max + 1]), "scaled", PI, "cft2d-recursion")


def chiral_distribution(params: CftParams, exact: bool = False) -> ShiftedGamma:
    """Law of the Gaussian-smeared chiral stress tensor.

    ``alpha = c/24``, ``beta = pi tau^2``, ``omega0 = c / (24 pi tau^2)``.
    With ``exact=True`` the law of ``pi tau^2 T`` is returned with exact
    rational parameters (``beta = 1``, ``omega0 = alpha``).
    """
    if exact:
        a = as_fraction(params.c) / 24
        return ShiftedGamma(a, Fraction(1), a, "pi tau^2 T", PI)
    c, t = float(params.c), params.tau
    return ShiftedGamma(c / 24, math.pi * t**2, c / (24 * math.pi * t**2), "length^-2")


def energy_density_distribution(params: CftParams, exact: bool = False) -> ShiftedGamma:
    """Law of ``x = rho tau^2`` for the Gaussian-averaged energy density.

    Both chiral halves contribute independently, doubling ``alpha`` and the
    shift: ``alpha = c/12``, ``beta = pi``, ``x0 = c / (12 pi)``.
    """
    if exact:
        a = as_fraction(params.c) / 12
        return ShiftedGamma(a, Fraction(1), a, "pi x", PI)
    c = float(params.c)
    return ShiftedGamma(c / 12, math.pi, c / (12 * math.pi), "x = rho tau^2")
