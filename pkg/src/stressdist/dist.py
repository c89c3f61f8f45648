"""Shifted Gamma distribution engine.

A shifted Gamma with shape ``alpha``, rate ``beta`` and shift ``omega0`` has
density

    P(x) = theta(x + omega0) beta^alpha (x + omega0)^(alpha-1)
           exp(-beta (x + omega0)) / Gamma(alpha)

on ``[-omega0, inf)``. Parameters may be exact (``int``/``Fraction``) or
floats; exact parameters flow exactly through moments, fitting and fit
verification, and are converted to floats only where a special function is
needed.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .errors import DegenerateMoments, NotGammaLike, OutOfRadius, TailTruncation
from .exact import ONE, PiMonomial, decimal_str, fraction_str, is_exact
from .specfun import gammainc_lower


@dataclass(frozen=True)
class ShiftedGamma:
    """Shifted Gamma law of a variable ``X``.

    ``scale`` records how ``X`` relates to the physical observable ``Y``
    (in tau = 1 units): ``X = scale * Y``. It is ``ONE`` when ``X`` is the
    observable itself.
    """

    alpha: object
    beta: object
    omega0: object
    units: str = ""
    scale: PiMonomial = ONE

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in (self.alpha, self.beta, self.omega0))

    @property
    def lower_endpoint(self):
        return -self.omega0

    def mean(self):
        return self.alpha / self.beta - self.omega0

    def cgf(self, mu):
        """Cumulant generating function ``log E[exp(mu X)]``; complex ``mu`` allowed."""
        a, b, w0 = float(self.alpha), float(self.beta), float(self.omega0)
        if np.isrealobj(mu) and np.any(np.asarray(mu) >= b):
            raise OutOfRadius(f"mgf diverges for mu >= beta = {b}")
        mu = np.asarray(mu, dtype=complex)
        out = -mu * w0 - a * np.log(1.0 - mu / b)
        return out if out.ndim else complex(out)

    def mgf(self, mu):
        return np.exp(self.cgf(mu))

    def rescaled(self, s) -> "ShiftedGamma":
        """Law of ``s * X`` for a positive number ``s``."""
        scale = self.scale * s if is_exact(s) else ONE
        return ShiftedGamma(self.alpha, self.beta / s, self.omega0 * s, self.units, scale)

    def physical(self) -> "ShiftedGamma":
        """Float law of the observable ``Y = X / scale``."""
        s = float(self.scale)
        return ShiftedGamma(float(self.alpha), float(self.beta) * s, float(self.omega0) / s,
                            self.units)

    def physical_params(self) -> dict:
        """Parameters of the observable ``Y = X / scale`` as exact ``PiMonomial``s."""
        if not self.exact:
            raise ValueError("physical_params needs exact parameters")
        return {
            "alpha": PiMonomial(self.alpha),
            "beta": PiMonomial(self.beta) * self.scale,
            "omega0": PiMonomial(self.omega0) / self.scale,
        }

    def to_dict(self) -> dict:
        def render(v):
            return fraction_str(v) if is_exact(v) else float(v)

        out = {
            "alpha": render(self.alpha),
            "beta": render(self.beta),
            "omega0": render(self.omega0),
            "units": self.units,
        }
        if self.scale != ONE:
            out["scale"] = str(self.scale)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ShiftedGamma":
        def parse(v):
            return Fraction(v) if isinstance(v, str) else float(v)

        scale = PiMonomial.parse(data["scale"]) if "scale" in data else ONE
        return cls(parse(data["alpha"]), parse(data["beta"]), parse(data["omega0"]),
                   data.get("units", ""), scale)


def pdf(d: ShiftedGamma, x):
    """Density; ``+inf`` at the lower endpoint when ``alpha < 1``."""
    a, b, w0 = float(d.alpha), float(d.beta), float(d.omega0)
    xa = np.asarray(x, dtype=float)
    y = xa + w0
    out = np.zeros_like(y)
    pos = y > 0
    logp = a * math.log(b) - math.lgamma(a)
    with np.errstate(divide="ignore"):
        out[pos] = np.exp(logp + (a - 1.0) * np.log(y[pos]) - b * y[pos])
    at_edge = y == 0
    if a < 1:
        out[at_edge] = np.inf
    elif a == 1:
        out[at_edge] = b
    return out if out.ndim else float(out)


def cdf(d: ShiftedGamma, x):
    """Distribution function: the regularized lower incomplete gamma."""
    a, b, w0 = float(d.alpha), float(d.beta), float(d.omega0)
    if np.ndim(x) == 0:
        return gammainc_lower(a, b * (float(x) + w0))
    xa = np.asarray(x, dtype=float)
    return np.array([gammainc_lower(a, b * (xi + w0)) for xi in xa.ravel()]).reshape(xa.shape)


def prob_negative(d: ShiftedGamma) -> float:
    """Probability of a negative outcome, ``P(alpha, beta * omega0)``."""
    return gammainc_lower(float(d.alpha), float(d.beta) * float(d.omega0))


def quantile(d: ShiftedGamma, p: float) -> float:
    """Inverse of :func:`cdf` by bisection on ``log(x + omega0)``."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    a, b, w0 = float(d.alpha), float(d.beta), float(d.omega0)
    lo, hi = -750.0, 0.0
    while gammainc_lower(a, b * math.exp(hi)) < p:
        hi += 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gammainc_lower(a, b * math.exp(mid)) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return math.exp(0.5 * (lo + hi)) - w0


def cumulants(d: ShiftedGamma, n_max: int) -> list:
    """``kappa_1 = alpha/beta - omega0``, ``kappa_n = alpha (n-1)! / beta^n``."""
    out = [0]
    if n_max >= 1:
        out.append(d.alpha / d.beta - d.omega0)
    for n in range(2, n_max + 1):
        out.append(d.alpha * math.factorial(n - 1) / d.beta**n)
    if d.exact:
        out = [Fraction(v) for v in out]
    return out


def moments_from_cumulant_list(kappas: list) -> list:
    """Raw moments via ``m_n = sum_j C(n-1, j-1) kappa_j m_{n-j}``."""
    m = [Fraction(1) if all(is_exact(k) for k in kappas) else 1.0]
    for n in range(1, len(kappas)):
        m.append(sum(comb(n - 1, j - 1) * kappas[j] * m[n - j] for j in range(1, n + 1)))
    return m


def cumulants_from_moment_list(m: list) -> list:
    """Inverse of :func:`moments_from_cumulant_list`."""
    k = [0 * m[0]]
    for n in range(1, len(m)):
        k.append(m[n] - sum(comb(n - 1, j - 1) * k[j] * m[n - j] for j in range(1, n)))
    return k


@dataclass(frozen=True)
class MomentSequence:
    """Moments ``values[n]`` for ``n = 0..max_order``.

    ``normalization`` is ``"raw"`` for the moments of the observable itself or
    ``"scaled"`` when ``values[n] = scale**n * raw_n``.
    """

    values: tuple
    normalization: str = "raw"
    scale: PiMonomial = ONE
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values or self.values[0] != 1:
            raise ValueError("zeroth moment must equal 1")
        if self.normalization not in ("raw", "scaled"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def max_order(self) -> int:
        return len(self.values) - 1

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.values)

    @property
    def tags(self) -> list:
        return ["exact" if is_exact(v) else "float" for v in self.values]

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def cumulants(self) -> list:
        return cumulants_from_moment_list(list(self.values))

    def to_dict(self) -> dict:
        return {
            "normalization": self.normalization,
            "scale": str(self.scale),
            "provenance": self.provenance,
            "moments": [
                {"n": n, "value": fraction_str(v) if is_exact(v) else float(v), "tag": t}
                for n, (v, t) in enumerate(zip(self.values, self.tags))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "MomentSequence":
        vals = [Fraction(e["value"]) if e["tag"] == "exact" else float(e["value"])
                for e in sorted(data["moments"], key=lambda e: e["n"])]
        return cls(tuple(vals), data["normalization"], PiMonomial.parse(data["scale"]),
                   data.get("provenance", ""))


def moments(d: ShiftedGamma, n_max: int) -> MomentSequence:
    """Moments of ``d`` (exact when the parameters are)."""
    vals = moments_from_cumulant_list(cumulants(d, n_max))
    norm = "raw" if d.scale == ONE else "scaled"
    return MomentSequence(tuple(vals), norm, d.scale, "shifted-gamma")


def fit_from_moments(m: MomentSequence) -> ShiftedGamma:
    """Match the first three cumulants.

    ``beta = 2 k2 / k3``, ``alpha = k2 beta^2``, ``omega0 = alpha/beta - k1``.
    """
    if m.max_order < 3:
        raise ValueError("need moments through order 3")
    _, k1, k2, k3 = cumulants_from_moment_list(list(m.values[:4]))
    if k2 <= 0:
        raise DegenerateMoments(f"second cumulant {k2} is not positive")
    if k3 <= 0:
        raise NotGammaLike(f"third cumulant {k3} is not positive")
    beta = 2 * k2 / k3
    alpha = k2 * beta**2
    omega0 = alpha / beta - k1
    return ShiftedGamma(alpha, beta, omega0, m.provenance, m.scale)


@dataclass(frozen=True)
class FitReport:
    orders: tuple
    observed: tuple
    fitted: tuple
    residuals: tuple
    exact_match: bool

    def to_dict(self) -> dict:
        def render(v):
            return fraction_str(v) if is_exact(v) else decimal_str(v)

        return {
            "exact_match": self.exact_match,
            "rows": [
                {"n": n, "observed": render(o), "fitted": render(f), "residual": render(r)}
                for n, o, f, r in zip(self.orders, self.observed, self.fitted, self.residuals)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def verify_fit(d: ShiftedGamma, m: MomentSequence) -> FitReport:
    """Residuals ``observed_n - fitted_n`` for every order of ``m``."""
    if d.scale != m.scale:
        raise ValueError("distribution and moments describe differently scaled variables")
    fitted = moments(d, m.max_order).values
    res = tuple(o - f for o, f in zip(m.values, fitted))
    exact = m.exact and d.exact and all(r == 0 for r in res)
    return FitReport(tuple(range(m.max_order + 1)), m.values, fitted, res, exact)


@dataclass(frozen=True)
class HamburgerResult:
    success: bool
    C: float | None
    D: float | None
    tail_slope: float = 0.0
    orders_used: tuple = field(default_factory=tuple)


def _log_abs(v) -> float:
    if isinstance(v, Fraction):
        return math.log(abs(v.numerator)) - math.log(v.denominator)
    return math.log(abs(v))


def hamburger_check(m: MomentSequence, slope_limit: float = 0.1) -> HamburgerResult:
    """Look for ``|m_n| <= C D^n n!`` over the available orders.

    Fits ``log|m_n| - log n!`` linearly in ``n``; the sequence is rejected
    as super-factorial if the residuals over the last third of the orders
    still climb faster than ``slope_limit`` per order.
    """
    if m.max_order < 5:
        raise ValueError("need at least six orders")
    ns = [n for n in range(1, m.max_order + 1) if m.values[n] != 0]
    y = np.array([_log_abs(m.values[n]) - math.lgamma(n + 1) for n in ns])
    x = np.array(ns, dtype=float)
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    tail = max(3, len(ns) // 3)
    tail_slope = float(np.polyfit(x[-tail:], resid[-tail:], 1)[0])
    if tail_slope > slope_limit:
        return HamburgerResult(False, None, None, tail_slope, tuple(ns))
    D = math.exp(b)
    logC = max(_log_abs(m.values[n]) - math.lgamma(n + 1) - n * b for n in ns)
    C = max(1.0, math.exp(logC))
    return HamburgerResult(True, C, D, tail_slope, tuple(ns))


def _gamma_marsaglia_tsang(rng, a, n):
    # shape a >= 1, unit rate
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(0)
    while out.size < n:
        k = int((n - out.size) * 1.1) + 16
        x = rng.standard_normal(k)
        v = (1.0 + c * x) ** 3
        u = rng.random(k)
        ok = v > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            accept = ok & (
                (u < 1.0 - 0.0331 * x**4)
                | (np.log(u) < 0.5 * x**2 + d * (1.0 - v + np.log(np.where(ok, v, 1.0))))
            )
        out = np.concatenate([out, d * v[accept]])
    return out[:n]


def _gamma_ahrens_dieter(rng, a, n):
    # Ahrens-Dieter GS rejection for shape 0 < a < 1, unit rate
    b = (math.e + a) / math.e
    out = np.empty(0)
    while out.size < n:
        k = int((n - out.size) * 1.5) + 16
        p = b * rng.random(k)
        u2 = rng.random(k)
        low = p <= 1.0
        x = np.empty(k)
        # x = p^(1/a) in log space so tiny p underflows cleanly to 0
        with np.errstate(divide="ignore"):
            x[low] = np.exp(np.log(p[low]) / a)
            x[~low] = -np.log((b - p[~low]) / a)
            accept = np.where(low, u2 <= np.exp(-x), np.log(u2) <= (a - 1.0) * np.log(x))
        out = np.concatenate([out, x[accept]])
    return out[:n]


def gamma_variates(alpha: float, n: int, seed: int) -> np.ndarray:
    """``n`` unit-rate Gamma(alpha) draws, deterministic for fixed ``seed``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    a = float(alpha)
    return _gamma_marsaglia_tsang(rng, a, n) if a >= 1 else _gamma_ahrens_dieter(rng, a, n)


def sample(d: ShiftedGamma, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. draws of ``d``.

    For small ``alpha`` a visible fraction of draws lies within one ulp of
    the endpoint and is rounded onto it; use :func:`gamma_variates` when the
    distance from the endpoint matters.
    """
    return gamma_variates(d.alpha, n, seed) / float(d.beta) - float(d.omega0)


def _characteristic(cgf, s):
    fn = cgf.cgf if hasattr(cgf, "cgf") else cgf
    return np.exp(fn(1j * np.asarray(s, dtype=float)))


def _frequency_grid(cgf, x_grid, h, s_max, threshold):
    x_grid = np.asarray(x_grid, dtype=float)
    if h is None:
        h = math.pi / (4.0 * max(np.max(np.abs(x_grid)), 1e-12))
    if s_max is None:
        s_max = h * 2_000_000
    s = np.arange(0.0, s_max + h / 2, h)
    phi = _characteristic(cgf, s)
    above = np.nonzero(np.abs(phi) >= threshold)[0]
    last = above[-1] + 1 if above.size else 1
    if last >= s.size:
        warnings.warn(
            f"|M(is)| = {abs(phi[-1]):.3g} at cutoff s = {s[-1]:.3g} exceeds {threshold:g}",
            TailTruncation, stacklevel=3,
        )
    return x_grid, s[:last], phi[:last], h


def invert_mgf(cgf, x_grid, *, h=None, s_max=None, threshold=1e-12, chunk=2_000_000):
    """Density on ``x_grid`` from ``M(is) = exp(W(is))`` by the trapezoid rule.

    ``cgf`` is a callable accepting complex arguments, or any object with a
    ``cgf`` method. The frequency sum stops once ``|M(is)| < threshold``;
    a :class:`TailTruncation` warning is issued if ``s_max`` is reached first.
    """
    x_grid, s, phi, h = _frequency_grid(cgf, x_grid, h, s_max, threshold)
    w = np.full(s.size, h)
    w[0] = h / 2
    out = np.zeros(x_grid.size)
    step = max(1, chunk // max(s.size, 1))
    for i in range(0, x_grid.size, step):
        xs = x_grid[i:i + step]
        out[i:i + step] = (np.exp(-1j * np.outer(xs, s)) @ (w * phi)).real / math.pi
    return out


def invert_cdf(cgf, x_grid, *, h=None, s_max=None, threshold=1e-12, chunk=2_000_000):
    """Distribution function by the Gil-Pelaez formula (midpoint rule in ``s``)."""
    x_grid = np.asarray(x_grid, dtype=float)
    if h is None:
        h = math.pi / (4.0 * max(np.max(np.abs(x_grid)), 1e-12))
    _, s, _, _ = _frequency_grid(cgf, x_grid, h, s_max, threshold)
    s = s + h / 2
    phi = _characteristic(cgf, s)
    out = np.zeros(x_grid.size)
    step = max(1, chunk // max(s.size, 1))
    for i in range(0, x_grid.size, step):
        xs = x_grid[i:i + step]
        integrand = (np.exp(-1j * np.outer(xs, s)) * phi).imag / s
        out[i:i + step] = 0.5 - h * integrand.sum(axis=1) / math.pi
    return out


def gaussian_cgf(variance: float):
    """CGF of a centred normal law, handy for inversion self-checks."""
    return lambda mu: 0.5 * variance * np.asarray(mu) ** 2

