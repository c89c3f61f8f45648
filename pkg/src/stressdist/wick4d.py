"""Exact vacuum moments of the time-smeared Wick square of a 4D massless scalar.

The smeared observable is ``X = integral :phi^2:(t, 0) w(t) dt`` with the
Lorentzian or squared-Lorentzian window (or the same for ``:(d_t phi)^2:``).
Connected correlators are single cycles of two-point functions

    D(s) = (1 / 4 pi^2) integral_0^inf w^p exp(-i w s) dw,   p = 1 or 3,

so the k-th cumulant is

    kappa_k = 2^(k-1) (k-1)! (4 pi^2)^(-k) C_k,

where ``C_k`` is the average, over the (k-1)! directed cyclic orderings of
the k insertions, of a k-fold frequency integral. Every edge of a cycle
carries a frequency ``w_i > 0`` and every vertex the window spectrum
``W`` at its net frequency: ``W(w_a + w_b)`` when the vertex is a local
extremum of the cyclic label sequence, ``W(|w_a - w_b|)`` otherwise.

The integral factorizes across extremal vertices because ``W(x + y)`` is
a finite sum of products ``u(x) v(y)``. A cycle therefore splits into
monotone runs, each contributing a small matrix ``R(L)`` that depends only
on the run length, and its value is ``trace(R(L_1) ... R(L_m))``. The sum
over orderings is done by a transfer recursion over relative ranks, so the
cost is polynomial in k. :func:`cycle_integral_sectors` enumerates the
orderings one by one instead and serves as an independent check.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb, factorial

from . import func
from .dist import FitReport, MomentSequence, ShiftedGamma, fit_from_moments, verify_fit
from .errors import Intractable, MismatchAgainstGolden
from .exact import PiMonomial, as_fraction, decimal_str, fraction_str
from .exppoly import ExpPoly, separable_sum_kernel

DEFAULT_BUDGET = 9
TABLE1_BUDGET = 8
TABLE1 = (1, 0, 2, 48, 1740, 83904, 5051640, 364724928, 30707616912)
# M_n = (4 pi)^(2n) m_n in tau = 1 units
NORMALIZATION = PiMonomial(16, 2)

_SPECTRA = {
    func.LORENTZIAN: {(0, 1): 1},
    func.SQUARED_LORENTZIAN: {(0, 1): 1, (1, 1): 1},
}


@dataclass(frozen=True)
class WindowSpectrum:
    """Window spectrum and the frequency power of the propagator.

    ``tau`` must be rational; everything downstream assumes ``tau = 1``
    unless stated, and results for other widths follow by scaling.
    """

    kind: str = func.LORENTZIAN
    p: int = 1
    tau: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in _SPECTRA:
            raise ValueError(f"no exact spectrum for window {self.kind!r}")
        if self.p not in (1, 3):
            raise ValueError("weight power must be 1 (field) or 3 (time derivative)")
        object.__setattr__(self, "tau", as_fraction(self.tau))
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def profile(self) -> ExpPoly:
        t = self.tau
        return ExpPoly({(j, b * t): c * t**j for (j, b), c in _SPECTRA[self.kind].items()})


def _check_budget(k, budget):
    if k > budget:
        raise Intractable(f"cycle length {k} exceeds the budget {budget}")


# -- run matrices and the transfer recursion ---------------------------------

def _matmul(a, b):
    r = len(a)
    return tuple(tuple(sum(a[i][m] * b[m][j] for m in range(r)) for j in range(r))
                 for i in range(r))


def _matadd(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _identity(r):
    return tuple(tuple(Fraction(int(i == j)) for j in range(r)) for i in range(r))


def _zero(r):
    return tuple(tuple(Fraction(0) for _ in range(r)) for _ in range(r))


def _trace(a):
    return sum(a[i][i] for i in range(len(a)))


@lru_cache(maxsize=None)
def _run_matrices(w: WindowSpectrum, length: int) -> tuple:
    """``R[L]`` for ``L = 1..length``: a run of L edges between two extrema.

    ``R[L][a][b] = integral v_a(w_1) prod w_i^p prod W(|w_i - w_(i+1)|) u_b(w_L)``.
    """
    prof = w.profile
    pairs = separable_sum_kernel(prof)
    r = len(pairs)
    rows = []
    for _, v in pairs:
        chain = v.times_power(w.p)
        row = []
        for _L in range(length):
            row.append([(chain * u).integral() for u, _ in pairs])
            chain = chain.convolve_abs(prof).times_power(w.p)
        rows.append(row)
    return tuple(tuple(tuple(rows[a][L][b] for b in range(r)) for a in range(r))
                 for L in range(length))


def _ordering_sums(k_max: int, w: WindowSpectrum) -> list:
    """``S_k``, the sum over directed cyclic orderings, for ``k = 2..k_max``.

    A cycle is cut at its smallest label, which is always a valley. The
    remaining labels are inserted one at a time; the state records the
    relative rank of the last label, the direction and length of the open
    run, and the product of the closed runs' matrices.
    """
    R = _run_matrices(w, k_max)
    r = len(R[0])
    out = [Fraction(0), Fraction(0)]
    # state key (rank, up, run_length) -> matrix; first edge always rises
    layer = {(0, True, 1): _identity(r)}
    for i in range(1, k_max):
        total = Fraction(0)
        for (_, up, L), M in layer.items():
            if up:
                total += _trace(_matmul(_matmul(M, R[L - 1]), R[0]))
            else:
                total += _trace(_matmul(M, R[L]))
        out.append(total)
        if i == k_max - 1:
            break
        nxt = {}
        grouped = {}
        for (j, up, L), M in layer.items():
            grouped.setdefault((up, L), {})[j] = M
        for (up, L), by_rank in grouped.items():
            closed = {j: _matmul(M, R[L - 1]) for j, M in by_rank.items()}
            # new rank jn in 0..i; rise iff jn > j
            acc_open, acc_closed = _zero(r), _zero(r)
            for jn in range(i + 1):
                if jn - 1 in by_rank:
                    acc_open = _matadd(acc_open, by_rank[jn - 1])
                    acc_closed = _matadd(acc_closed, closed[jn - 1])
                rise_src = acc_open if up else acc_closed
                key = (jn, True, L + 1 if up else 1)
                if any(any(x for x in row) for row in rise_src):
                    nxt[key] = _matadd(nxt.get(key, _zero(r)), rise_src)
            acc_open, acc_closed = _zero(r), _zero(r)
            for jn in range(i, -1, -1):
                if jn in by_rank:
                    acc_open = _matadd(acc_open, by_rank[jn])
                    acc_closed = _matadd(acc_closed, closed[jn])
                fall_src = acc_closed if up else acc_open
                key = (jn, False, 1 if up else L + 1)
                if any(any(x for x in row) for row in fall_src):
                    nxt[key] = _matadd(nxt.get(key, _zero(r)), fall_src)
        layer = nxt
    return out


def cycle_integral(k: int, w: WindowSpectrum, budget: int = DEFAULT_BUDGET) -> Fraction:
    """``C_k``: the cycle integral averaged over directed cyclic orderings."""
    if k < 2:
        raise ValueError("cycles have at least two insertions")
    _check_budget(k, budget)
    return _ordering_sums(k, w)[k] / factorial(k - 1)


# -- independent route: one ordering at a time -------------------------------

def _pattern(seq) -> tuple:
    """Vertex kinds of a cycle 1, s_2, .., s_k: 'S' at extrema, 'D' elsewhere."""
    closed = list(seq) + [seq[0]]
    ups = [closed[i + 1] > closed[i] for i in range(len(seq))]
    return tuple("S" if ups[i - 1] != ups[i] else "D" for i in range(1, len(seq)))


def _sector_value(pattern, w: WindowSpectrum) -> Fraction:
    # iterate vertex by vertex, splitting only the vertex where the cycle is cut
    prof = w.profile
    pairs = separable_sum_kernel(prof)
    total = Fraction(0)
    for u0, v0 in pairs:
        f = v0.times_power(w.p)
        for kind in pattern:
            if kind == "S":
                f = sum((v * (f * u).integral() for u, v in pairs), ExpPoly())
            else:
                f = f.convolve_abs(prof)
            f = f.times_power(w.p)
        total += (f * u0).integral()
    return total


def cycle_integral_sectors(k: int, w: WindowSpectrum, budget: int = DEFAULT_BUDGET,
                           seed: int | None = None) -> Fraction:
    """``C_k`` by explicit enumeration of the ``(k-1)!`` cyclic orderings.

    ``seed`` shuffles the order in which the sectors are summed; the exact
    result cannot depend on it.
    """
    if k < 2:
        raise ValueError("cycles have at least two insertions")
    _check_budget(k, budget)
    counts = Counter(_pattern((1, *perm)) for perm in permutations(range(2, k + 1)))
    items = sorted(counts.items())
    if seed is not None:
        random.Random(seed).shuffle(items)
    total = Fraction(0)
    for pat, n in items:
        total += n * _sector_value(pat, w)
    return total / factorial(k - 1)


# -- cumulants and moments ---------------------------------------------------

def _normalized_cumulant(k, c_k):
    # (16 pi^2)^k kappa_k
    return 4**k * 2 ** (k - 1) * factorial(k - 1) * c_k


def cumulants(n_max: int, w: WindowSpectrum, budget: int = DEFAULT_BUDGET,
              normalized: bool = False) -> list:
    """Exact cumulants ``kappa_0..kappa_n_max`` (``kappa_0`` is a placeholder 0).

    Physical values (tau = 1) come back as :class:`PiMonomial`; with
    ``normalized=True`` the rationals ``(16 pi^2)^k kappa_k`` are returned.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    _check_budget(n_max, budget)
    sums = _ordering_sums(n_max, w)
    out = [Fraction(0), Fraction(0)]
    for k in range(2, n_max + 1):
        out.append(_normalized_cumulant(k, sums[k] / factorial(k - 1)))
    if normalized:
        return out
    return [PiMonomial(v, 0) if k < 2 else PiMonomial(v, 0) / NORMALIZATION**k
            for k, v in enumerate(out)]


def moments_from_cumulants(kappas: list, scale: PiMonomial = NORMALIZATION,
                           provenance: str = "wick4d") -> MomentSequence:
    """Moments of ``scale * X`` from the exact cumulants of ``X``.

    ``kappas`` may hold PiMonomials (physical) or rationals already
    multiplied by ``scale**k``. Scaled cumulants must be pure rationals.
    """
    scaled = []
    for k, kap in enumerate(kappas):
        if isinstance(kap, PiMonomial):
            kap = kap * scale**k
            if kap.power != 0:
                raise ValueError("scaled cumulants are not rational; wrong scale?")
            kap = kap.coef
        scaled.append(Fraction(kap))
    m = [Fraction(1)]
    for n in range(1, len(scaled)):
        m.append(sum(comb(n - 1, j - 1) * scaled[j] * m[n - j] for j in range(1, n + 1)))
    return MomentSequence(tuple(m), "scaled", scale, provenance)


def moments(n_max: int, w: WindowSpectrum, budget: int = DEFAULT_BUDGET) -> MomentSequence:
    """Normalized moments ``M_n = (4 pi)^(2n) m_n`` for ``n = 0..n_max``."""
    if n_max < 2:
        vals = (Fraction(1), Fraction(0))[: n_max + 1]
        return MomentSequence(vals, "scaled", NORMALIZATION, "wick4d")
    return moments_from_cumulants(cumulants(n_max, w, budget, normalized=True))


@dataclass(frozen=True)
class CyclePartition:
    """A way to split n insertions into cycles, with its contraction count."""

    cycles: tuple
    weight: int

    def __post_init__(self):
        if any(k < 2 for k in self.cycles) or self.weight <= 0:
            raise ValueError("invalid cycle partition")

    @property
    def n(self) -> int:
        return sum(self.cycles)


def cycle_partitions(n: int) -> list:
    """All cycle-length multisets for ``n`` insertions, with weights

    ``n! / prod(k!^m_k m_k!) * prod(2^(k-1) (k-1)!)``.
    """
    def parts(rest, largest):
        if rest == 0:
            yield ()
            return
        for k in range(min(rest, largest), 1, -1):
            for tail in parts(rest - k, k):
                yield (k,) + tail

    out = []
    for cyc in parts(n, n):
        mult = Counter(cyc)
        w = factorial(n)
        for k, m in mult.items():
            w //= factorial(k) ** m * factorial(m)
        for k in cyc:
            w *= 2 ** (k - 1) * factorial(k - 1)
        out.append(CyclePartition(cyc, w))
    return out


def moments_via_partitions(n_max: int, w: WindowSpectrum,
                           budget: int = DEFAULT_BUDGET) -> MomentSequence:
    """Normalized moments summed directly over cycle partitions."""
    _check_budget(n_max, budget)
    sums = _ordering_sums(max(n_max, 2), w)
    c = {k: sums[k] / factorial(k - 1) for k in range(2, n_max + 1)}
    vals = []
    for n in range(n_max + 1):
        total = Fraction(int(n == 0))
        for part in cycle_partitions(n) if n else ():
            prod = Fraction(part.weight)
            for k in part.cycles:
                prod *= 4**k * c[k]
            total += prod
        vals.append(total)
    return MomentSequence(tuple(vals), "scaled", NORMALIZATION, "wick4d-partitions")


# -- reference checks ---------------------------------------------------------

def reproduce_table1(n_max: int = 8, budget: int = TABLE1_BUDGET) -> list:
    """Lorentzian ``:phi^2:`` moments ``M_0..M_n_max`` as exact integers.

    Orders with an embedded reference value are checked against it.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    _check_budget(n_max, budget)
    seq = moments(n_max, WindowSpectrum(func.LORENTZIAN, 1), budget=max(budget, 2))
    vals = list(seq.values)
    for n, v in enumerate(vals):
        if v.denominator != 1:
            raise MismatchAgainstGolden(f"M_{n} = {v} is not an integer")
        if n < len(TABLE1) and v != TABLE1[n]:
            raise MismatchAgainstGolden(f"M_{n} = {v}, expected {TABLE1[n]}")
    return [int(v) for v in vals]


@dataclass(frozen=True)
class ConjecturedQI:
    omega0: PiMonomial
    ratio_vs_general_bound: Fraction
    fit: ShiftedGamma

    @property
    def bound(self) -> PiMonomial:
        return -self.omega0


def conjectured_qi(w: WindowSpectrum) -> ConjecturedQI:
    """Shifted-Gamma fit from three moments and its lower endpoint.

    The ratio compares the general bound ``(1/8 pi^2) integral (d sqrt f)^2``
    (computed exactly for the window) with the fitted ``omega0``.
    """
    if w.p != 1:
        raise ValueError("the conjectured bound is defined for the field square (p = 1)")
    fit = fit_from_moments(moments(3, w))
    omega0 = fit.physical_params()["omega0"]
    general = PiMonomial(func.qi_integral_exact(w.kind), -2) / 8
    ratio = general / omega0
    if ratio.power != 0:
        raise ValueError("bound ratio is not rational")
    return ConjecturedQI(omega0, ratio.coef, fit)


def misfit_demo(n_max: int = 6, budget: int = DEFAULT_BUDGET) -> FitReport:
    """Fit the ``:(d_t phi)^2:`` moments from orders <= 3 and report residuals."""
    if n_max < 4:
        raise ValueError("n_max must be at least 4")
    seq = moments(n_max, WindowSpectrum(func.LORENTZIAN, 3), budget)
    return verify_fit(fit_from_moments(seq), seq)


# -- rendering ---------------------------------------------------------------

def moment_table(seq: MomentSequence) -> list:
    """Rows ``{n, M_n, exact}`` with M_n in decimal and ``exact`` as "p/q·π^k"."""
    rows = []
    for n, v in enumerate(seq.values):
        exact = PiMonomial(v, 0)
        rows.append({"n": n, "M_n": decimal_str(Fraction(v)), "exact": str(exact)})
    return rows


def moment_table_json(seq: MomentSequence) -> str:
    data = {"normalization": "M_n = (4 pi tau)^(2n) <X^n>", "scale": str(seq.scale),
            "provenance": seq.provenance, "moments": moment_table(seq)}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def moment_table_text(seq: MomentSequence, golden=None) -> str:
    lines = [f"{'n':>3}  {'M_n':>24}" + ("  check" if golden is not None else "")]
    for n, v in enumerate(seq.values):
        line = f"{n:>3}  {fraction_str(v):>24}"
        if golden is not None and n < len(golden):
            line += "  " + ("PASS" if v == golden[n] else "FAIL")
        lines.append(line)
    return "\n".join(lines) + "\n"
