import json
import math
from fractions import Fraction
from itertools import permutations

import pytest
from scipy.integrate import nquad

from stressdist import dist, func, wick4d
from stressdist.errors import Intractable
from stressdist.exact import PiMonomial
from stressdist.wick4d import WindowSpectrum

LOR = WindowSpectrum(func.LORENTZIAN, 1)
SQL = WindowSpectrum(func.SQUARED_LORENTZIAN, 1)
LOR3 = WindowSpectrum(func.LORENTZIAN, 3)
ALL = [LOR, SQL, LOR3]
TABLE = [1, 0, 2, 48, 1740, 83904, 5051640, 364724928, 30707616912]
# residuals of the 3-moment fit to the derivative-field moments, frozen at first computation
MISFIT_RESIDUALS = {4: Fraction(1360800), 5: Fraction(7552440000), 6: Fraction(59448000654000)}


def test_two_cycles_are_elementary():
    assert wick4d.cycle_integral(2, LOR) == Fraction(1, 16)
    assert wick4d.cycle_integral(2, LOR3) == Fraction(9, 64)
    # with s = x + y: integral (1 + s)^2 e^{-2s} s^3 / 6 ds = (6/16 + 48/32 + 120/64) / 6
    assert wick4d.cycle_integral(2, SQL) == Fraction(5, 8)


@pytest.mark.parametrize("w,shape", [(LOR, lambda s: math.exp(-s)),
                                     (SQL, lambda s: (1 + s) * math.exp(-s))])
def test_three_cycle_against_direct_quadrature(w, shape):
    # both cyclic orders of three insertions give the same integrand
    def f(a, b, c):
        return a * b * c * shape(a + c) * shape(abs(a - b)) * shape(b + c)

    val, _ = nquad(f, [[0, 60]] * 3,
                   opts=[lambda b, c: {"points": [b], "epsrel": 1e-9, "limit": 200},
                         {"epsrel": 1e-9}, {"epsrel": 1e-9}])
    assert float(wick4d.cycle_integral(3, w)) == pytest.approx(val, rel=1e-8)


@pytest.mark.parametrize("w", ALL)
@pytest.mark.parametrize("k", range(2, 8))
def test_transfer_recursion_matches_sector_enumeration(w, k):
    assert wick4d.cycle_integral(k, w) == wick4d.cycle_integral_sectors(k, w)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_sector_sum_is_order_independent(seed):
    ref = wick4d.cycle_integral_sectors(6, SQL)
    assert wick4d.cycle_integral_sectors(6, SQL, seed=seed) == ref


def test_extremum_patterns_cover_all_orderings():
    # brute force: a vertex is an extremum iff its neighbours are both larger or both smaller
    for perm in permutations(range(2, 7)):
        seq = (1,) + perm
        pat = wick4d._pattern(seq)
        for i, kind in enumerate(pat, start=1):
            left, mid, right = seq[i - 1], seq[i], seq[(i + 1) % len(seq)]
            assert (kind == "S") == ((left - mid) * (right - mid) > 0)


@pytest.mark.parametrize("w", ALL)
def test_cycle_integrals_and_even_cumulants_positive(w):
    kap = wick4d.cumulants(9, w, normalized=True)
    assert all(wick4d.cycle_integral(k, w) > 0 for k in range(2, 10))
    assert all(kap[k] > 0 for k in range(2, 10, 2))


def test_budget_is_enforced():
    with pytest.raises(Intractable):
        wick4d.cycle_integral(10, LOR)
    with pytest.raises(Intractable):
        wick4d.reproduce_table1(9)
    assert wick4d.cycle_integral(10, LOR, budget=10) > 0


def test_physical_cumulants():
    kap = wick4d.cumulants(3, LOR)
    assert kap[1] == PiMonomial(0)
    assert kap[2] == PiMonomial(Fraction(1, 128), -4)
    assert kap[3].power == -6


def test_table_reproduction():
    assert wick4d.reproduce_table1(8) == TABLE
    assert wick4d.reproduce_table1(2) == [1, 0, 2]
    assert wick4d.reproduce_table1(5)[-1] == 83904


def test_moments_by_partitions_agree_with_cumulant_route():
    for w in ALL:
        assert (wick4d.moments_via_partitions(8, w).values
                == wick4d.moments(8, w).values)


def test_partition_weights():
    parts = {p.cycles: p.weight for p in wick4d.cycle_partitions(4)}
    # one 4-cycle: 2^3 3! = 48; two 2-cycles: 3 pairings * 2 * 2
    assert parts == {(4,): 48, (2, 2): 12}
    assert sum(p.weight for p in wick4d.cycle_partitions(6)) > 0


def test_lorentzian_fit_is_exact():
    m = wick4d.moments(8, LOR)
    fit = dist.fit_from_moments(m)
    params = fit.physical_params()
    assert params["alpha"] == PiMonomial(Fraction(1, 72))
    assert params["beta"] == PiMonomial(Fraction(4, 3), 2)
    assert params["omega0"] == PiMonomial(Fraction(1, 96), -2)
    assert dist.verify_fit(fit, m).exact_match


@pytest.mark.slow
def test_lorentzian_fit_stays_exact_to_order_twenty():
    m = wick4d.moments(20, LOR, budget=20)
    assert dist.verify_fit(dist.fit_from_moments(m), m).exact_match
    assert dist.hamburger_check(m).success


@pytest.mark.slow
def test_squared_lorentzian_fit_is_exact_to_order_fifteen():
    m = wick4d.moments(15, SQL, budget=15)
    fit = dist.fit_from_moments(m)
    params = fit.physical_params()
    assert params["alpha"] == PiMonomial(Fraction(1, 45))
    assert params["beta"] == PiMonomial(Fraction(8, 15), 2)
    assert params["omega0"] == PiMonomial(Fraction(1, 24), -2)
    assert dist.verify_fit(fit, m).exact_match


def test_conjectured_bounds():
    q = wick4d.conjectured_qi(LOR)
    assert q.omega0 == PiMonomial(Fraction(1, 96), -2)
    assert q.ratio_vs_general_bound == Fraction(3, 2)
    q2 = wick4d.conjectured_qi(SQL)
    assert q2.omega0 == PiMonomial(Fraction(1, 24), -2)
    assert q2.ratio_vs_general_bound == Fraction(3, 2)
    # same ratio from the quadrature form of the general bound
    general = func.qi_functional(func.SamplingFunction.lorentzian(), 1 / (8 * math.pi**2),
                                 method="quad")
    assert -general / float(q.omega0) == pytest.approx(1.5, rel=1e-9)
    with pytest.raises(ValueError):
        wick4d.conjectured_qi(LOR3)


def test_derivative_field_misfit():
    rep = wick4d.misfit_demo(6)
    assert all(r == 0 for r in rep.residuals[:4])
    res = {n: rep.residuals[n] for n in range(4, 7)}
    assert all(v > 0 for v in res.values())
    assert res[4] < res[5] < res[6]
    assert res == MISFIT_RESIDUALS


@pytest.mark.parametrize("p", [1, 3])
def test_width_scaling(p):
    # kappa_k scales as tau^-(p+1)k, so the raw moments as tau^-(p+1)n
    one = wick4d.moments(6, WindowSpectrum(func.LORENTZIAN, p))
    two = wick4d.moments(6, WindowSpectrum(func.LORENTZIAN, p, Fraction(2)))
    for n in range(7):
        assert two.values[n] * 2 ** ((p + 1) * n) == one.values[n]


def test_table_output_formats():
    seq = wick4d.moments(8, LOR)
    data = json.loads(wick4d.moment_table_json(seq))
    assert data["moments"][8] == {"n": 8, "M_n": "30707616912", "exact": "30707616912"}
    assert wick4d.moment_table_json(seq) == json.dumps(data, indent=2, sort_keys=True) + "\n"
    text = wick4d.moment_table_text(seq, TABLE)
    assert text.count("PASS") == 9


def test_window_spectrum_validation():
    with pytest.raises(ValueError):
        WindowSpectrum(func.GAUSSIAN, 1)
    with pytest.raises(ValueError):
        WindowSpectrum(func.LORENTZIAN, 2)
