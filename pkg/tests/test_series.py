"""Tests for windowed Laurent series arithmetic and the derivation."""

from fractions import Fraction

import pytest

from rsconn.coeffring import RingElem
from rsconn.errors import NotAUnit, PrecisionExhausted
from rsconn.series import LaurentSeries, series_invert, theta, x_shift

from ._gen import rand_elem, rng_for


def poly(t_order, terms, exact=True, hi=None):
    return LaurentSeries.from_terms(t_order, terms, exact=exact, hi=hi)


def rand_series(rng, m, lo=-3, hi=5, exact=True, density=0.7):
    terms = {}
    for k in range(lo, hi + 1):
        if rng.random() < density:
            terms[k] = rand_elem(rng, m)
    return LaurentSeries.from_terms(m, terms, exact=exact,
                                    hi=None if exact else hi)


class TestArith:
    def test_exact_product(self):
        f = poly(1, {0: 1, 1: 1})
        g = poly(1, {0: 1, 1: -1})
        assert f * g == poly(1, {0: 1, 2: -1})
        assert (f * g).exact

    def test_window_shift_under_product(self):
        f = poly(1, {-1: 1, 0: 1}, exact=False, hi=3)
        g = LaurentSeries.x_power(1, 1)
        h = f * g
        assert not h.exact
        assert h.lo == 0 and h.hi == 4
        assert h.coeff(0) == 1 and h.coeff(1) == 1
        assert all(h.coeff(k).is_zero for k in (2, 3, 4))

    def test_truncation_law_matches_exact_product(self):
        rng = rng_for("series-trunc", 2)
        for _ in range(60):
            m = rng.randint(1, 3)
            f = rand_series(rng, m)
            g = rand_series(rng, m)
            wf = f.restrict_window(rng.randint(f.hi, f.hi + 3)) \
                if not f.is_zero else f
            exact = f * g
            windowed = wf * g
            assert exact.eq_on_window(windowed)

    def test_restrict_below_lo_gives_known_zero_stub(self):
        f = poly(1, {5: 1}, exact=False, hi=6)
        g = f.restrict_window(4)
        assert not g.exact and g.hi == 4 and g.is_known_zero

    def test_widening_a_window_raises(self):
        f = poly(1, {0: 1}, exact=False, hi=2)
        with pytest.raises(PrecisionExhausted):
            f.restrict_window(5)


class TestInversion:
    def test_monomial_inverts_exactly(self):
        inv = series_invert(LaurentSeries.x_power(2, 1))
        assert inv == LaurentSeries.x_power(2, -1)
        assert inv.exact

    def test_geometric_series(self):
        f = poly(1, {0: 1, 1: -1})
        inv = series_invert(f, 3)
        assert inv.eq_on_window(poly(1, {0: 1, 1: 1, 2: 1, 3: 1},
                                     exact=False, hi=3))

    def test_unit_constant_term_with_t(self):
        m = 2
        f = poly(m, {0: RingElem(m, (1, 1)), 1: 1}, exact=False, hi=2)
        inv = series_invert(f, 2)
        # derived: multiply back; the product must be 1 on the window
        assert (f * inv).eq_on_window(LaurentSeries.one(m))
        assert inv.coeff(0) == RingElem(m, (1, -1))
        assert inv.coeff(1) == RingElem(m, (-1, 2))
        assert inv.coeff(2) == RingElem(m, (1, -3))

    def test_non_unit_lowest_coefficient_rejected(self):
        m = 2
        f = poly(m, {0: RingElem.t(m), 1: 1})
        with pytest.raises(NotAUnit):
            series_invert(f, 4)

    def test_double_inversion_roundtrip(self):
        rng = rng_for("series-inv", 9)
        for _ in range(40):
            m = rng.randint(1, 3)
            f = rand_series(rng, m, lo=0, hi=4, density=0.8)
            f = f + LaurentSeries.one(m)  # force a unit constant term
            if not f.coeff(f.valuation()).is_unit:
                continue
            inv = f.inverse(6)
            back = inv.inverse(4)
            assert back.eq_on_window(f)


class TestDerivation:
    def test_constants_are_flat(self):
        assert theta(LaurentSeries.one(3)).is_zero

    def test_monomial_scaling(self):
        f = LaurentSeries.x_power(1, 3)
        assert theta(f) == f * 3

    def test_leibniz_rule(self):
        rng = rng_for("series-leibniz", 4)
        for _ in range(60):
            m = rng.randint(1, 3)
            f = rand_series(rng, m, exact=bool(rng.getrandbits(1)),
                            hi=5)
            g = rand_series(rng, m, exact=bool(rng.getrandbits(1)),
                            hi=5)
            lhs = theta(f * g)
            rhs = theta(f) * g + f * theta(g)
            assert lhs.eq_on_window(rhs)

    def test_shift_commutation(self):
        rng = rng_for("series-shift", 6)
        for _ in range(60):
            m = rng.randint(1, 3)
            f = rand_series(rng, m, exact=bool(rng.getrandbits(1)), hi=4)
            k = rng.randint(-5, 5)
            lhs = theta(x_shift(f, k))
            rhs = x_shift(f, k) * k + x_shift(theta(f), k)
            assert lhs.eq_on_window(rhs)

    def test_simple_shifts(self):
        assert x_shift(LaurentSeries.one(1), 2) == LaurentSeries.x_power(1, 2)
        assert x_shift(LaurentSeries.x_power(1, -1), 1) == LaurentSeries.one(1)


class TestWindows:
    def test_exact_subring_closure(self):
        rng = rng_for("series-exact", 8)
        for _ in range(30):
            m = rng.randint(1, 3)
            f, g = rand_series(rng, m), rand_series(rng, m)
            assert (f + g).exact and (f * g).exact and theta(f).exact

    def test_coefficient_beyond_window_raises(self):
        f = poly(1, {0: 1}, exact=False, hi=2)
        with pytest.raises(PrecisionExhausted):
            f.coeff(3)

    def test_known_zero_window_is_not_exact_zero(self):
        f = poly(1, {}, exact=False, hi=4)
        assert f.is_known_zero and not f.is_zero
