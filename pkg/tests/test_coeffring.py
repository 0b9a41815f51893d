"""Tests for the truncated base ring, Bezout identities and Hensel lifting."""

from fractions import Fraction

import pytest

from rsconn.coeffring import (
    Poly,
    RingElem,
    bezout_coprime,
    bezout_lift,
    elem_arith,
    elem_invert,
    factor_over_rationals,
    hensel_lift_factors,
    poly_gcd_rational,
)
from rsconn.errors import (
    BadResidueFactorization,
    NotAUnit,
    NotCoprime,
    StructureError,
    UnsupportedSpectrum,
)

from ._gen import rand_elem, rand_monic_split_poly, rand_unit, rng_for


def elem(m, *coeffs):
    return RingElem(m, [Fraction(c) if not isinstance(c, Fraction) else c
                        for c in coeffs])


class TestRingElem:
    def test_mul_truncates_at_t_order_two(self):
        one_plus = elem(2, 1, 1)
        one_minus = elem(2, 1, -1)
        assert one_plus * one_minus == RingElem.one(2)

    def test_mul_keeps_low_terms_at_order_three(self):
        one_plus = elem(3, 1, 1)
        one_minus = elem(3, 1, -1)
        assert one_plus * one_minus == elem(3, 1, 0, -1)

    def test_maximal_ideal_is_nilpotent(self):
        t = RingElem.t(2)
        assert (t * t).is_zero

    def test_opcode_cover(self):
        a, b = elem(2, 1, 2), elem(2, 3, -1)
        assert elem_arith(a, b, "add") == elem(2, 4, 1)
        assert elem_arith(a, b, "sub") == elem(2, -2, 3)
        assert elem_arith(a, b, "mul") == elem(2, 3, 5)

    def test_mixed_t_order_rejected(self):
        with pytest.raises(StructureError):
            elem(2, 1) + elem(3, 1)

    def test_invert_one_plus_t_order_two(self):
        assert elem_invert(elem(2, 1, 1)) == elem(2, 1, -1)

    def test_invert_constant(self):
        assert elem_invert(elem(3, 2)) == elem(3, Fraction(1, 2))

    def test_invert_one_plus_t_order_three(self):
        inv = elem_invert(elem(3, 1, 1))
        # derived: multiply back and check the product is exactly 1
        assert inv * elem(3, 1, 1) == RingElem.one(3)
        assert inv == elem(3, 1, -1, 1)

    def test_invert_requires_unit(self):
        with pytest.raises(NotAUnit):
            RingElem.t(2).inv()

    def test_invert_roundtrip_random_units(self):
        rng = rng_for("units", 7)
        for _ in range(200):
            m = rng.randint(1, 4)
            u = rand_unit(rng, m)
            assert u.inv() * u == RingElem.one(m)


class TestBezout:
    def test_linear_pair(self):
        g = Poly.variable(1)
        h = g - Poly.one(1)  # T - 1
        u, v = bezout_coprime(g, h)
        assert u * g + v * h == Poly.one(1)
        assert u == Poly.one(1) and v == -Poly.one(1)

    def test_symmetric_pair(self):
        T = Poly.variable(1)
        g, h = T - Poly.one(1), T + Poly.one(1)
        u, v = bezout_coprime(g, h)
        assert u * g + v * h == Poly.one(1)
        assert u == Poly(1, [Fraction(-1, 2)])
        assert v == Poly(1, [Fraction(1, 2)])

    def test_quadratic_pair(self):
        T = Poly.variable(1)
        g, h = T * T, T - Poly.one(1)
        u, v = bezout_coprime(g, h)
        assert u * g + v * h == Poly.one(1)
        assert u.degree < h.degree or u.is_zero
        assert v.degree < g.degree or v.is_zero

    def test_non_coprime_rejected(self):
        T = Poly.variable(1)
        with pytest.raises(NotCoprime):
            bezout_coprime(T * (T - Poly.one(1)), T)

    def test_random_pairs_identity_and_degree_bounds(self):
        rng = rng_for("bezout", 3)
        pool = [Fraction(0), Fraction(1), Fraction(-2), Fraction(1, 2),
                Fraction(5, 3)]
        for _ in range(100):
            roots = rng.sample(pool, 4)
            g = Poly.from_root(roots[0], 1) * Poly.from_root(roots[1], 1)
            h = Poly.from_root(roots[2], 1) * Poly.from_root(roots[3], 1)
            u, v = bezout_coprime(g, h)
            assert u * g + v * h == Poly.one(1)
            assert u.is_zero or u.degree < h.degree
            assert v.is_zero or v.degree < g.degree


class TestHensel:
    def test_square_root_of_one_plus_t_order_two(self):
        # p = T^2 - (1+t), the characteristic polynomial of the worked
        # 2x2 matrix with off-diagonal entries 1+t and 1
        m = 2
        T = Poly.variable(m)
        p = T * T - Poly(m, [elem(m, 1, 1)])
        fac = hensel_lift_factors(
            p, [Poly.from_root(1, 1), Poly.from_root(-1, 1)]
        )
        s = elem(m, 1, Fraction(1, 2))
        assert fac == [
            Poly(m, [-s, RingElem.one(m)]),
            Poly(m, [s, RingElem.one(m)]),
        ]
        assert fac[0] * fac[1] == p

    def test_square_root_of_one_plus_t_order_three(self):
        # independent oracle: Newton iteration for sqrt(1+t) mod t^3
        m = 3
        a = elem(m, 1, 1)
        s = RingElem.one(m)
        for _ in range(4):
            s = (s + a * s.inv()) * Fraction(1, 2)
        assert s * s == a
        assert s == elem(m, 1, Fraction(1, 2), Fraction(-1, 8))
        T = Poly.variable(m)
        p = T * T - Poly(m, [a])
        fac = hensel_lift_factors(
            p, [Poly.from_root(1, 1), Poly.from_root(-1, 1)]
        )
        assert fac == [
            Poly(m, [-s, RingElem.one(m)]),
            Poly(m, [s, RingElem.one(m)]),
        ]

    def test_single_factor_returns_input(self):
        m = 3
        t = RingElem.t(m)
        base = Poly(m, [RingElem.from_rational(Fraction(-1, 2), m) + t,
                        RingElem.one(m)])
        p = base * base
        fac = hensel_lift_factors(p, [Poly.from_root(Fraction(1, 2), 1) ** 2])
        assert fac == [p]

    def test_bad_residue_factorization_rejected(self):
        m = 2
        T = Poly.variable(m)
        p = T * T - Poly.one(m)
        with pytest.raises(BadResidueFactorization):
            hensel_lift_factors(p, [Poly.from_root(1, 1),
                                    Poly.from_root(2, 1)])

    def test_non_coprime_residue_factors_rejected(self):
        m = 2
        T = Poly.variable(m)
        p = (T - Poly.one(m)) ** 2
        with pytest.raises(NotCoprime):
            hensel_lift_factors(p, [Poly.from_root(1, 1),
                                    Poly.from_root(1, 1)])

    def test_random_lifts_recover_perturbed_factors(self):
        # monic lifts with prescribed coprime residues are unique, so the
        # lift must recover the exact factors the product was built from
        rng = rng_for("hensel", 11)
        pool = [Fraction(0), Fraction(1), Fraction(-1), Fraction(1, 2),
                Fraction(-3, 2), Fraction(2)]
        for _ in range(60):
            m = rng.randint(1, 4)
            roots = rng.sample(pool, rng.randint(2, 3))
            true_factors = []
            for r in roots:
                mu = rng.randint(1, 2)
                base = Poly.from_root(r, 1) ** mu
                lifted = base.lift(m)
                for s in range(1, m):
                    noise = Poly(1, [Fraction(rng.randint(-3, 3), 2)
                                     for _ in range(mu)])
                    lifted = lifted.plus_t_layer(s, noise)
                true_factors.append(lifted)
            p = Poly.one(m)
            for f in true_factors:
                p = p * f
            recovered = hensel_lift_factors(p, [f.residue()
                                                for f in true_factors])
            assert recovered == true_factors

    def test_lifted_factors_strictly_coprime(self):
        m = 3
        T = Poly.variable(m)
        p = T * T - Poly(m, [elem(m, 1, 1)])
        g, h = hensel_lift_factors(
            p, [Poly.from_root(1, 1), Poly.from_root(-1, 1)]
        )
        u, v = bezout_lift(g, h)
        assert u * g + v * h == Poly.one(m)


class TestFactorOverRationals:
    def test_simple_split(self):
        T = Poly.variable(1)
        assert factor_over_rationals(T * T - T) == [
            (Fraction(0), 1),
            (Fraction(1), 1),
        ]

    def test_multiplicities(self):
        p = Poly.from_root(Fraction(1, 2), 1) ** 2 * Poly.from_root(
            Fraction(1, 3), 1
        )
        assert factor_over_rationals(p) == [
            (Fraction(1, 3), 1),
            (Fraction(1, 2), 2),
        ]

    def test_irrational_spectrum_rejected(self):
        T = Poly.variable(1)
        p = T * T - Poly(1, [Fraction(2)])
        with pytest.raises(UnsupportedSpectrum):
            factor_over_rationals(p)

    def test_factor_inverts_expansion(self):
        rng = rng_for("factor", 5)
        for _ in range(100):
            p, roots = rand_monic_split_poly(rng)
            assert factor_over_rationals(p) == sorted(roots.items())


class TestPolyAlgebra:
    def test_divmod_reconstruction(self):
        rng = rng_for("divmod", 1)
        for _ in range(50):
            m = rng.randint(1, 3)
            a = Poly(m, [rand_elem(rng, m) for _ in range(rng.randint(1, 6))])
            b_body = [rand_elem(rng, m) for _ in range(rng.randint(1, 3))]
            b = Poly(m, b_body + [RingElem.one(m)])
            q, r = divmod(a, b)
            assert q * b + r == a
            assert r.is_zero or r.degree < b.degree

    def test_gcd_of_shared_factor(self):
        T = Poly.variable(1)
        g = (T - Poly.one(1)) * (T + Poly.one(1))
        h = (T - Poly.one(1)) * T
        assert poly_gcd_rational(g, h) == T - Poly.one(1)
