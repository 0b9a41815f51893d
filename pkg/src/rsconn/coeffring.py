"""Exact arithmetic in Q[t]/(t^m) and polynomial algebra over it.

The base ring throughout the package is the truncated local ring
R = Q[t]/(t^m).  It is local with maximal ideal (t), Artinian, and every
coprime factorization of a monic polynomial over the residue field Q
lifts to R; the lift is computed here in m-1 exact correction steps.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    BadResidueFactorization,
    NotAUnit,
    NotCoprime,
    StructureError,
    UnsupportedSpectrum,
)

Rational = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    raise StructureError(f"expected a rational number, got {value!r}")


class RingElem:
    """An element of R = Q[t]/(t^m), kept as m exact rational coefficients."""

    __slots__ = ("t_order", "coeffs")

    def __init__(self, t_order: int, coeffs=()):
        if t_order < 1:
            raise StructureError("t_order must be a positive integer")
        cs = [_as_fraction(c) for c in coeffs]
        if len(cs) > t_order:
            raise StructureError(
                f"{len(cs)} coefficients exceed t_order {t_order}"
            )
        cs.extend([_ZERO] * (t_order - len(cs)))
        object.__setattr__(self, "t_order", t_order)
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *_):
        raise AttributeError("RingElem is immutable")

    @classmethod
    def zero(cls, t_order: int) -> "RingElem":
        return cls(t_order)

    @classmethod
    def one(cls, t_order: int) -> "RingElem":
        return cls(t_order, (_ONE,))

    @classmethod
    def from_rational(cls, value, t_order: int) -> "RingElem":
        return cls(t_order, (_as_fraction(value),))

    @classmethod
    def t(cls, t_order: int) -> "RingElem":
        """The maximal-ideal generator t (zero when m = 1)."""
        if t_order == 1:
            return cls(1)
        return cls(t_order, (_ZERO, _ONE))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    @property
    def residue(self) -> Fraction:
        """The image in the residue field R/(t) = Q."""
        return self.coeffs[0]

    def t_layer(self, s: int) -> Fraction:
        return self.coeffs[s]

    def _check(self, other: "RingElem"):
        if self.t_order != other.t_order:
            raise StructureError(
                f"mixed t_order: {self.t_order} vs {other.t_order}"
            )

    def __add__(self, other):
        if isinstance(other, RingElem):
            self._check(other)
            return RingElem(
                self.t_order,
                [a + b for a, b in zip(self.coeffs, other.coeffs)],
            )
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            cs = list(self.coeffs)
            cs[0] = cs[0] + other
            return RingElem(self.t_order, cs)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return RingElem(self.t_order, [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, RingElem):
            self._check(other)
            return RingElem(
                self.t_order,
                [a - b for a, b in zip(self.coeffs, other.coeffs)],
            )
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            cs = list(self.coeffs)
            cs[0] = cs[0] - other
            return RingElem(self.t_order, cs)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, RingElem):
            self._check(other)
            m = self.t_order
            a, b = self.coeffs, other.coeffs
            out = [_ZERO] * m
            for i, ai in enumerate(a):
                if ai:
                    for j in range(m - i):
                        bj = b[j]
                        if bj:
                            out[i + j] += ai * bj
            return RingElem(m, out)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                return RingElem(self.t_order)
            return RingElem(self.t_order, [c * other for c in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        out = RingElem.one(self.t_order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inv(self) -> "RingElem":
        """Exact inverse; defined iff the residue is nonzero."""
        if not self.is_unit:
            raise NotAUnit(f"{self} has zero residue, not invertible")
        m = self.t_order
        a = self.coeffs
        inv0 = 1 / a[0]
        out = [inv0] + [_ZERO] * (m - 1)
        # out[k] solves sum_{i<=k} a[i]*out[k-i] = 0 for k >= 1
        for k in range(1, m):
            acc = _ZERO
            for i in range(1, k + 1):
                if a[i]:
                    acc += a[i] * out[k - i]
            out[k] = -inv0 * acc
        return RingElem(m, out)

    def __eq__(self, other):
        if isinstance(other, RingElem):
            return self.t_order == other.t_order and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.coeffs[0] == other and all(
                c == 0 for c in self.coeffs[1:]
            )
        return NotImplemented

    def __hash__(self):
        return hash((self.t_order, self.coeffs))

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return f"RingElem({self.t_order}, {self})"

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append(f"{c}*t" if c != 1 else "t")
            else:
                parts.append(f"{c}*t^{i}" if c != 1 else f"t^{i}")
        return " + ".join(parts) if parts else "0"


def elem_arith(a: RingElem, b: RingElem, op: str) -> RingElem:
    """Ring operation with an explicit opcode; thin cover of the operators."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise StructureError(f"unknown ring operation {op!r}")


def elem_invert(a: RingElem) -> RingElem:
    return a.inv()


class Poly:
    """A univariate polynomial in T with coefficients in Q[t]/(t^m).

    Coefficients are stored lowest degree first with the leading one
    nonzero; the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("t_order", "coeffs")

    def __init__(self, t_order: int, coeffs=()):
        cs = []
        for c in coeffs:
            if isinstance(c, RingElem):
                if c.t_order != t_order:
                    raise StructureError("coefficient has wrong t_order")
                cs.append(c)
            else:
                cs.append(RingElem.from_rational(_as_fraction(c), t_order))
        while cs and cs[-1].is_zero:
            cs.pop()
        object.__setattr__(self, "t_order", t_order)
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, *_):
        raise AttributeError("Poly is immutable")

    @classmethod
    def zero(cls, t_order: int) -> "Poly":
        return cls(t_order)

    @classmethod
    def one(cls, t_order: int) -> "Poly":
        return cls(t_order, (_ONE,))

    @classmethod
    def variable(cls, t_order: int) -> "Poly":
        """The polynomial T."""
        return cls(t_order, (_ZERO, _ONE))

    @classmethod
    def from_root(cls, root, t_order: int) -> "Poly":
        """T - root for a rational root."""
        return cls(t_order, (-_as_fraction(root), _ONE))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> RingElem:
        if self.is_zero:
            raise StructureError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    @property
    def is_monic(self) -> bool:
        return not self.is_zero and self.leading == 1

    def coeff(self, k: int) -> RingElem:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return RingElem.zero(self.t_order)

    def _check(self, other: "Poly"):
        if self.t_order != other.t_order:
            raise StructureError(
                f"mixed t_order: {self.t_order} vs {other.t_order}"
            )

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(
            self.t_order, [self.coeff(k) + other.coeff(k) for k in range(n)]
        )

    def __sub__(self, other: "Poly") -> "Poly":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(
            self.t_order, [self.coeff(k) - other.coeff(k) for k in range(n)]
        )

    def __neg__(self) -> "Poly":
        return Poly(self.t_order, [-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            if self.is_zero or other.is_zero:
                return Poly.zero(self.t_order)
            out = [RingElem.zero(self.t_order)] * (
                len(self.coeffs) + len(other.coeffs) - 1
            )
            for i, a in enumerate(self.coeffs):
                if a.is_zero:
                    continue
                for j, b in enumerate(other.coeffs):
                    if not b.is_zero:
                        out[i + j] = out[i + j] + a * b
            return Poly(self.t_order, out)
        if isinstance(other, RingElem):
            return Poly(self.t_order, [c * other for c in self.coeffs])
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Poly(self.t_order, [c * other for c in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise StructureError("negative polynomial power")
        out = Poly.one(self.t_order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __divmod__(self, divisor: "Poly"):
        """Division with remainder; the divisor must have a unit leading
        coefficient."""
        self._check(divisor)
        if divisor.is_zero:
            raise StructureError("division by the zero polynomial")
        if not divisor.leading.is_unit:
            raise NotAUnit("leading coefficient of the divisor is not a unit")
        lead_inv = divisor.leading.inv()
        rem = list(self.coeffs)
        dd = divisor.degree
        qlen = len(rem) - dd
        if qlen <= 0:
            return Poly.zero(self.t_order), self
        quo = [RingElem.zero(self.t_order)] * qlen
        for k in range(qlen - 1, -1, -1):
            factor = rem[k + dd] * lead_inv
            if factor.is_zero:
                continue
            quo[k] = factor
            for j, dj in enumerate(divisor.coeffs):
                if not dj.is_zero:
                    rem[k + j] = rem[k + j] - factor * dj
        return Poly(self.t_order, quo), Poly(self.t_order, rem[:dd])

    def __floordiv__(self, divisor: "Poly") -> "Poly":
        return divmod(self, divisor)[0]

    def __mod__(self, divisor: "Poly") -> "Poly":
        return divmod(self, divisor)[1]

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.t_order == other.t_order and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.t_order, self.coeffs))

    def evaluate(self, x: RingElem) -> RingElem:
        """Horner evaluation at a ring element."""
        acc = RingElem.zero(self.t_order)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def evaluate_rational(self, x) -> Fraction:
        """Horner evaluation over Q; only for t_order 1."""
        if self.t_order != 1:
            raise StructureError("rational evaluation needs t_order 1")
        xq = _as_fraction(x)
        acc = _ZERO
        for c in reversed(self.coeffs):
            acc = acc * xq + c.residue
        return acc

    def residue(self) -> "Poly":
        """The image in Q[T], as a polynomial with t_order 1."""
        return Poly(1, [c.residue for c in self.coeffs])

    def lift(self, t_order: int) -> "Poly":
        """Embed a Q polynomial into R[T] with zero t-part."""
        if self.t_order != 1:
            raise StructureError("only Q polynomials can be lifted")
        return Poly(t_order, [c.residue for c in self.coeffs])

    def t_layer(self, s: int) -> "Poly":
        """The coefficient of t^s, a polynomial over Q."""
        return Poly(1, [c.t_layer(s) for c in self.coeffs])

    def plus_t_layer(self, s: int, correction: "Poly") -> "Poly":
        """self + t^s * correction, with the correction over Q."""
        if correction.t_order != 1:
            raise StructureError("correction must be over Q")
        n = max(len(self.coeffs), len(correction.coeffs))
        out = []
        for k in range(n):
            cs = list(self.coeff(k).coeffs)
            ck = correction.coeff(k).residue
            if ck:
                cs[s] = cs[s] + ck
            out.append(RingElem(self.t_order, cs))
        return Poly(self.t_order, out)

    def __repr__(self):
        return f"Poly({self.t_order}, {self})"

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeff(k)
            if c.is_zero:
                continue
            cs = str(c)
            if "+" in cs or "*" in cs or "t" in cs:
                cs = f"({cs})"
            if k == 0:
                parts.append(cs)
            elif k == 1:
                parts.append("T" if cs == "1" else f"{cs}*T")
            else:
                parts.append(f"T^{k}" if cs == "1" else f"{cs}*T^{k}")
        return " + ".join(parts)


def poly_gcd_rational(g: Poly, h: Poly) -> Poly:
    """Monic gcd over Q (t_order 1 on both sides)."""
    if g.t_order != 1 or h.t_order != 1:
        raise StructureError("gcd is computed over Q only")
    a, b = g, h
    while not b.is_zero:
        a, b = b, a % b
    if a.is_zero:
        return a
    return a * a.leading.inv()


def bezout_coprime(g: Poly, h: Poly):
    """Exact cofactors (u, v) over Q with u*g + v*h = 1.

    Degrees are reduced so that deg u < deg h and deg v < deg g whenever
    those bounds are meaningful.  Raises NotCoprime when gcd(g, h) != 1.
    """
    if g.t_order != 1 or h.t_order != 1:
        raise StructureError("bezout_coprime works over Q only")
    if g.is_zero or h.is_zero:
        raise NotCoprime("zero polynomial is never coprime")
    # extended Euclid
    r0, r1 = g, h
    u0, u1 = Poly.one(1), Poly.zero(1)
    v0, v1 = Poly.zero(1), Poly.one(1)
    while not r1.is_zero:
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    if r0.degree != 0:
        raise NotCoprime(f"gcd has degree {r0.degree}")
    scale = r0.leading.inv()
    u, v = u0 * scale, v0 * scale
    # normalize degrees: u mod h, then v is forced by exactness
    if h.degree > 0 and u.degree >= h.degree:
        u = u % h
        num = Poly.one(1) - u * g
        v, rem = divmod(num, h)
        if not rem.is_zero:
            raise NotCoprime("internal Bezout normalization failed")
    return u, v


def _solve_residue_combination(d: Poly, gbar: Poly, ghat: Poly, u: Poly, v: Poly):
    """Given u*gbar + v*ghat = 1 over Q and deg d < deg gbar + deg ghat,
    return (a, b) with a*gbar + b*ghat = d, deg a < deg ghat, deg b < deg gbar.
    """
    b = (d * v) % gbar
    num = d - b * ghat
    a, rem = divmod(num, gbar)
    if not rem.is_zero:
        raise StructureError("inexact division in Bezout combination")
    return a, b


def hensel_lift_factors(p: Poly, residue_factors) -> list[Poly]:
    """Lift a coprime monic factorization of p mod t to an exact one in R[T].

    The residue factors must be monic, pairwise coprime over Q, and multiply
    to p mod t.  Lifting proceeds layer by layer in powers of t: at layer s
    the defect of the product is removed by the unique correction system
    solved through the precomputed Bezout identities, so after m-1 steps the
    product equals p exactly.
    """
    factors = list(residue_factors)
    m = p.t_order
    if not p.is_monic:
        raise StructureError("hensel_lift_factors needs a monic polynomial")
    for f in factors:
        if f.t_order != 1:
            raise StructureError("residue factors must be over Q")
        if not f.is_monic:
            raise StructureError("residue factors must be monic")
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            if poly_gcd_rational(factors[i], factors[j]).degree != 0:
                raise NotCoprime(
                    f"residue factors {i} and {j} share a nontrivial factor"
                )
    prod = Poly.one(1)
    for f in factors:
        prod = prod * f
    if prod != p.residue():
        raise BadResidueFactorization(
            "product of residue factors differs from p mod t"
        )
    if len(factors) == 1:
        # the unique monic lift with the right product is p itself
        return [p]

    # Bezout data for each factor against the product of the others
    hats = []
    bezouts = []
    for i, f in enumerate(factors):
        hat = Poly.one(1)
        for j, g in enumerate(factors):
            if j != i:
                hat = hat * g
        hats.append(hat)
        bezouts.append(bezout_coprime(f, hat))

    lifted = [f.lift(m) for f in factors]
    for s in range(1, m):
        prod_r = Poly.one(m)
        for g in lifted:
            prod_r = prod_r * g
        defect = p - prod_r
        layer = defect.t_layer(s)
        if layer.is_zero:
            continue
        for i, f in enumerate(factors):
            _u, v = bezouts[i]
            # (layer*v) mod f is the unique correction of degree < deg f
            # whose combination against the complementary products removes
            # the whole layer at once
            correction = (layer * v) % f
            lifted[i] = lifted[i].plus_t_layer(s, correction)
    prod_r = Poly.one(m)
    for g in lifted:
        prod_r = prod_r * g
    if prod_r != p:
        raise StructureError("Hensel lifting failed to reproduce p")
    return lifted


def bezout_lift(g: Poly, h: Poly):
    """Cofactors (U, V) over R with U*g + V*h = 1 for strictly coprime g, h.

    The residues of g and h must be coprime over Q; the identity is lifted
    through the t-layers exactly like the factorization itself.
    """
    if g.t_order != h.t_order:
        raise StructureError("mixed t_order in bezout_lift")
    m = g.t_order
    gbar, hbar = g.residue(), h.residue()
    u0, v0 = bezout_coprime(gbar, hbar)
    U, V = u0.lift(m), v0.lift(m)
    one = Poly.one(m)
    for s in range(1, m):
        defect = one - U * g - V * h
        layer = defect.t_layer(s)
        if layer.is_zero:
            continue
        a, b = _solve_residue_combination(layer, gbar, hbar, u0, v0)
        U = U.plus_t_layer(s, a)
        V = V.plus_t_layer(s, b)
    if U * g + V * h != one:
        raise StructureError("Bezout lift failed")
    return U, V


def _int_divisors(n: int) -> list[int]:
    """Positive divisors of |n| by trial division; n must be nonzero."""
    n = abs(n)
    fs = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            fs[d] = fs.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        fs[n] = fs.get(n, 0) + 1
    divs = [1]
    for prime, e in fs.items():
        divs = [a * prime**k for a in divs for k in range(e + 1)]
    return sorted(divs)


def factor_over_rationals(p: Poly) -> list[tuple[Fraction, int]]:
    """Split a monic Q polynomial into rational roots with multiplicities.

    Returns (root, multiplicity) pairs sorted by root.  If any irreducible
    factor of degree > 1 remains, the spectrum is not rational and
    UnsupportedSpectrum is raised.
    """
    if p.t_order != 1:
        raise StructureError("factor_over_rationals works over Q only")
    if p.is_zero or not p.is_monic:
        raise StructureError("factor_over_rationals needs a monic polynomial")
    roots: dict[Fraction, int] = {}
    work = p
    # zero roots come straight off the low end
    nzero = 0
    while work.degree >= 1 and work.coeff(0).is_zero:
        work = Poly(1, work.coeffs[1:])
        nzero += 1
    if nzero:
        roots[_ZERO] = nzero
    while work.degree >= 1:
        # rational root bound: clear denominators, leading coefficient D
        denom_lcm = 1
        for c in work.coeffs:
            denom_lcm = _lcm(denom_lcm, c.residue.denominator)
        const = work.coeff(0).residue * denom_lcm
        num_divs = _int_divisors(const.numerator)
        den_divs = _int_divisors(denom_lcm)
        found = None
        for a in num_divs:
            for b in den_divs:
                for sign in (1, -1):
                    cand = Fraction(sign * a, b)
                    if work.evaluate_rational(cand) == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            raise UnsupportedSpectrum(
                f"no rational root of {work}; spectrum leaves Q"
            )
        mult = 0
        linear = Poly.from_root(found, 1)
        while True:
            quo, rem = divmod(work, linear)
            if not rem.is_zero:
                break
            work = quo
            mult += 1
        roots[found] = roots.get(found, 0) + mult
    return sorted(roots.items())


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)
