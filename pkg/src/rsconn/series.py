"""Truncated Laurent series over Q[t]/(t^m) with the derivation x*d/dx.

Two precision regimes coexist.  An exact series is a Laurent polynomial:
every coefficient outside the stored range is zero.  A windowed series is
known on [lo, hi] only; coefficients below lo are zero, coefficients above
hi are unknown.  Every operation computes the honest output window and
raises PrecisionExhausted rather than inventing information.
"""

from __future__ import annotations

from fractions import Fraction

from .coeffring import RingElem, _as_fraction
from .errors import NotAUnit, PrecisionExhausted, StructureError

_INF = float("inf")


class LaurentSeries:
    """A Laurent series truncation with explicit window bookkeeping."""

    __slots__ = ("t_order", "lo", "coeffs", "exact")

    def __init__(self, t_order: int, lo: int, coeffs, exact: bool):
        cs = []
        for c in coeffs:
            if isinstance(c, RingElem):
                if c.t_order != t_order:
                    raise StructureError("coefficient has wrong t_order")
                cs.append(c)
            else:
                cs.append(RingElem.from_rational(_as_fraction(c), t_order))
        if not cs:
            cs = [RingElem.zero(t_order)]
        # leading zeros carry no information: below lo everything is zero
        while len(cs) > 1 and cs[0].is_zero:
            cs.pop(0)
            lo += 1
        if exact:
            while len(cs) > 1 and cs[-1].is_zero:
                cs.pop()
            if len(cs) == 1 and cs[0].is_zero:
                lo = 0
        object.__setattr__(self, "t_order", t_order)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, *_):
        raise AttributeError("LaurentSeries is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, t_order: int) -> "LaurentSeries":
        return cls(t_order, 0, (), exact=True)

    @classmethod
    def one(cls, t_order: int) -> "LaurentSeries":
        return cls.constant(RingElem.one(t_order))

    @classmethod
    def constant(cls, value: RingElem) -> "LaurentSeries":
        return cls(value.t_order, 0, (value,), exact=True)

    @classmethod
    def rational(cls, value, t_order: int) -> "LaurentSeries":
        return cls.constant(RingElem.from_rational(value, t_order))

    @classmethod
    def x_power(cls, t_order: int, k: int) -> "LaurentSeries":
        return cls(t_order, k, (RingElem.one(t_order),), exact=True)

    @classmethod
    def from_terms(cls, t_order: int, terms, exact: bool = True,
                   hi: int | None = None) -> "LaurentSeries":
        """Build from {exponent: coefficient}; omitted exponents are zero."""
        terms = dict(terms)
        if not terms:
            if exact:
                return cls.zero(t_order)
            if hi is None:
                raise StructureError("windowed series needs an explicit hi")
            return cls(t_order, hi, (), exact=False)
        lo = min(terms)
        top = max(terms)
        if hi is None:
            hi = top
        if hi < top:
            raise StructureError("hi below the highest given exponent")
        top = hi if not exact else top
        coeffs = []
        for k in range(lo, top + 1):
            v = terms.get(k, 0)
            coeffs.append(v if isinstance(v, RingElem)
                          else RingElem.from_rational(_as_fraction(v), t_order))
        return cls(t_order, lo, coeffs, exact)

    # -- window bookkeeping ------------------------------------------------

    @property
    def hi(self) -> int:
        """Highest stored exponent: the degree when exact, else the window."""
        return self.lo + len(self.coeffs) - 1

    @property
    def effective_hi(self):
        return _INF if self.exact else self.hi

    @property
    def is_known_zero(self) -> bool:
        """No nonzero coefficient in the known range."""
        return all(c.is_zero for c in self.coeffs)

    @property
    def is_zero(self) -> bool:
        """Exactly the zero element (requires exactness)."""
        return self.exact and self.is_known_zero

    def valuation(self) -> int | None:
        """Lowest exponent with a nonzero known coefficient, None if all
        known coefficients vanish."""
        for k, c in enumerate(self.coeffs):
            if not c.is_zero:
                return self.lo + k
        return None

    @property
    def has_pole(self) -> bool:
        v = self.valuation()
        return v is not None and v < 0

    def coeff(self, k: int) -> RingElem:
        if k < self.lo:
            return RingElem.zero(self.t_order)
        if k <= self.hi:
            return self.coeffs[k - self.lo]
        if self.exact:
            return RingElem.zero(self.t_order)
        raise PrecisionExhausted(
            f"coefficient of x^{k} lies beyond the window hi={self.hi}"
        )

    def _check(self, other: "LaurentSeries"):
        if self.t_order != other.t_order:
            raise StructureError(
                f"mixed t_order: {self.t_order} vs {other.t_order}"
            )

    def restrict_window(self, hi: int) -> "LaurentSeries":
        """Forget exactness and every coefficient above hi.

        Below lo everything is known to vanish, so a window ending under lo
        degenerates to a known-zero stub rather than an error.
        """
        if hi < self.lo:
            return LaurentSeries(self.t_order, hi, (), exact=False)
        coeffs = [self.coeff(k) if (self.exact or k <= self.hi)
                  else None for k in range(self.lo, hi + 1)]
        if any(c is None for c in coeffs):
            raise PrecisionExhausted(
                f"cannot widen a window ending at {self.hi} to {hi}"
            )
        return LaurentSeries(self.t_order, self.lo, coeffs, exact=False)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._check(other)
        exact = self.exact and other.exact
        lo = min(self.lo, other.lo)
        if exact:
            hi = max(self.hi, other.hi)
        else:
            hi = int(min(self.effective_hi, other.effective_hi))
        coeffs = [self.coeff(k) + other.coeff(k) for k in range(lo, hi + 1)]
        return LaurentSeries(self.t_order, lo, coeffs, exact)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LaurentSeries(
            self.t_order, self.lo, [-c for c in self.coeffs], self.exact
        )

    def __mul__(self, other):
        if isinstance(other, (RingElem, int, Fraction)) and not isinstance(
            other, bool
        ):
            return LaurentSeries(
                self.t_order,
                self.lo,
                [c * other for c in self.coeffs],
                self.exact,
            )
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._check(other)
        if self.is_zero or other.is_zero:
            return LaurentSeries.zero(self.t_order)
        exact = self.exact and other.exact
        lo = self.lo + other.lo
        if exact:
            hi = self.hi + other.hi
        else:
            hi_f = self.lo + other.effective_hi
            hi_g = other.lo + self.effective_hi
            hi = int(min(hi_f, hi_g))
            if hi < lo:
                raise PrecisionExhausted(
                    f"product window [{lo}, {hi}] is empty"
                )
        out = [RingElem.zero(self.t_order) for _ in range(hi - lo + 1)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero:
                continue
            ei = self.lo + i
            for j, b in enumerate(other.coeffs):
                if b.is_zero:
                    continue
                e = ei + other.lo + j
                if e > hi:
                    break
                out[e - lo] = out[e - lo] + a * b
        return LaurentSeries(self.t_order, lo, out, exact)

    __rmul__ = __mul__

    def theta(self) -> "LaurentSeries":
        """The logarithmic derivative action: coefficient n picks up a
        factor n.  Window and exactness are unchanged."""
        return LaurentSeries(
            self.t_order,
            self.lo,
            [c * (self.lo + k) for k, c in enumerate(self.coeffs)],
            self.exact,
        )

    def x_shift(self, k: int) -> "LaurentSeries":
        """Multiplication by x^k; the window shifts along."""
        return LaurentSeries(
            self.t_order, self.lo + k, self.coeffs, self.exact
        )

    def inverse(self, target_hi: int | None = None) -> "LaurentSeries":
        """Multiplicative inverse computed through x^target_hi.

        The lowest known coefficient must be a unit of the base ring.  A
        monomial inverts exactly; everything else yields a windowed result.
        """
        v = self.valuation()
        if v is None:
            raise NotAUnit("no unit lowest coefficient in the known window")
        lead = self.coeff(v)
        if not lead.is_unit:
            raise NotAUnit(
                f"lowest coefficient at x^{v} has zero residue"
            )
        if self.exact and all(
            c.is_zero for k, c in enumerate(self.coeffs) if self.lo + k != v
        ):
            return LaurentSeries(
                self.t_order, -v, (lead.inv(),), exact=True
            )
        if target_hi is None:
            raise StructureError(
                "inverting a non-monomial series needs a target window"
            )
        if self.exact:
            result_hi = target_hi
        else:
            result_hi = min(target_hi, self.hi - 2 * v)
        if result_hi < -v:
            raise PrecisionExhausted(
                f"inverse window [{-v}, {result_hi}] is empty"
            )
        n_terms = result_hi + v + 1
        lead_inv = lead.inv()
        # c[k] = coefficient of x^(v+k); h solves (sum c_k x^k) * h = 1
        h = [lead_inv]
        for n in range(1, n_terms):
            acc = RingElem.zero(self.t_order)
            for i in range(1, n + 1):
                ci = self.coeff(v + i) if (self.exact or v + i <= self.hi) \
                    else None
                if ci is None:
                    raise PrecisionExhausted("window shrank during inversion")
                if not ci.is_zero:
                    acc = acc + ci * h[n - i]
            h.append(-lead_inv * acc)
        return LaurentSeries(self.t_order, -v, h, exact=False)

    # -- comparisons ---------------------------------------------------------

    def eq_on_window(self, other: "LaurentSeries") -> bool:
        """Equality of all coefficients both sides know."""
        self._check(other)
        hi = min(self.effective_hi, other.effective_hi)
        lo = min(self.lo, other.lo)
        if hi == _INF:
            return self.lo == other.lo and self.coeffs == other.coeffs
        return all(
            self.coeff(k) == other.coeff(k) for k in range(lo, int(hi) + 1)
        )

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (
            self.t_order == other.t_order
            and self.exact == other.exact
            and self.lo == other.lo
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.t_order, self.lo, self.coeffs, self.exact))

    def __repr__(self):
        tag = "exact" if self.exact else f"hi={self.hi}"
        return f"LaurentSeries({self}, {tag})"

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            e = self.lo + k
            cs = str(c)
            if "+" in cs or "t" in cs:
                cs = f"({cs})"
            if e == 0:
                parts.append(cs)
            elif e == 1:
                parts.append("x" if cs == "1" else f"{cs}*x")
            else:
                parts.append(f"x^{e}" if cs == "1" else f"{cs}*x^{e}")
        body = " + ".join(parts) if parts else "0"
        return body if self.exact else f"{body} + O(x^{self.hi + 1})"


def series_arith(f: LaurentSeries, g: LaurentSeries, op: str) -> LaurentSeries:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise StructureError(f"unknown series operation {op!r}")


def series_invert(f: LaurentSeries, target_hi: int | None = None):
    return f.inverse(target_hi)


def theta(f: LaurentSeries) -> LaurentSeries:
    return f.theta()


def x_shift(f: LaurentSeries, k: int) -> LaurentSeries:
    return f.x_shift(k)
