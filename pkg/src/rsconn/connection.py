"""Connections in matrix form, the constant-matrix functors and gauges.

A connection is the operator theta + A(x) acting on column vectors of
series; everything here is a basis-level view of that operator.  Basis
changes act by A -> S^{-1} A S + S^{-1} theta(S), the one sign convention
used by every algorithm and test in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .coeffring import RingElem, factor_over_rationals, _as_fraction
from .errors import NotLogarithmic, StructureError
from .linalg import (
    RMatrix,
    SeriesMatrix,
    char_poly,
    invert_rmatrix,
    invert_series_matrix,
)
from .series import LaurentSeries

LOGARITHMIC = "logarithmic"
FORMAL = "formal"
ALGEBRAIC = "algebraic"
FLAVORS = (LOGARITHMIC, FORMAL, ALGEBRAIC)


class EndObject:
    """A free module of finite rank with an endomorphism, the constant
    companion of an Euler connection."""

    __slots__ = ("rank", "matrix")

    def __init__(self, matrix: RMatrix):
        if not matrix.is_square:
            raise StructureError("an endomorphism needs a square matrix")
        object.__setattr__(self, "rank", matrix.nrows)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, *_):
        raise AttributeError("EndObject is immutable")

    @property
    def t_order(self) -> int:
        return self.matrix.t_order

    def __eq__(self, other):
        if not isinstance(other, EndObject):
            return NotImplemented
        return self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"EndObject(rank={self.rank}, {self.matrix!r})"


class Connection:
    """The operator theta + A(x) on rank-n column vectors.

    flavor records the ambient ring of the matrix: "algebraic" for exact
    Laurent polynomials, "logarithmic" for pole-free matrices, "formal"
    for windowed matrices with poles allowed.
    """

    __slots__ = ("flavor", "matrix")

    def __init__(self, flavor: str, matrix: SeriesMatrix):
        if flavor not in FLAVORS:
            raise StructureError(f"unknown flavor {flavor!r}")
        if not matrix.is_square:
            raise StructureError("connection matrix must be square")
        if flavor == ALGEBRAIC and not matrix.exact:
            raise StructureError(
                "algebraic connections need exact Laurent polynomial entries"
            )
        if flavor == LOGARITHMIC and not matrix.is_logarithmic:
            raise NotLogarithmic(
                "logarithmic flavor with a pole in the matrix"
            )
        object.__setattr__(self, "flavor", flavor)
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, *_):
        raise AttributeError("Connection is immutable")

    @property
    def rank(self) -> int:
        return self.matrix.nrows

    @property
    def t_order(self) -> int:
        return self.matrix.t_order

    @property
    def x_window(self) -> int | None:
        """Shared window of the matrix; None when exact."""
        return self.matrix.window_hi

    @property
    def is_logarithmic(self) -> bool:
        """True when the matrix shows no pole, whatever the flavor."""
        return self.matrix.is_logarithmic

    def apply(self, vec: list[LaurentSeries]) -> list[LaurentSeries]:
        """The action theta(v) + A*v on a column vector of series."""
        image = self.matrix.apply(vec)
        return [v.theta() + w for v, w in zip(vec, image)]

    def __eq__(self, other):
        if not isinstance(other, Connection):
            return NotImplemented
        return self.flavor == other.flavor and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.flavor, self.matrix))

    def __repr__(self):
        return f"Connection({self.flavor}, {self.matrix!r})"


class Gauge:
    """An invertible basis change with a certified inverse.

    Both directions are stored; the constructor checks S * S_inv = I on the
    common window unless the factors are already certified.
    """

    __slots__ = ("S", "S_inv")

    def __init__(self, S: SeriesMatrix, S_inv: SeriesMatrix, check=True):
        if not S.is_square or (S.nrows, S.ncols) != (S_inv.nrows, S_inv.ncols):
            raise StructureError("gauge matrices must be square, same size")
        if S.t_order != S_inv.t_order:
            raise StructureError("mixed t_order in gauge")
        if check:
            eye = SeriesMatrix.identity(S.nrows, S.t_order)
            if not (S * S_inv).eq_on_window(eye) or not (
                S_inv * S
            ).eq_on_window(eye):
                raise StructureError("gauge inverse fails to verify")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "S_inv", S_inv)

    def __setattr__(self, *_):
        raise AttributeError("Gauge is immutable")

    @classmethod
    def identity(cls, n: int, t_order: int) -> "Gauge":
        eye = SeriesMatrix.identity(n, t_order)
        return cls(eye, eye, check=False)

    @classmethod
    def from_constant(cls, a: RMatrix) -> "Gauge":
        """Constant basis change; the inverse is exact."""
        return cls(
            SeriesMatrix.from_rmatrix(a),
            SeriesMatrix.from_rmatrix(invert_rmatrix(a)),
            check=False,
        )

    @classmethod
    def from_projector_shear(cls, e: RMatrix, direction: int) -> "Gauge":
        """x^direction on the image of an idempotent e, identity elsewhere.

        S = x^d e + (1 - e) has the exact inverse x^{-d} e + (1 - e).
        """
        if direction not in (1, -1):
            raise StructureError("unit shears move by +1 or -1 only")
        n, m = e.nrows, e.t_order
        comp = RMatrix.identity(n, m) - e
        x_pos = LaurentSeries.x_power(m, direction)
        x_neg = LaurentSeries.x_power(m, -direction)

        def build(x_part):
            rows = []
            for i in range(n):
                row = []
                for j in range(n):
                    row.append(
                        x_part * e.rows[i][j]
                        + LaurentSeries.constant(comp.rows[i][j])
                    )
                rows.append(row)
            return SeriesMatrix(m, rows)

        return cls(build(x_pos), build(x_neg), check=False)

    @classmethod
    def scalar_shear(cls, n: int, t_order: int, k: int) -> "Gauge":
        """The gauge x^k * I; shifts every exponent by k."""
        s = SeriesMatrix.identity(n, t_order) * LaurentSeries.x_power(
            t_order, k
        )
        s_inv = SeriesMatrix.identity(n, t_order) * LaurentSeries.x_power(
            t_order, -k
        )
        return cls(s, s_inv, check=False)

    @classmethod
    def from_series(cls, s: SeriesMatrix, target_hi: int) -> "Gauge":
        """Gauge from a series matrix with unit-residue constant term; the
        inverse is computed through x^target_hi."""
        return cls(s, invert_series_matrix(s, target_hi), check=False)

    def then(self, other: "Gauge") -> "Gauge":
        """Composite gauge: apply self first, then other."""
        return Gauge(
            self.S * other.S, other.S_inv * self.S_inv, check=False
        )

    @property
    def rank(self) -> int:
        return self.S.nrows

    @property
    def t_order(self) -> int:
        return self.S.t_order

    @property
    def x_window(self) -> int | None:
        hs = [h for h in (self.S.window_hi, self.S_inv.window_hi)
              if h is not None]
        return min(hs) if hs else None

    def __repr__(self):
        return f"Gauge({self.S!r})"


@dataclass(frozen=True)
class ExponentMultiset:
    """Eigenvalues of the reduced residue, with multiplicities."""

    pairs: tuple[tuple[Fraction, int], ...]

    @classmethod
    def from_pairs(cls, pairs) -> "ExponentMultiset":
        merged: dict[Fraction, int] = {}
        for rho, mu in pairs:
            rho = _as_fraction(rho)
            merged[rho] = merged.get(rho, 0) + mu
        return cls(tuple(sorted(merged.items())))

    @property
    def total(self) -> int:
        return sum(mu for _, mu in self.pairs)

    def values(self) -> list[Fraction]:
        out = []
        for rho, mu in self.pairs:
            out.extend([rho] * mu)
        return out

    def reduced_mod_z(self) -> "ExponentMultiset":
        return ExponentMultiset.from_pairs(
            (rho - floor(rho), mu) for rho, mu in self.pairs
        )

    def shifted(self, k: int) -> "ExponentMultiset":
        return ExponentMultiset.from_pairs(
            (rho + k, mu) for rho, mu in self.pairs
        )

    def within(self, lower=0, upper=1) -> bool:
        return all(lower <= rho < upper for rho, _ in self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __str__(self):
        return "{" + ", ".join(
            f"{rho}" + (f" (x{mu})" if mu > 1 else "")
            for rho, mu in self.pairs
        ) + "}"


def eul_formal(obj: EndObject) -> Connection:
    """The logarithmic connection with constant matrix obj.matrix."""
    return Connection(LOGARITHMIC, SeriesMatrix.from_rmatrix(obj.matrix))


def eul_algebraic(obj: EndObject) -> Connection:
    """The same constant matrix read over the Laurent polynomial ring."""
    return Connection(ALGEBRAIC, SeriesMatrix.from_rmatrix(obj.matrix))


def residue(conn: Connection) -> RMatrix:
    """The constant term A(0) of a pole-free connection matrix."""
    if not conn.matrix.is_logarithmic:
        raise NotLogarithmic("residue of a connection with a pole")
    return conn.matrix.coefficient_matrix(0)


def exponents(conn: Connection) -> ExponentMultiset:
    """Eigenvalues of the residue modulo the maximal ideal."""
    res = residue(conn)
    spectrum = factor_over_rationals(char_poly(res).residue())
    return ExponentMultiset.from_pairs(spectrum)


def gauge_apply(conn: Connection, g: Gauge) -> Connection:
    """Change basis: A -> S^{-1} A S + S^{-1} theta(S).

    The flavor of the result is recomputed from the actual matrix: gauges
    may enter or leave the logarithmic subcategory, and only exact gauges
    keep the algebraic reading.
    """
    if g.rank != conn.rank:
        raise StructureError("gauge rank differs from connection rank")
    if g.t_order != conn.t_order:
        raise StructureError("mixed t_order")
    new_matrix = g.S_inv * (conn.matrix * g.S + g.S.theta())
    if conn.flavor == ALGEBRAIC and new_matrix.exact:
        flavor = ALGEBRAIC
    elif new_matrix.is_logarithmic:
        flavor = LOGARITHMIC
    else:
        flavor = FORMAL
    return Connection(flavor, new_matrix)


def restrict(conn: Connection, n_window: int) -> Connection:
    """Re-read an algebraic connection in the windowed formal regime."""
    if conn.flavor != ALGEBRAIC:
        raise StructureError("restrict expects an algebraic connection")
    return Connection(FORMAL, conn.matrix.restrict_window(n_window))


def leibniz_check(
    conn: Connection, f: LaurentSeries, vec: list[LaurentSeries]
) -> bool:
    """Verify nabla(f*v) = theta(f)*v + f*nabla(v) on the common window."""
    if len(vec) != conn.rank:
        raise StructureError("vector length differs from the rank")
    lhs = conn.apply([f * v for v in vec])
    nabla_v = conn.apply(vec)
    tf = f.theta()
    rhs = [tf * v + f * w for v, w in zip(vec, nabla_v)]
    return all(a.eq_on_window(b) for a, b in zip(lhs, rhs))
