"""Exact linear algebra over Q, over Q[t]/(t^m), and over series rings.

Solvers over the truncated ring work residue-first: invert the system over
Q, then remove the t-layers one by one.  The block decomposition of a
matrix with rational residue spectrum is obtained from Hensel-lifted
factors of its characteristic polynomial; projectors are polynomials in
the matrix, so they commute with it by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeffring import (
    Poly,
    RingElem,
    _as_fraction,
    bezout_lift,
    factor_over_rationals,
    hensel_lift_factors,
)
from .errors import (
    ResonantExponents,
    SingularResidue,
    StructureError,
)
from .series import LaurentSeries

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# rational matrices as plain nested lists
# ---------------------------------------------------------------------------

def _rref(rows):
    """Reduced row echelon form; returns (rows, pivot_columns)."""
    mat = [list(r) for r in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, nrows):
            if mat[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        inv = 1 / mat[r][c]
        mat[r] = [v * inv for v in mat[r]]
        for i in range(nrows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                row_r = mat[r]
                mat[i] = [a - f * b for a, b in zip(mat[i], row_r)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return mat, pivots


def nullspace_rational(rows) -> list[list[Fraction]]:
    """Canonical kernel basis of a matrix over Q (RREF free-variable form)."""
    rows = [[_as_fraction(v) for v in r] for r in rows]
    if not rows:
        return []
    ncols = len(rows[0])
    rref, pivots = _rref(rows)
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for f in free:
        vec = [_ZERO] * ncols
        vec[f] = _ONE
        for r, p in enumerate(pivots):
            vec[p] = -rref[r][f]
        basis.append(vec)
    return basis


def rank_rational(rows) -> int:
    if not rows:
        return 0
    return len(_rref([[_as_fraction(v) for v in r] for r in rows])[1])


def invert_rational(rows) -> list[list[Fraction]]:
    """Inverse over Q; raises SingularResidue when the matrix is singular."""
    n = len(rows)
    aug = [
        [_as_fraction(v) for v in row]
        + [(_ONE if i == j else _ZERO) for j in range(n)]
        for i, row in enumerate(rows)
    ]
    rref, pivots = _rref(aug)
    if pivots != list(range(n)):
        raise SingularResidue("matrix is singular over Q")
    return [row[n:] for row in rref]


# ---------------------------------------------------------------------------
# matrices over the truncated ring
# ---------------------------------------------------------------------------

class RMatrix:
    """A matrix with entries in Q[t]/(t^m)."""

    __slots__ = ("t_order", "nrows", "ncols", "rows")

    def __init__(self, t_order: int, rows):
        mat = []
        width = None
        for row in rows:
            entries = []
            for v in row:
                if isinstance(v, RingElem):
                    if v.t_order != t_order:
                        raise StructureError("entry has wrong t_order")
                    entries.append(v)
                else:
                    entries.append(
                        RingElem.from_rational(_as_fraction(v), t_order)
                    )
            if width is None:
                width = len(entries)
            elif len(entries) != width:
                raise StructureError("ragged matrix")
            mat.append(tuple(entries))
        if not mat or width == 0:
            raise StructureError("empty matrix")
        object.__setattr__(self, "t_order", t_order)
        object.__setattr__(self, "nrows", len(mat))
        object.__setattr__(self, "ncols", width)
        object.__setattr__(self, "rows", tuple(mat))

    def __setattr__(self, *_):
        raise AttributeError("RMatrix is immutable")

    @classmethod
    def identity(cls, n: int, t_order: int) -> "RMatrix":
        one, zero = RingElem.one(t_order), RingElem.zero(t_order)
        return cls(
            t_order,
            [[one if i == j else zero for j in range(n)] for i in range(n)],
        )

    @classmethod
    def zero(cls, nrows: int, ncols: int, t_order: int) -> "RMatrix":
        z = RingElem.zero(t_order)
        return cls(t_order, [[z] * ncols for _ in range(nrows)])

    @classmethod
    def diagonal(cls, values, t_order: int) -> "RMatrix":
        vals = [
            v if isinstance(v, RingElem)
            else RingElem.from_rational(_as_fraction(v), t_order)
            for v in values
        ]
        z = RingElem.zero(t_order)
        n = len(vals)
        return cls(
            t_order,
            [[vals[i] if i == j else z for j in range(n)] for i in range(n)],
        )

    @classmethod
    def from_rational_rows(cls, rows, t_order: int) -> "RMatrix":
        return cls(t_order, rows)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    @property
    def is_zero(self) -> bool:
        return all(v.is_zero for row in self.rows for v in row)

    def entry(self, i: int, j: int) -> RingElem:
        return self.rows[i][j]

    def _check(self, other: "RMatrix"):
        if self.t_order != other.t_order:
            raise StructureError("mixed t_order")

    def __add__(self, other: "RMatrix") -> "RMatrix":
        self._check(other)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise StructureError("shape mismatch in addition")
        return RMatrix(
            self.t_order,
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.rows, other.rows)
            ],
        )

    def __sub__(self, other: "RMatrix") -> "RMatrix":
        return self + (-other)

    def __neg__(self) -> "RMatrix":
        return RMatrix(self.t_order, [[-v for v in row] for row in self.rows])

    def __mul__(self, other):
        if isinstance(other, RMatrix):
            self._check(other)
            if self.ncols != other.nrows:
                raise StructureError("shape mismatch in product")
            cols = list(zip(*other.rows))
            out = []
            for row in self.rows:
                out_row = []
                for col in cols:
                    acc = RingElem.zero(self.t_order)
                    for a, b in zip(row, col):
                        if not (a.is_zero or b.is_zero):
                            acc = acc + a * b
                    out_row.append(acc)
                out.append(out_row)
            return RMatrix(self.t_order, out)
        if isinstance(other, (RingElem, int, Fraction)) and not isinstance(
            other, bool
        ):
            return RMatrix(
                self.t_order, [[v * other for v in row] for row in self.rows]
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (RingElem, int, Fraction)) and not isinstance(
            other, bool
        ):
            return self * other
        return NotImplemented

    def trace(self) -> RingElem:
        if not self.is_square:
            raise StructureError("trace of a non-square matrix")
        acc = RingElem.zero(self.t_order)
        for i in range(self.nrows):
            acc = acc + self.rows[i][i]
        return acc

    def transpose(self) -> "RMatrix":
        return RMatrix(self.t_order, list(zip(*self.rows)))

    def residue(self) -> list[list[Fraction]]:
        """Reduction modulo the maximal ideal, a plain Q matrix."""
        return [[v.residue for v in row] for row in self.rows]

    def t_layer(self, s: int) -> list[list[Fraction]]:
        return [[v.t_layer(s) for v in row] for row in self.rows]

    def apply(self, vec: list[RingElem]) -> list[RingElem]:
        if len(vec) != self.ncols:
            raise StructureError("vector length mismatch")
        out = []
        for row in self.rows:
            acc = RingElem.zero(self.t_order)
            for a, v in zip(row, vec):
                if not (a.is_zero or v.is_zero):
                    acc = acc + a * v
            out.append(acc)
        return out

    def __eq__(self, other):
        if not isinstance(other, RMatrix):
            return NotImplemented
        return (
            self.t_order == other.t_order
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.t_order, self.rows))

    def __repr__(self):
        body = "; ".join(
            ", ".join(str(v) for v in row) for row in self.rows
        )
        return f"RMatrix[{body}]"


def apply_rational_matrix(qmat, vec: list[RingElem], t_order: int):
    """Apply a Q matrix to a vector over R; Q acts R-linearly."""
    out = []
    for row in qmat:
        acc = RingElem.zero(t_order)
        for q, v in zip(row, vec):
            if q and not v.is_zero:
                acc = acc + v * q
        out.append(acc)
    return out


def char_poly(a: RMatrix) -> Poly:
    """Monic characteristic polynomial via the trace recursion.

    Valid over any Q-algebra since only divisions by integers occur.
    """
    if not a.is_square:
        raise StructureError("characteristic polynomial of a square matrix")
    n = a.nrows
    m = a.t_order
    coeffs = [RingElem.zero(m) for _ in range(n + 1)]
    coeffs[n] = RingElem.one(m)
    cur = a
    for k in range(1, n + 1):
        if k > 1:
            shift = coeffs[n - k + 1]
            bumped = RMatrix(
                m,
                [
                    [
                        cur.rows[i][j] + shift if i == j else cur.rows[i][j]
                        for j in range(n)
                    ]
                    for i in range(n)
                ],
            )
            cur = a * bumped
        coeffs[n - k] = cur.trace() * Fraction(-1, k)
    return Poly(m, coeffs)


def poly_eval_matrix(p: Poly, a: RMatrix) -> RMatrix:
    """Horner evaluation of a polynomial at a square matrix."""
    if p.t_order != a.t_order:
        raise StructureError("mixed t_order")
    n = a.nrows
    acc = RMatrix.zero(n, n, a.t_order)
    eye = RMatrix.identity(n, a.t_order)
    for c in reversed(p.coeffs):
        acc = acc * a + eye * c
    return acc


def solve_linear_over_ring(mat: RMatrix, rhs: list[RingElem]):
    """Solve mat * x = rhs exactly when the residue of mat is invertible.

    The residue system is solved over Q once; each further pass kills one
    more t-layer of the defect, so t_order passes give the exact answer.
    """
    if not mat.is_square:
        raise StructureError("square system expected")
    m = mat.t_order
    inv0 = invert_rational(mat.residue())  # SingularResidue propagates
    x = apply_rational_matrix(inv0, rhs, m)
    for _ in range(m - 1):
        defect = [b - v for b, v in zip(rhs, mat.apply(x))]
        if all(v.is_zero for v in defect):
            break
        corr = apply_rational_matrix(inv0, defect, m)
        x = [a + c for a, c in zip(x, corr)]
    return x


def invert_rmatrix(a: RMatrix) -> "RMatrix":
    """Exact inverse of a matrix whose residue is invertible over Q."""
    if not a.is_square:
        raise StructureError("inverse of a non-square matrix")
    m, n = a.t_order, a.nrows
    inv0 = invert_rational(a.residue())
    x = RMatrix(m, inv0)
    eye = RMatrix.identity(n, m)
    for _ in range(m - 1):
        defect = eye - a * x
        if defect.is_zero:
            break
        corr_rows = []
        for j in range(n):
            col = [defect.rows[i][j] for i in range(n)]
            corr_rows.append(apply_rational_matrix(inv0, col, m))
        corr = RMatrix(m, list(zip(*corr_rows)))
        x = x + corr
    return x


class SylvesterOperator:
    """The operator X -> lam*X + A0*X - X*A0 for a fixed A0, solvable for
    any lam whose residue avoids the eigenvalue differences of A0."""

    def __init__(self, a0: RMatrix):
        if not a0.is_square:
            raise StructureError("Sylvester operator needs a square matrix")
        self.a0 = a0
        self.n = a0.nrows
        self.t_order = a0.t_order
        n, m = self.n, self.t_order
        zero = RingElem.zero(m)
        big = [[zero] * (n * n) for _ in range(n * n)]
        for i in range(n):
            for j in range(n):
                row = i * n + j
                for k in range(n):
                    big[row][k * n + j] = big[row][k * n + j] + a0.rows[i][k]
                for l in range(n):
                    big[row][i * n + l] = big[row][i * n + l] - a0.rows[l][j]
        self._ad = big

    def matrix_for(self, lam) -> RMatrix:
        lam_elem = (
            lam
            if isinstance(lam, RingElem)
            else RingElem.from_rational(_as_fraction(lam), self.t_order)
        )
        rows = [list(r) for r in self._ad]
        for d in range(self.n * self.n):
            rows[d][d] = rows[d][d] + lam_elem
        return RMatrix(self.t_order, rows)

    def solve(self, lam, c: RMatrix) -> RMatrix:
        if (c.nrows, c.ncols) != (self.n, self.n):
            raise StructureError("right hand side has wrong shape")
        rhs = [c.rows[i][j] for i in range(self.n) for j in range(self.n)]
        try:
            flat = solve_linear_over_ring(self.matrix_for(lam), rhs)
        except SingularResidue as exc:
            raise ResonantExponents(
                f"lam = {lam} resonates with an eigenvalue difference"
            ) from exc
        return RMatrix(
            self.t_order,
            [flat[i * self.n : (i + 1) * self.n] for i in range(self.n)],
        )


def sylvester_solve(a0: RMatrix, lam, c: RMatrix) -> RMatrix:
    """Solve lam*X + A0*X - X*A0 = C exactly over the truncated ring."""
    return SylvesterOperator(a0).solve(lam, c)


@dataclass(frozen=True)
class JordanBlockData:
    """One generalized eigenblock: eigenvalue, residue multiplicity and the
    idempotent projecting onto the block."""

    eigenvalue: Fraction
    multiplicity: int
    projector: RMatrix


def jordan_decomposition_over_R(a: RMatrix) -> list[JordanBlockData]:
    """Split a matrix over Q[t]/(t^m) along its residue spectrum.

    The characteristic polynomial factors over Q modulo t; the factorization
    Hensel-lifts to strictly coprime factors over the ring, and the block
    projectors are the lifted Bezout idempotents evaluated at the matrix.
    Blocks are returned sorted by eigenvalue.
    """
    if not a.is_square:
        raise StructureError("decomposition of a non-square matrix")
    m, n = a.t_order, a.nrows
    p = char_poly(a)
    roots = factor_over_rationals(p.residue())
    if len(roots) == 1:
        rho, mu = roots[0]
        return [JordanBlockData(rho, mu, RMatrix.identity(n, m))]
    residue_factors = [
        Poly.from_root(rho, 1) ** mu for rho, mu in roots
    ]
    lifted = hensel_lift_factors(p, residue_factors)
    blocks = []
    for i, (rho, mu) in enumerate(roots):
        hat = Poly.one(m)
        for j, g in enumerate(lifted):
            if j != i:
                hat = hat * g
        _u, v = bezout_lift(lifted[i], hat)
        projector = poly_eval_matrix(v * hat, a)
        blocks.append(JordanBlockData(rho, mu, projector))
    return blocks


# ---------------------------------------------------------------------------
# matrices of Laurent series
# ---------------------------------------------------------------------------

class SeriesMatrix:
    """A matrix of Laurent series sharing one window regime.

    Either every entry is exact, or all entries are truncations sharing the
    matrix window; unification happens after every operation.
    """

    __slots__ = ("t_order", "nrows", "ncols", "rows", "exact")

    def __init__(self, t_order: int, rows):
        mat = []
        width = None
        for row in rows:
            entries = []
            for v in row:
                if not isinstance(v, LaurentSeries):
                    raise StructureError("SeriesMatrix entries must be series")
                if v.t_order != t_order:
                    raise StructureError("entry has wrong t_order")
                entries.append(v)
            if width is None:
                width = len(entries)
            elif len(entries) != width:
                raise StructureError("ragged matrix")
            mat.append(entries)
        if not mat or width == 0:
            raise StructureError("empty matrix")
        exact = all(v.exact for row in mat for v in row)
        if not exact:
            window = min(
                v.hi for row in mat for v in row if not v.exact
            )
            mat = [
                [
                    v if (not v.exact and v.hi == window)
                    else v.restrict_window(window)
                    for v in row
                ]
                for row in mat
            ]
        object.__setattr__(self, "t_order", t_order)
        object.__setattr__(self, "nrows", len(mat))
        object.__setattr__(self, "ncols", width)
        object.__setattr__(self, "rows", tuple(tuple(r) for r in mat))
        object.__setattr__(self, "exact", exact)

    def __setattr__(self, *_):
        raise AttributeError("SeriesMatrix is immutable")

    @classmethod
    def identity(cls, n: int, t_order: int) -> "SeriesMatrix":
        one = LaurentSeries.one(t_order)
        zero = LaurentSeries.zero(t_order)
        return cls(
            t_order,
            [[one if i == j else zero for j in range(n)] for i in range(n)],
        )

    @classmethod
    def zero(cls, nrows: int, ncols: int, t_order: int) -> "SeriesMatrix":
        z = LaurentSeries.zero(t_order)
        return cls(t_order, [[z] * ncols for _ in range(nrows)])

    @classmethod
    def from_rmatrix(cls, a: RMatrix) -> "SeriesMatrix":
        return cls(
            a.t_order,
            [[LaurentSeries.constant(v) for v in row] for row in a.rows],
        )

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    @property
    def window_hi(self) -> int | None:
        """Shared window of a truncated matrix, None when exact."""
        if self.exact:
            return None
        return min(v.hi for row in self.rows for v in row if not v.exact)

    @property
    def is_logarithmic(self) -> bool:
        """No known pole in any entry."""
        return not any(v.has_pole for row in self.rows for v in row)

    def min_valuation(self) -> int | None:
        vals = [
            v.valuation()
            for row in self.rows
            for v in row
            if v.valuation() is not None
        ]
        return min(vals) if vals else None

    def entry(self, i: int, j: int) -> LaurentSeries:
        return self.rows[i][j]

    def _check(self, other: "SeriesMatrix"):
        if self.t_order != other.t_order:
            raise StructureError("mixed t_order")

    def __add__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        self._check(other)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise StructureError("shape mismatch in addition")
        return SeriesMatrix(
            self.t_order,
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.rows, other.rows)
            ],
        )

    def __sub__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        return self + (-other)

    def __neg__(self) -> "SeriesMatrix":
        return SeriesMatrix(
            self.t_order, [[-v for v in row] for row in self.rows]
        )

    def __mul__(self, other):
        if isinstance(other, SeriesMatrix):
            self._check(other)
            if self.ncols != other.nrows:
                raise StructureError("shape mismatch in product")
            cols = list(zip(*other.rows))
            out = []
            for row in self.rows:
                out_row = []
                for col in cols:
                    acc = None
                    for a, b in zip(row, col):
                        term = a * b
                        acc = term if acc is None else acc + term
                    out_row.append(acc)
                out.append(out_row)
            return SeriesMatrix(self.t_order, out)
        if isinstance(
            other, (LaurentSeries, RingElem, int, Fraction)
        ) and not isinstance(other, bool):
            return SeriesMatrix(
                self.t_order, [[v * other for v in row] for row in self.rows]
            )
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(
            other, (LaurentSeries, RingElem, int, Fraction)
        ) and not isinstance(other, bool):
            return self * other
        return NotImplemented

    def theta(self) -> "SeriesMatrix":
        return SeriesMatrix(
            self.t_order, [[v.theta() for v in row] for row in self.rows]
        )

    def coefficient_matrix(self, k: int) -> RMatrix:
        """The x^k coefficient as a matrix over the base ring."""
        return RMatrix(
            self.t_order,
            [[v.coeff(k) for v in row] for row in self.rows],
        )

    def apply(self, vec: list[LaurentSeries]) -> list[LaurentSeries]:
        if len(vec) != self.ncols:
            raise StructureError("vector length mismatch")
        out = []
        for row in self.rows:
            acc = None
            for a, v in zip(row, vec):
                term = a * v
                acc = term if acc is None else acc + term
            out.append(acc)
        return out

    def restrict_window(self, hi: int) -> "SeriesMatrix":
        return SeriesMatrix(
            self.t_order,
            [[v.restrict_window(hi) for v in row] for row in self.rows],
        )

    def eq_on_window(self, other: "SeriesMatrix") -> bool:
        self._check(other)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            return False
        return all(
            a.eq_on_window(b)
            for r1, r2 in zip(self.rows, other.rows)
            for a, b in zip(r1, r2)
        )

    def is_known_zero(self) -> bool:
        return all(v.is_known_zero for row in self.rows for v in row)

    def det(self) -> LaurentSeries:
        """Determinant by cofactor expansion; meant for small ranks."""
        if not self.is_square:
            raise StructureError("determinant of a non-square matrix")
        return _det(self.rows, self.t_order)

    def __eq__(self, other):
        if not isinstance(other, SeriesMatrix):
            return NotImplemented
        return self.t_order == other.t_order and self.rows == other.rows

    def __hash__(self):
        return hash((self.t_order, self.rows))

    def __repr__(self):
        body = "; ".join(
            ", ".join(str(v) for v in row) for row in self.rows
        )
        return f"SeriesMatrix[{body}]"


def _det(rows, t_order):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    acc = None
    for j in range(n):
        minor = [
            [row[k] for k in range(n) if k != j] for row in rows[1:]
        ]
        term = rows[0][j] * _det(minor, t_order)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def adjugate(mat: SeriesMatrix) -> SeriesMatrix:
    """Adjugate by cofactors: adj(M) * M = det(M) * I."""
    if not mat.is_square:
        raise StructureError("adjugate of a non-square matrix")
    n = mat.nrows
    if n == 1:
        return SeriesMatrix(
            mat.t_order, [[LaurentSeries.one(mat.t_order)]]
        )
    rows = mat.rows
    cof = []
    for i in range(n):
        cof_row = []
        for j in range(n):
            minor = [
                [rows[r][c] for c in range(n) if c != j]
                for r in range(n)
                if r != i
            ]
            term = _det(minor, mat.t_order)
            if (i + j) % 2:
                term = -term
            cof_row.append(term)
        cof.append(cof_row)
    # adjugate is the transposed cofactor matrix
    return SeriesMatrix(
        mat.t_order, [list(col) for col in zip(*cof)]
    )


def invert_series_matrix(s: SeriesMatrix, target_hi: int) -> SeriesMatrix:
    """Inverse of a series matrix whose x^0 coefficient is invertible over
    the base ring, computed through x^target_hi."""
    if not s.is_square:
        raise StructureError("inverse of a non-square matrix")
    if s.min_valuation() is not None and s.min_valuation() < 0:
        raise StructureError(
            "series-matrix inversion expects nonnegative valuations"
        )
    n, m = s.nrows, s.t_order
    s0 = s.coefficient_matrix(0)
    t0 = invert_rmatrix(s0)  # SingularResidue propagates
    limit = target_hi
    if not s.exact:
        limit = min(limit, s.window_hi)
    coeffs = {0: t0}
    s_coeffs = {}
    for k in range(1, limit + 1):
        s_coeffs[k] = s.coefficient_matrix(k)
    for k in range(1, limit + 1):
        acc = None
        for i in range(1, k + 1):
            si = s_coeffs[i]
            if si.is_zero:
                continue
            term = si * coeffs[k - i]
            acc = term if acc is None else acc + term
        if acc is None:
            coeffs[k] = RMatrix.zero(n, n, m)
        else:
            coeffs[k] = (t0 * acc) * Fraction(-1)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = {
                k: coeffs[k].rows[i][j]
                for k in range(limit + 1)
                if not coeffs[k].rows[i][j].is_zero
            }
            row.append(
                LaurentSeries.from_terms(m, terms, exact=False, hi=limit)
            )
        rows.append(row)
    return SeriesMatrix(m, rows)
