"""Constructive normal-form machinery for regular-singular connections.

The pipeline: unit shears move one residue eigenvalue by one integer while
staying pole free, shear normalization drives every exponent into [0, 1),
and the Euler-form recursion conjugates a normalized connection onto its
constant residue matrix.  Composing the certificates exhibits every such
connection, up to gauge, as the restriction of a constant-matrix
connection on the Laurent polynomial ring.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .coeffring import RingElem, _as_fraction, char_poly_spectrum
from .connection import (
    Connection,
    EndObject,
    ExponentMultiset,
    FORMAL,
    Gauge,
    LOGARITHMIC,
    eul_algebraic,
    eul_formal,
    exponents,
    gauge_apply,
    residue,
)
from .errors import (
    NotLogarithmic,
    NotRecognized,
    PrecisionExhausted,
    ShearBrokeLogarithmicity,
    StructureError,
    UnsupportedBase,
)
from .linalg import (
    RMatrix,
    SeriesMatrix,
    SylvesterOperator,
    adjugate,
    invert_series_matrix,
    jordan_decomposition_over_R,
    nullspace_rational,
)
from .series import LaurentSeries


@dataclass(frozen=True)
class NormalizationWindow:
    """The half-open interval [0, 1) of rational exponent representatives.

    Every rational class modulo Z has exactly one representative here, and
    0 belongs to the window, which is what makes constant morphisms the
    only window-internal ones.
    """

    def contains(self, rho) -> bool:
        rho = _as_fraction(rho)
        return 0 <= rho < 1

    def integer_shift(self, rho) -> int:
        """The k with rho + k inside the window."""
        return -floor(_as_fraction(rho))


TAU = NormalizationWindow()


# ---------------------------------------------------------------------------
# shearing
# ---------------------------------------------------------------------------

def unit_shear(conn: Connection, rho, direction: int):
    """Shift the exponent rho by +-1 with the gauge x^d e + (1 - e).

    e is the block projector of the residue at rho; commutation of e with
    the residue is exactly what keeps the result pole free.  Returns the
    sheared connection and the gauge used.
    """
    rho = _as_fraction(rho)
    if direction not in (1, -1):
        raise StructureError("unit shears move by +1 or -1 only")
    res = residue(conn)
    blocks = jordan_decomposition_over_R(res)
    projector = None
    for blk in blocks:
        if blk.eigenvalue == rho:
            projector = blk.projector
            break
    if projector is None:
        raise StructureError(f"{rho} is not an exponent of the connection")
    gauge = Gauge.from_projector_shear(projector, direction)
    out = gauge_apply(conn, gauge)
    if not out.matrix.is_logarithmic:
        raise ShearBrokeLogarithmicity(
            "unit shear produced a pole; the projector cannot have "
            "commuted with the residue"
        )
    return out, gauge


@dataclass(frozen=True)
class ShearStep:
    exponent: Fraction
    direction: int
    gauge: Gauge


@dataclass(frozen=True)
class NormalizeResult:
    connection: Connection
    gauge: Gauge
    steps: tuple[ShearStep, ...]

    def __iter__(self):
        return iter((self.connection, self.gauge))


def shear_normalize(conn: Connection) -> NormalizeResult:
    """Drive all exponents into [0, 1) by repeated unit shears.

    The exponent needing the smallest total shift goes first, ties broken
    by eigenvalue; the schedule is deterministic and finishes after the sum
    of all required shifts.  The composed gauge is an exact Laurent
    polynomial matrix.
    """
    if not conn.matrix.is_logarithmic:
        raise NotLogarithmic("shear normalization needs a pole-free matrix")
    current = conn
    total = Gauge.identity(conn.rank, conn.t_order)
    steps: list[ShearStep] = []
    while True:
        exps = exponents(current)
        outside = [
            (rho, TAU.integer_shift(rho))
            for rho, _mu in exps
            if not TAU.contains(rho)
        ]
        if not outside:
            break
        rho, shift = min(outside, key=lambda p: (abs(p[1]), p[0]))
        direction = 1 if shift > 0 else -1
        current, gauge = unit_shear(current, rho, direction)
        total = total.then(gauge)
        steps.append(ShearStep(rho, direction, gauge))
    if not steps:
        return NormalizeResult(conn, total, ())
    return NormalizeResult(current, total, tuple(steps))


# ---------------------------------------------------------------------------
# Euler form
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EulerFormResult:
    """A constant model A0 with the certifying gauge P.

    P has constant term I and theta(P) + A*P - P*A0 vanishes through
    x^certified_to.
    """

    euler: EndObject
    gauge: Gauge
    certified_to: int

    def __iter__(self):
        return iter((self.euler, self.gauge))


def euler_form(conn: Connection, n_window: int) -> EulerFormResult:
    """Conjugate a pole-free connection onto its constant residue matrix.

    Order by order, j*P_j + A0*P_j - P_j*A0 = -(A_1 P_{j-1} + ... + A_j P_0)
    is solved for P_j; with exponents inside [0, 1) the left side is
    invertible for every j >= 1, and resonance raises otherwise.
    """
    if not conn.matrix.is_logarithmic:
        raise NotLogarithmic("Euler form needs a pole-free matrix")
    if n_window < 0:
        raise StructureError("negative window")
    window = conn.x_window
    if window is not None and window < n_window:
        raise PrecisionExhausted(
            f"matrix known to x^{window} cannot certify x^{n_window}"
        )
    n, m = conn.rank, conn.t_order
    a0 = conn.matrix.coefficient_matrix(0)
    top = n_window
    if conn.matrix.exact:
        top = min(
            n_window,
            max(v.hi for row in conn.matrix.rows for v in row),
        )
    a_coeffs = {}
    for k in range(1, top + 1):
        ak = conn.matrix.coefficient_matrix(k)
        if not ak.is_zero:
            a_coeffs[k] = ak
    operator = SylvesterOperator(a0)
    p_coeffs = {0: RMatrix.identity(n, m)}
    for j in range(1, n_window + 1):
        acc = None
        for i, ai in a_coeffs.items():
            if i > j:
                continue
            term = ai * p_coeffs[j - i]
            if term.is_zero:
                continue
            acc = term if acc is None else acc + term
        if acc is None:
            p_coeffs[j] = RMatrix.zero(n, n, m)
        else:
            p_coeffs[j] = operator.solve(j, -acc)
    rows = []
    for i in range(n):
        row = []
        for k in range(n):
            terms = {
                j: p_coeffs[j].rows[i][k]
                for j in range(n_window + 1)
                if not p_coeffs[j].rows[i][k].is_zero
            }
            row.append(
                LaurentSeries.from_terms(m, terms, exact=False, hi=n_window)
            )
        rows.append(row)
    p_matrix = SeriesMatrix(m, rows)
    gauge = Gauge(
        p_matrix, invert_series_matrix(p_matrix, n_window), check=False
    )
    return EulerFormResult(EndObject(a0), gauge, n_window)


# ---------------------------------------------------------------------------
# horizontal sections
# ---------------------------------------------------------------------------

def _layer_index(i, comp, layer, lo, n, m):
    return ((i - lo) * n + comp) * m + layer


def _horizontal_basis(conn: Connection, lo: int, hi: int):
    """Kernel of the truncated horizontal-section system on [lo, hi]."""
    n, m = conn.rank, conn.t_order
    mat = conn.matrix
    k_min = mat.min_valuation()
    if k_min is None:
        k_min = 0
    k_min = min(k_min, 0)
    if mat.exact:
        k_max = max(v.hi for row in mat.rows for v in row)
        j_max = hi
    else:
        k_max = mat.window_hi
        j_max = min(hi, lo + k_max)
    a_coeffs = {}
    for k in range(k_min, k_max + 1):
        ak = mat.coefficient_matrix(k)
        if not ak.is_zero:
            a_coeffs[k] = [[v for v in row] for row in ak.rows]
    n_unknowns = (hi - lo + 1) * n * m
    rows = []
    j_min = lo + min(k_min, 0)
    zero = Fraction(0)
    for j in range(j_min, j_max + 1):
        for comp in range(n):
            for w in range(m):
                row = [zero] * n_unknowns
                if lo <= j <= hi:
                    idx = _layer_index(j, comp, w, lo, n, m)
                    row[idx] += Fraction(j)
                for k, ak in a_coeffs.items():
                    i = j - k
                    if not (lo <= i <= hi):
                        continue
                    for comp2 in range(n):
                        entry = ak[comp][comp2]
                        for u in range(w + 1):
                            c = entry.t_layer(w - u)
                            if c:
                                row[
                                    _layer_index(i, comp2, u, lo, n, m)
                                ] += c
                rows.append(row)
    if not rows:
        return [
            _vector_from_flat(flat, lo, hi, n, m)
            for flat in _standard_basis(n_unknowns)
        ]
    kernel = nullspace_rational(rows)
    return [_vector_from_flat(flat, lo, hi, n, m) for flat in kernel]


def _standard_basis(dim):
    out = []
    for i in range(dim):
        vec = [Fraction(0)] * dim
        vec[i] = Fraction(1)
        out.append(vec)
    return out


def _vector_from_flat(flat, lo, hi, n, m):
    vec = []
    for comp in range(n):
        terms = {}
        for i in range(lo, hi + 1):
            layers = [
                flat[_layer_index(i, comp, u, lo, n, m)] for u in range(m)
            ]
            if any(layers):
                terms[i] = RingElem(m, layers)
        vec.append(LaurentSeries.from_terms(m, terms, exact=False, hi=hi))
    return vec


def horizontal_sections(conn: Connection, window) -> list[list[LaurentSeries]]:
    """Basis of truncated solutions of theta(h) + A h = 0 on the window.

    Solutions are truncations; stability of the dimension under widening
    the window by two is required, otherwise the window is declared too
    small.
    """
    lo, hi = window
    if lo > hi:
        raise StructureError("empty window")
    basis = _horizontal_basis(conn, lo, hi)
    check = _horizontal_basis(conn, lo, hi + 2)
    if len(check) != len(basis):
        raise PrecisionExhausted(
            f"solution count unstable between x^{hi} and x^{hi + 2}"
        )
    return basis


# ---------------------------------------------------------------------------
# Hom spaces between Euler connections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomBasis:
    """Basis matrices h(x) with theta(h) = B h - h A on the window."""

    elements: tuple[SeriesMatrix, ...]
    window: tuple[int, int]

    @property
    def dimension(self) -> int:
        return len(self.elements)

    @property
    def all_constant(self) -> bool:
        return all(
            all(
                v.is_known_zero or v.valuation() == 0
                for row in h.rows
                for v in row
            )
            and h.coefficient_matrix(0) is not None
            and _top_exponent(h) <= 0
            for h in self.elements
        )


def _top_exponent(h: SeriesMatrix) -> int:
    top = 0
    for row in h.rows:
        for v in row:
            val = v.valuation()
            if val is not None:
                top = max(top, val)
                for k in range(v.lo, v.hi + 1):
                    if not v.coeff(k).is_zero:
                        top = max(top, k)
    return top


def _expand_shifted_layers(op: RMatrix, shift: Fraction):
    """Q matrix of (shift + op) acting layer by layer on R vectors."""
    dim, m = op.nrows, op.t_order
    size = dim * m
    zero = Fraction(0)
    rows = [[zero] * size for _ in range(size)]
    layers = [op.t_layer(s) for s in range(m)]
    for r in range(dim):
        for w in range(m):
            row = rows[r * m + w]
            if shift:
                row[r * m + w] += shift
            for c in range(dim):
                for u in range(w + 1):
                    v = layers[w - u][r][c]
                    if v:
                        row[c * m + u] += v
    return rows


def hom_space(src: EndObject, dst: EndObject, window) -> HomBasis:
    """Morphism matrices between the Euler connections of src and dst.

    h(x) satisfies theta(h) = B h - h A with A, B the constant matrices of
    src and dst.  Coefficientwise the system decouples: the x^k term lies
    in the kernel of k + T with T(X) = X A - B X, which is singular only
    when -k is a difference of residue eigenvalues.  When the spectra sit
    inside [0, 1) the only such k is 0 and every morphism is constant.
    """
    lo, hi = window
    if lo > hi:
        raise StructureError("empty window")
    if src.t_order != dst.t_order:
        raise StructureError("mixed t_order")
    m = src.t_order
    a, b = src.matrix, dst.matrix
    sp_a = [rho for rho, _ in char_poly_spectrum(a)]
    sp_b = [rho for rho, _ in char_poly_spectrum(b)]
    differences = {ra - rb for ra in sp_a for rb in sp_b}
    n_d, n_s = dst.rank, src.rank
    dim = n_d * n_s
    zero = RingElem.zero(m)
    op_rows = [[zero] * dim for _ in range(dim)]
    for i in range(n_d):
        for j in range(n_s):
            r = i * n_s + j
            for l in range(n_s):
                op_rows[r][i * n_s + l] = op_rows[r][i * n_s + l] + \
                    a.rows[l][j]
            for k in range(n_d):
                op_rows[r][k * n_s + j] = op_rows[r][k * n_s + j] - \
                    b.rows[i][k]
    op = RMatrix(m, op_rows)

    def kernel_at(k: int):
        if -Fraction(k) not in differences:
            return []
        flat = nullspace_rational(_expand_shifted_layers(op, Fraction(k)))
        out = []
        for vec in flat:
            rows = []
            for i in range(n_d):
                row = []
                for j in range(n_s):
                    base = (i * n_s + j) * m
                    layers = vec[base : base + m]
                    elem = RingElem(m, layers)
                    terms = {k: elem} if not elem.is_zero else {}
                    row.append(
                        LaurentSeries.from_terms(
                            m, terms, exact=False, hi=hi
                        )
                    )
                rows.append(row)
            out.append(SeriesMatrix(m, rows))
        return out

    elements = []
    for k in range(lo, hi + 1):
        elements.extend(kernel_at(k))
    for k in (hi + 1, hi + 2):
        if kernel_at(k):
            raise PrecisionExhausted(
                f"morphisms appear between x^{hi} and x^{hi + 2}; "
                "window too small"
            )
    return HomBasis(tuple(elements), (lo, hi))


# ---------------------------------------------------------------------------
# the two directions of the equivalence
# ---------------------------------------------------------------------------

def algebraize(conn: Connection, n_window: int):
    """Exhibit a pole-free connection as the restriction of a constant one.

    Shear normalization followed by the Euler form; the composed gauge
    certifies that the input is isomorphic, through x^n_window, to the
    restriction of the returned algebraic connection.
    """
    if not conn.matrix.is_logarithmic:
        raise NotLogarithmic(
            "algebraize needs a pole-free matrix; saturate a model first"
        )
    normalized = shear_normalize(conn)
    euler = euler_form(normalized.connection, n_window)
    total = normalized.gauge.then(euler.gauge)
    return eul_algebraic(euler.euler), total


# ---------------------------------------------------------------------------
# deterministic instance generator
# ---------------------------------------------------------------------------

DEFAULT_EIGENVALUE_POOL = (
    Fraction(0),
    Fraction(1, 2),
    Fraction(1, 3),
    Fraction(2, 3),
    Fraction(1, 4),
    Fraction(3, 4),
)


def random_split_endobject(rng, n, m, pool=DEFAULT_EIGENVALUE_POOL):
    """Endomorphism with residue spectrum drawn from a rational pool.

    Upper-triangular over Q with pooled diagonal, conjugated by a
    unimodular integer matrix, then perturbed by multiples of t.
    """
    diag = [rng.choice(pool) for _ in range(n)]
    rows = [
        [
            diag[i] if i == j
            else (Fraction(rng.randint(-2, 2)) if j > i else Fraction(0))
            for j in range(n)
        ]
        for i in range(n)
    ]
    u = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for _ in range(n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = Fraction(rng.randint(-2, 2))
        for col in range(n):
            u[i][col] += c * u[j][col]
        for row in range(n):
            rows[row][j] += c * rows[row][i]
        for col in range(n):
            rows[i][col] -= c * rows[j][col]
    del u
    lifted = [
        [
            RingElem(
                m,
                (rows[i][j],)
                + tuple(
                    Fraction(rng.randint(-2, 2), rng.randint(1, 2))
                    for _ in range(m - 1)
                ),
            )
            for j in range(n)
        ]
        for i in range(n)
    ]
    return EndObject(RMatrix(m, lifted))


def random_unimodular_constant(rng, n, m) -> RMatrix:
    """Product of elementary matrices over R; always invertible."""
    out = RMatrix.identity(n, m)
    for _ in range(2 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        rows = [
            [
                RingElem.one(m) if a == b else RingElem.zero(m)
                for b in range(n)
            ]
            for a in range(n)
        ]
        rows[i][j] = RingElem(
            m,
            [Fraction(rng.randint(-2, 2))]
            + [Fraction(rng.randint(-1, 1)) for _ in range(m - 1)],
        )
        out = out * RMatrix(m, rows)
    return out


def unipotent_polynomial_gauge(rng, n, m, degree=2, lower=False) -> Gauge:
    """I + N(x) with N strictly triangular; the inverse is the exact
    finite alternating sum, so the gauge stays Laurent polynomial."""
    zero = LaurentSeries.zero(m)
    rows = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if (j > i) if not lower else (j < i):
                terms = {
                    k: RingElem(
                        m,
                        [Fraction(rng.randint(-2, 2))
                         for _ in range(m)],
                    )
                    for k in range(0, degree + 1)
                    if rng.random() < 0.6
                }
                rows[i][j] = LaurentSeries.from_terms(m, terms)
    nil = SeriesMatrix(m, rows)
    eye = SeriesMatrix.identity(n, m)
    s = eye + nil
    inv = eye
    power = nil
    sign = -1
    for _ in range(1, n):
        inv = inv + (power * sign if sign < 0 else power)
        sign = -sign
        power = power * nil
    return Gauge(s, inv, check=False)


@dataclass(frozen=True)
class TwistedInstance:
    """A gauge-twisted Euler connection with its hidden data recorded."""

    connection: Connection
    hidden: EndObject
    twist: Gauge
    x_window: int


def gen_twisted(seed: int, n: int, m: int, n_window: int) -> TwistedInstance:
    """Deterministic twisted Euler connection for round-trip testing.

    The hidden endomorphism has residue spectrum inside [0, 1); the twist
    composes unit shears, a constant conjugation and unipotent polynomial
    gauges, all exact with exact inverses, so the generated matrix is an
    exact Laurent polynomial matrix and certification windows never shrink.
    """
    rng = random.Random(
        1_000_003 * seed + 10_007 * n + 101 * m + n_window
    )
    hidden = random_split_endobject(rng, n, m)
    conn = eul_formal(hidden)
    twist = Gauge.identity(n, m)
    for _ in range(rng.randint(0, 2)):
        exps = exponents(conn)
        rho = rng.choice([r for r, _mu in exps])
        direction = rng.choice((1, -1))
        conn, gauge = unit_shear(conn, rho, direction)
        twist = twist.then(gauge)
    const = Gauge.from_constant(random_unimodular_constant(rng, n, m))
    conn = gauge_apply(conn, const)
    twist = twist.then(const)
    for lower in (False, True):
        if n == 1:
            break
        gauge = unipotent_polynomial_gauge(rng, n, m, lower=lower)
        conn = gauge_apply(conn, gauge)
        twist = twist.then(gauge)
    return TwistedInstance(conn, hidden, twist, n_window)


# ---------------------------------------------------------------------------
# lattice saturation over the field base
# ---------------------------------------------------------------------------

def _column_valuation(col):
    vals = [v.valuation() for v in col if v.valuation() is not None]
    return min(vals) if vals else None


def _reduce_columns(cols, n, work_hi):
    """x-adic column reduction over Q[[x]]: returns a lattice basis."""
    remaining = [list(c) for c in cols]
    basis = []
    pivot_rows = []
    while remaining and len(basis) < n:
        best = None
        for ci, col in enumerate(remaining):
            for ri in range(n):
                if ri in pivot_rows:
                    continue
                val = col[ri].valuation()
                if val is None:
                    continue
                if best is None or val < best[0]:
                    best = (val, ci, ri)
        if best is None:
            break
        _val, ci, ri = best
        pivot_col = remaining.pop(ci)
        pivot = pivot_col[ri]
        pivot_inv = pivot.inverse(work_hi)
        for col in remaining:
            entry = col[ri]
            if entry.valuation() is None:
                continue
            q = entry * pivot_inv
            for r in range(n):
                col[r] = col[r] - q * pivot_col[r]
        basis.append(pivot_col)
        pivot_rows.append(ri)
    if len(basis) < n:
        raise PrecisionExhausted(
            "window too small to extract a full-rank lattice basis"
        )
    return basis


def saturate_log_model(conn: Connection, bound: int) -> Connection:
    """Search for a pole-removing basis over the field base Q.

    The standard lattice is repeatedly enlarged by the derivation; the
    valuation of the basis determinant strictly drops while the lattice
    grows and stabilization means the lattice is derivation-stable, i.e.
    a pole-free model.  Failure to stabilize within the bound reports
    NotRecognized: the input may be irregular.
    """
    if conn.t_order != 1:
        raise UnsupportedBase(
            "lattice saturation is implemented over the field base only"
        )
    if bound < 1:
        raise StructureError("bound must be positive")
    n = conn.rank
    mat = conn.matrix
    work_hi = mat.window_hi
    if work_hi is None:
        pole = mat.min_valuation() or 0
        work_hi = max(8, n * (bound + 2) * (1 + max(0, -pole)))
    one = LaurentSeries.one(1)
    zero = LaurentSeries.zero(1)
    basis = [
        [one if i == j else zero for i in range(n)] for j in range(n)
    ]
    det_val = 0
    for _round in range(bound):
        derived = []
        for col in basis:
            image = mat.apply(col)
            derived.append([v.theta() + w for v, w in zip(col, image)])
        basis_new = _reduce_columns(basis + derived, n, work_hi)
        s_mat = SeriesMatrix(1, [list(row) for row in zip(*basis_new)])
        det = s_mat.det()
        val = det.valuation()
        if val is None:
            raise PrecisionExhausted(
                "basis determinant vanishes on the working window"
            )
        if val == det_val:
            if _round == 0:
                return conn
            det_inv = det.inverse(work_hi)
            s_inv = adjugate(s_mat) * det_inv
            gauge = Gauge(s_mat, s_inv)
            result = gauge_apply(conn, gauge)
            if not result.matrix.is_logarithmic:
                raise NotRecognized(
                    "stable lattice produced a pole inside the window"
                )
            return Connection(LOGARITHMIC, result.matrix)
        det_val = val
        basis = basis_new
    raise NotRecognized(
        f"lattice kept growing for {bound} rounds; input may be irregular"
    )
