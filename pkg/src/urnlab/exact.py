"""Exact rational linear algebra and polynomials.

Everything here works over :class:`fractions.Fraction`.  Matrices are small
(tens of rows), so plain nested lists with sparse-aware elimination are fast
enough and keep every result exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "RatMatrix",
    "RatPoly",
    "SingularMatrix",
    "as_rational",
    "rat_solve",
    "nullspace",
    "rank",
    "det",
    "char_poly",
    "ldl_psd",
    "rat_to_json",
    "rat_from_json",
    "format_rat",
]


class SingularMatrix(ValueError):
    """Raised when a linear system has no unique solution.

    Attributes
    ----------
    rank : int
        Rank of the coefficient matrix.
    """

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


def as_rational(x) -> Fraction:
    """Convert ints, Fractions and strings such as ``"5/2"`` to a Fraction.

    Floats are rejected so that inexact values never leak into exact routines.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, dict) and "num" in x and "den" in x:
        return rat_from_json(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class RatMatrix:
    """Dense matrix with Fraction entries.

    Parameters
    ----------
    rows : sequence of sequences
        Row-major entries; anything accepted by :func:`as_rational`.
    """

    __slots__ = ("_rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable]):
        data = [tuple(as_rational(x) for x in r) for r in rows]
        ncols = len(data[0]) if data else 0
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged rows")
        self._rows = tuple(data)
        self.nrows = len(data)
        self.ncols = ncols

    @classmethod
    def _raw(cls, rows: list[list[Fraction]]) -> "RatMatrix":
        obj = cls.__new__(cls)
        obj._rows = tuple(tuple(r) for r in rows)
        obj.nrows = len(rows)
        obj.ncols = len(rows[0]) if rows else 0
        return obj

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RatMatrix":
        z = Fraction(0)
        return cls._raw([[z] * ncols for _ in range(nrows)])

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        rows = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        return cls._raw(rows)

    @classmethod
    def column(cls, vec: Sequence) -> "RatMatrix":
        return cls([[x] for x in vec])

    @classmethod
    def diag(cls, vec: Sequence) -> "RatMatrix":
        vals = [as_rational(x) for x in vec]
        n = len(vals)
        rows = [[vals[i] if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        return cls._raw(rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._rows]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._rows[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._rows)

    def __getitem__(self, idx):
        i, j = idx
        return self._rows[i][j]

    def __iter__(self):
        return iter(self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            try:
                other = RatMatrix(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self) -> str:
        body = ",\n ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self._rows)
        return f"RatMatrix([{body}])"

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix._raw([list(c) for c in zip(*self._rows)] if self.nrows else [])

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix._raw([[a + b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)])

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix._raw([[a - b for a, b in zip(r, s)] for r, s in zip(self._rows, other._rows)])

    def __neg__(self) -> "RatMatrix":
        return RatMatrix._raw([[-a for a in r] for r in self._rows])

    def __mul__(self, scalar) -> "RatMatrix":
        s = as_rational(scalar)
        return RatMatrix._raw([[a * s for a in r] for r in self._rows])

    __rmul__ = __mul__

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return RatMatrix._raw(_matmul(self._rows, other._rows, other.ncols))

    def _check_same(self, other: "RatMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def apply(self, vec: Sequence[Fraction]) -> tuple[Fraction, ...]:
        """Matrix-vector product returning a tuple."""
        out = []
        for r in self._rows:
            acc = Fraction(0)
            for a, x in zip(r, vec):
                if a and x:
                    acc += a * x
            out.append(acc)
        return tuple(out)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix._raw([[self._rows[i][j] for j in cols] for i in rows])

    def is_zero(self) -> bool:
        return all(not a for r in self._rows for a in r)

    def is_symmetric(self) -> bool:
        return self.nrows == self.ncols and all(
            self._rows[i][j] == self._rows[j][i] for i in range(self.nrows) for j in range(i)
        )

    def trace(self) -> Fraction:
        return sum((self._rows[i][i] for i in range(self.nrows)), Fraction(0))

    def to_float(self):
        import numpy as np

        return np.array([[float(a) for a in r] for r in self._rows], dtype=float).reshape(self.shape)


def _matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    # row-oriented product that skips zeros, which are common in urn matrices
    out = []
    zero = Fraction(0)
    for r in a:
        acc = [zero] * ncols
        for k, x in enumerate(r):
            if not x:
                continue
            brow = b[k]
            for j in range(ncols):
                y = brow[j]
                if y:
                    acc[j] += x * y
        out.append(acc)
    return out


def _bits(x: Fraction) -> int:
    return x.numerator.bit_length() + x.denominator.bit_length()


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form in place; returns (rows, pivot columns).

    Pivots are the nonzero entry of smallest bit size in the column, ties going
    to the lowest row, which keeps intermediate numbers short.
    """
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        best = None
        for i in range(r, nrows):
            v = rows[i][c]
            if v and (best is None or _bits(v) < best[0]):
                best = (_bits(v), i)
        if best is None:
            continue
        p = best[1]
        rows[r], rows[p] = rows[p], rows[r]
        prow = rows[r]
        inv = 1 / prow[c]
        nz = [j for j in range(c, len(prow)) if prow[j]]
        for j in nz:
            prow[j] *= inv
        for i in range(nrows):
            if i == r:
                continue
            row = rows[i]
            f = row[c]
            if f:
                for j in nz:
                    row[j] -= f * prow[j]
        pivots.append(c)
        r += 1
    return rows, pivots


def rank(m: RatMatrix) -> int:
    """Exact rank."""
    _, piv = _rref(m.tolist(), m.ncols)
    return len(piv)


def rat_solve(m: RatMatrix, rhs: RatMatrix) -> RatMatrix:
    """Solve ``m @ X = rhs`` exactly.

    Overdetermined systems are accepted when they are consistent and the
    solution is unique.

    Raises
    ------
    SingularMatrix
        If the system is inconsistent or the solution is not unique.
    """
    if m.nrows != rhs.nrows:
        raise ValueError("row count of matrix and right-hand side differ")
    n = m.ncols
    aug = [list(r) + list(s) for r, s in zip(m, rhs)]
    aug, piv = _rref(aug, n)
    rk = len(piv)
    if rk < n:
        raise SingularMatrix(f"matrix has rank {rk} < {n} unknowns", rk)
    for row in aug[rk:]:
        if any(row[n:]):
            raise SingularMatrix("inconsistent overdetermined system", rk)
    return RatMatrix._raw([row[n:] for row in aug[:n]])


def nullspace(m: RatMatrix) -> list[tuple[Fraction, ...]]:
    """Basis of the right kernel, one tuple per basis vector.

    Each vector has a 1 in its free coordinate, so the basis is canonical for
    a given matrix.
    """
    n = m.ncols
    rows, piv = _rref(m.tolist(), n)
    pivset = set(piv)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, c in enumerate(piv):
            v[c] = -rows[r][f]
        basis.append(tuple(v))
    return basis


def det(m: RatMatrix) -> Fraction:
    """Determinant by Bareiss fraction-free elimination."""
    if m.nrows != m.ncols:
        raise ValueError("determinant of a non-square matrix")
    n = m.nrows
    a = m.tolist()
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return Fraction(0)
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else Fraction(1)


class RatPoly:
    """Polynomial with Fraction coefficients in ascending order.

    ``RatPoly([c0, c1, c2])`` is ``c0 + c1*x + c2*x**2``.  Trailing zeros are
    stripped, so the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls) -> "RatPoly":
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots: Iterable) -> "RatPoly":
        p = cls([1])
        for r in roots:
            p = p * cls([-as_rational(r), 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, RatPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RatPoly({[str(c) for c in self.coeffs]})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if k and abs(c) == 1:
                coef = "-" if c < 0 else ""
            else:
                coef = f"({c})" if c.denominator != 1 else str(c)
            terms.append(coef + mono)
        return " + ".join(terms).replace("+ -", "- ")

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: "RatPoly") -> "RatPoly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        z = Fraction(0)
        return RatPoly([(a[i] if i < len(a) else z) + (b[i] if i < len(b) else z) for i in range(n)])

    def __neg__(self) -> "RatPoly":
        return RatPoly([-c for c in self.coeffs])

    def __sub__(self, other: "RatPoly") -> "RatPoly":
        return self + (-other)

    def __mul__(self, other) -> "RatPoly":
        if not isinstance(other, RatPoly):
            s = as_rational(other)
            return RatPoly([c * s for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return RatPoly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return RatPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "RatPoly":
        out = RatPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, other: "RatPoly") -> tuple["RatPoly", "RatPoly"]:
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        quo = [Fraction(0)] * max(len(rem) - dq, 0)
        inv = 1 / other.lead
        for k in range(len(rem) - 1, dq - 1, -1):
            c = rem[k] * inv
            if c:
                quo[k - dq] = c
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= c * b
        return RatPoly(quo), RatPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other: "RatPoly") -> "RatPoly":
        return divmod(self, other)[0]

    def __mod__(self, other: "RatPoly") -> "RatPoly":
        return divmod(self, other)[1]

    def monic(self) -> "RatPoly":
        if not self.coeffs:
            return self
        return self * (1 / self.lead)

    def derivative(self) -> "RatPoly":
        return RatPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def gcd(self, other: "RatPoly") -> "RatPoly":
        a, b = self, other
        while b:
            a, b = b, a % b
        return a.monic()

    def squarefree(self) -> "RatPoly":
        """Product of the distinct irreducible factors, made monic."""
        if self.degree < 1:
            return RatPoly([1])
        return (self // self.gcd(self.derivative())).monic()

    def shift(self, s) -> "RatPoly":
        """Return ``q`` with ``q(x) = p(x + s)``."""
        s = as_rational(s)
        out = RatPoly()
        lin = RatPoly([s, 1])
        for c in reversed(self.coeffs):
            out = out * lin + RatPoly([c])
        return out

    def at_matrix(self, m: RatMatrix) -> RatMatrix:
        """Evaluate the polynomial at a square matrix by Horner's rule."""
        n = m.nrows
        acc = RatMatrix.zeros(n, n)
        eye = RatMatrix.identity(n)
        for c in reversed(self.coeffs):
            acc = acc @ m + eye * c
        return acc

    def rational_roots(self) -> list[tuple[Fraction, int]]:
        """Rational roots with multiplicities, via the rational root theorem.

        Only practical for modest integer content; used for testing.
        """
        from math import lcm

        out = []
        p = self
        if not p:
            raise ValueError("zero polynomial")
        mult0 = 0
        while p.coeffs and not p.coeffs[0]:
            p = RatPoly(p.coeffs[1:])
            mult0 += 1
        if mult0:
            out.append((Fraction(0), mult0))
        den = lcm(*(c.denominator for c in p.coeffs))
        ints = [int(c * den) for c in p.coeffs]
        cands = set()
        for a in _divisors(abs(ints[0])):
            for b in _divisors(abs(ints[-1])):
                cands.add(Fraction(a, b))
                cands.add(Fraction(-a, b))
        for r in sorted(cands):
            k = 0
            lin = RatPoly([-r, 1])
            while p.degree >= 1:
                q, rem = divmod(p, lin)
                if rem:
                    break
                p = q
                k += 1
            if k:
                out.append((r, k))
        return out


def _divisors(n: int) -> list[int]:
    ds = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            ds.append(i)
            if i * i != n:
                ds.append(n // i)
        i += 1
    return ds


def char_poly(m: RatMatrix, method: str = "hessenberg") -> RatPoly:
    """Characteristic polynomial ``det(x I - m)`` (monic).

    Parameters
    ----------
    m : RatMatrix
        Square matrix.
    method : {"hessenberg", "faddeev"}
        Hessenberg reduction followed by the standard recurrence (O(n^3)), or
        the Faddeev-LeVerrier trace recursion (O(n^4)), kept as a cross-check.
    """
    if m.nrows != m.ncols:
        raise ValueError("characteristic polynomial of a non-square matrix")
    if method == "hessenberg":
        return _charpoly_hessenberg(m)
    if method == "faddeev":
        return _charpoly_faddeev(m)
    raise ValueError(f"unknown method {method!r}")


def _charpoly_hessenberg(m: RatMatrix) -> RatPoly:
    n = m.nrows
    h = m.tolist()
    for j in range(n - 2):
        piv = next((i for i in range(j + 1, n) if h[i][j]), None)
        if piv is None:
            continue
        if piv != j + 1:
            h[piv], h[j + 1] = h[j + 1], h[piv]
            for r in h:
                r[piv], r[j + 1] = r[j + 1], r[piv]
        p = h[j + 1][j]
        for i in range(j + 2, n):
            u = h[i][j] / p
            if not u:
                continue
            ri, rp = h[i], h[j + 1]
            for c in range(n):
                if rp[c]:
                    ri[c] -= u * rp[c]
            for r in h:
                if r[i]:
                    r[j + 1] += u * r[i]
    x = RatPoly.x()
    polys = [RatPoly([1])]
    for k in range(n):
        pk = (x - RatPoly([h[k][k]])) * polys[k]
        prod = Fraction(1)
        for i in range(k - 1, -1, -1):
            prod *= h[i + 1][i]
            if not prod:
                break
            c = h[i][k] * prod
            if c:
                pk = pk - polys[i] * c
        polys.append(pk)
    return polys[n]


def _charpoly_faddeev(m: RatMatrix) -> RatPoly:
    n = m.nrows
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = RatMatrix.zeros(n, n)
    eye = RatMatrix.identity(n)
    for k in range(1, n + 1):
        mk = m @ (mk + eye * coeffs[n - k + 1])
        coeffs[n - k] = -mk.trace() / k
    return RatPoly(coeffs)


def ldl_psd(m: RatMatrix) -> tuple[bool, list[Fraction]]:
    """Exact test for positive semidefiniteness.

    Runs symmetric elimination; a zero pivot is allowed only when the rest of
    its row is zero too.

    Returns
    -------
    (is_psd, pivots)
    """
    if not m.is_symmetric():
        return False, []
    a = m.tolist()
    n = len(a)
    pivots = []
    for k in range(n):
        d = a[k][k]
        pivots.append(d)
        if d < 0:
            return False, pivots
        if d == 0:
            if any(a[k][j] for j in range(k + 1, n)):
                return False, pivots
            continue
        for i in range(k + 1, n):
            f = a[i][k] / d
            if f:
                for j in range(k + 1, n):
                    if a[k][j]:
                        a[i][j] -= f * a[k][j]
    return True, pivots


def format_rat(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def rat_to_json(x: Fraction) -> dict:
    """Exact JSON form with a float rendering alongside."""
    x = as_rational(x)
    return {"num": str(x.numerator), "den": str(x.denominator), "float": float(f"{float(x):.17g}")}


def rat_from_json(obj) -> Fraction:
    if isinstance(obj, dict):
        return Fraction(int(obj["num"]), int(obj["den"]))
    return as_rational(obj)
