"""Exact solution of ``M X + X M' = F``.

Two independent routes:

``kronecker``
    Assemble the linear system on the upper triangle of a symmetric ``X``
    (optionally with extra constraint rows) and solve it directly.  Cost grows
    like ``q**6``, so this is for small matrices and as a cross-check.

``blocks``
    Split the space into generalized eigenspaces of ``M`` (one per rational
    eigenvalue, plus one for the remaining irrational factor of the
    characteristic polynomial), solve the much smaller block equations there
    and transform back.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .exact import RatMatrix, RatPoly, SingularMatrix, char_poly, nullspace, rat_solve
from .roots import poly_roots

__all__ = ["solve_sylvester", "sylvester_kronecker", "sylvester_blocks", "rational_eigenvalues", "primary_blocks"]


def sylvester_kronecker(m: RatMatrix, f: RatMatrix, constraints: Sequence[Sequence[Fraction]] = ()) -> RatMatrix:
    """Symmetric solution by one linear system on the upper triangle.

    Parameters
    ----------
    m, f : RatMatrix
        ``f`` must be symmetric.
    constraints : sequence of vectors
        Each vector ``u`` adds the rows ``u' X = 0``; the system then becomes
        overdetermined and must stay consistent.
    """
    q = m.nrows
    if not f.is_symmetric():
        raise ValueError("right-hand side must be symmetric")
    pairs = [(i, j) for i in range(q) for j in range(i, q)]
    idx = {p: k for k, p in enumerate(pairs)}

    def var(i, j):
        return idx[(i, j) if i <= j else (j, i)]

    n = len(pairs)
    rows, rhs = [], []
    for i, j in pairs:
        row = [Fraction(0)] * n
        # (M X)_ij = sum_k M_ik X_kj ; (X M')_ij = sum_k X_ik M_jk
        for k in range(q):
            if m[i, k]:
                row[var(k, j)] += m[i, k]
            if m[j, k]:
                row[var(i, k)] += m[j, k]
        rows.append(row)
        rhs.append([f[i, j]])
    for u in constraints:
        for j in range(q):
            row = [Fraction(0)] * n
            for k in range(q):
                if u[k]:
                    row[var(k, j)] += u[k]
            rows.append(row)
            rhs.append([Fraction(0)])
    sol = rat_solve(RatMatrix._raw(rows), RatMatrix._raw(rhs))
    x = [[sol[var(i, j), 0] for j in range(q)] for i in range(q)]
    return RatMatrix._raw(x)


def _general_kronecker(a: RatMatrix, b: RatMatrix, f: RatMatrix) -> RatMatrix:
    """Solve ``a Y + Y b' = f`` for rectangular ``Y`` by a dense system."""
    p, r = a.nrows, b.nrows
    n = p * r
    rows = []
    rhs = []
    for i in range(p):
        for j in range(r):
            row = [Fraction(0)] * n
            for k in range(p):
                if a[i, k]:
                    row[k * r + j] += a[i, k]
            for k in range(r):
                if b[j, k]:
                    row[i * r + k] += b[j, k]
            rows.append(row)
            rhs.append([f[i, j]])
    sol = rat_solve(RatMatrix._raw(rows), RatMatrix._raw(rhs))
    return RatMatrix._raw([[sol[i * r + j, 0] for j in range(r)] for i in range(p)])


def rational_eigenvalues(p: RatPoly) -> list[tuple[Fraction, int]]:
    """Rational roots of ``p`` with multiplicities.

    Candidates come from certified numerical roots of the squarefree part and
    are confirmed by exact evaluation, so nothing is reported by accident;
    rationals with denominators above ``10**9`` would be missed and end up in
    the irrational part, which is still handled exactly.
    """
    sq = p.squarefree()
    out = []
    if sq.degree < 1:
        return out
    for r in poly_roots(sq, tol=1e-9):
        if abs(r.value.imag) > 1e-6:
            continue
        cand = Fraction(r.value.real).limit_denominator(10**9)
        if sq(cand) != 0:
            continue
        lin = RatPoly([-cand, 1])
        k = 0
        rest = p
        while True:
            quo, rem = divmod(rest, lin)
            if rem:
                break
            rest = quo
            k += 1
        out.append((cand, k))
    return out


def primary_blocks(m: RatMatrix):
    """Generalized eigenspace bases of ``m``.

    Returns a list of ``(basis, eigenvalue)`` where ``eigenvalue`` is a
    Fraction for rational eigenvalues and None for the block carrying all
    remaining (irrational) roots.
    """
    q = m.nrows
    p = char_poly(m)
    eye = RatMatrix.identity(q)
    blocks = []
    rest = p
    for r, k in rational_eigenvalues(p):
        shifted = m - eye * r
        basis = nullspace(shifted)
        if len(basis) < k:
            power = shifted
            for _ in range(k - 1):
                power = power @ shifted
            basis = nullspace(power)
        if len(basis) != k:
            raise ArithmeticError("generalized eigenspace has the wrong dimension")
        blocks.append((basis, r))
        rest = rest // (RatPoly([-r, 1]) ** k)
    if rest.degree >= 1:
        basis = nullspace(rest.at_matrix(m))
        if len(basis) != rest.degree:
            raise ArithmeticError("irrational block has the wrong dimension")
        blocks.append((basis, None))
    return blocks


def _series_block(s: Fraction, na: RatMatrix, nb: RatMatrix, f: RatMatrix) -> RatMatrix:
    """Solve ``(s I + L) Y = f`` with ``L(Y) = na Y + Y nb'`` nilpotent."""
    if not s:
        raise SingularMatrix("eigenvalue pair sums to zero", 0)
    acc = f * (1 / s)
    term = f
    sign = Fraction(1)
    nbt = nb.T
    for k in range(1, na.nrows + nb.nrows + 1):
        term = na @ term + term @ nbt
        if term.is_zero():
            break
        sign = -sign
        acc = acc + term * (sign / s ** (k + 1))
    return acc


def sylvester_blocks(m: RatMatrix, f: RatMatrix) -> RatMatrix:
    """Solve ``m X + X m' = f`` through the primary decomposition of ``m``."""
    q = m.nrows
    blocks = primary_blocks(m)
    cols = [v for basis, _ in blocks for v in basis]
    s = RatMatrix._raw([[cols[j][i] for j in range(q)] for i in range(q)])
    s_inv = rat_solve(s, RatMatrix.identity(q))
    t = s_inv @ m @ s
    spans = []
    start = 0
    for basis, r in blocks:
        spans.append((list(range(start, start + len(basis))), r))
        start += len(basis)
    # the transformed matrix must be block diagonal
    owner = [None] * q
    for b, (idx, _) in enumerate(spans):
        for i in idx:
            owner[i] = b
    for i in range(q):
        for j in range(q):
            if t[i, j] and owner[i] != owner[j]:
                raise ArithmeticError("primary decomposition is not block diagonal")
    g = s_inv @ f @ s_inv.T
    nb = len(spans)
    parts: dict[tuple[int, int], RatMatrix] = {}
    for a in range(nb):
        ia, ra = spans[a]
        ta = t.submatrix(ia, ia)
        na = ta - RatMatrix.identity(len(ia)) * ra if ra is not None else None
        for b in range(a, nb):
            ib, rb = spans[b]
            tb = t.submatrix(ib, ib)
            gab = g.submatrix(ia, ib)
            if ra is not None and rb is not None:
                nbm = tb - RatMatrix.identity(len(ib)) * rb
                y = _series_block(ra + rb, na, nbm, gab)
            elif ra is not None or rb is not None:
                y = _mixed_block(ta, tb, ra, rb, gab)
            else:
                y = _general_kronecker(ta, tb, gab)
            parts[(a, b)] = y
            parts[(b, a)] = y.T
    ymat = [[Fraction(0)] * q for _ in range(q)]
    for (a, b), y in parts.items():
        ia, ib = spans[a][0], spans[b][0]
        for r, i in enumerate(ia):
            for c, j in enumerate(ib):
                ymat[i][j] = y[r, c]
    return s @ RatMatrix._raw(ymat) @ s.T


def _mixed_block(ta, tb, ra, rb, f):
    """One block has a single rational eigenvalue; the other is general."""
    if ra is not None:
        # (ra I + na) Y + Y tb' = f  ->  Y (tb' + ra I) = f - na Y
        na = ta - RatMatrix.identity(ta.nrows) * ra
        k = tb.T + RatMatrix.identity(tb.nrows) * ra
        k_inv = rat_solve(k, RatMatrix.identity(k.nrows))
        y = f @ k_inv
        for _ in range(ta.nrows + 1):
            nxt = (f - na @ y) @ k_inv
            if nxt == y:
                break
            y = nxt
        return y
    # ta Y + Y (rb I + nb)' = f  ->  (ta + rb I) Y = f - Y nb'
    nb = tb - RatMatrix.identity(tb.nrows) * rb
    k = ta + RatMatrix.identity(ta.nrows) * rb
    k_inv = rat_solve(k, RatMatrix.identity(k.nrows))
    y = k_inv @ f
    nbt = nb.T
    for _ in range(tb.nrows + 1):
        nxt = k_inv @ (f - y @ nbt)
        if nxt == y:
            break
        y = nxt
    return y


def solve_sylvester(m: RatMatrix, f: RatMatrix, method: str = "auto", constraints=()) -> RatMatrix:
    """Solve ``m X + X m' = f`` exactly and verify the residual.

    Parameters
    ----------
    method : {"auto", "kronecker", "blocks"}
        ``auto`` uses the direct system up to 10 unknown rows and the block
        route beyond.
    constraints : sequence of vectors
        Extra conditions ``u' X = 0``; enforced by the Kronecker route and
        checked afterwards by both.
    """
    if method == "auto":
        method = "kronecker" if m.nrows <= 10 else "blocks"
    if method == "kronecker":
        x = sylvester_kronecker(m, f, constraints)
    elif method == "blocks":
        x = sylvester_blocks(m, f)
    else:
        raise ValueError(f"unknown method {method!r}")
    if m @ x + x @ m.T != f:
        raise ArithmeticError("Sylvester residual is not zero")
    for u in constraints:
        row = (RatMatrix._raw([list(u)]) @ x).row(0)
        if any(row):
            raise ArithmeticError("solution violates a side constraint")
    return x
