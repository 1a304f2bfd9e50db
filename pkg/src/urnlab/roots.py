"""Certified numerical roots of rational polynomials.

Roots are found on the squarefree factors of the input.  Starting values come
from the companion-matrix eigenvalues, are polished by Aberth iterations in
``mpmath``, and are then certified with Weierstrass inclusion disks evaluated
in exact Gaussian-rational arithmetic: with ``W_i = f(z_i) / prod_{j != i}
(z_i - z_j)`` for monic ``f`` of degree ``d``, pairwise disjoint disks of
radius ``d |W_i|`` each hold exactly one root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .exact import RatPoly

__all__ = [
    "ComplexRoot",
    "ConvergenceFailure",
    "squarefree_factorization",
    "poly_roots",
    "GammaResult",
    "shifted_rising_poly",
    "gamma_condition",
]


class ConvergenceFailure(RuntimeError):
    """Raised when roots cannot be certified to the requested tolerance."""


@dataclass(frozen=True)
class ComplexRoot:
    """A root with a certified enclosure.

    Attributes
    ----------
    value : complex
        Disk centre rounded to double precision.
    radius : float
        Upper bound on the distance from ``value`` to the true root.
    multiplicity : int
    """

    value: complex
    radius: float
    multiplicity: int

    @property
    def real(self) -> float:
        return self.value.real

    @property
    def imag(self) -> float:
        return self.value.imag


def squarefree_factorization(p: RatPoly) -> list[tuple[RatPoly, int]]:
    """Yun's algorithm: ``p = lead * prod f_k**k`` with coprime squarefree ``f_k``."""
    if p.degree < 1:
        return []
    p = p.monic()
    out = []
    a = p.gcd(p.derivative())
    b = p // a
    c = p.derivative() // a
    d = c - b.derivative()
    k = 1
    while b.degree >= 1:
        g = b.gcd(d)
        if g.degree >= 1:
            out.append((g, k))
        b = b // g
        c = d // g
        d = c - b.derivative()
        k += 1
    return out


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    man = -int(man) if sign else int(man)
    return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2 ** (-exp))


def _upper_sqrt(x: Fraction) -> float:
    # float(x) is correctly rounded, so one step up bounds x; two more absorb
    # the rounding of sqrt
    f = math.nextafter(float(x), math.inf)
    return math.nextafter(math.nextafter(math.sqrt(f), math.inf), math.inf)


def _abs2_fraction(w) -> Fraction:
    re, im = _mpf_to_fraction(mpmath.re(w)), _mpf_to_fraction(mpmath.im(w))
    return re * re + im * im


def _aberth(coeffs_desc, z, maxiter: int = 100):
    d = len(z)
    tol = mpmath.mpf(2) ** (-(3 * mpmath.mp.prec // 4))
    dp = [c * (d - i) for i, c in enumerate(coeffs_desc[:-1])]
    active = set(range(d))
    for _ in range(maxiter):
        if not active:
            break
        for i in sorted(active):
            zi = z[i]
            pv = mpmath.polyval(coeffs_desc, zi)
            if pv == 0:
                active.discard(i)
                continue
            dv = mpmath.polyval(dp, zi)
            ratio = pv / dv if dv != 0 else mpmath.mpf(1)
            s = mpmath.fsum(1 / (zi - z[j]) for j in range(d) if j != i and zi != z[j])
            step = ratio / (1 - ratio * s)
            z[i] = zi - step
            if abs(step) <= tol * max(abs(z[i]), 1):
                active.discard(i)
    return z


def _certify(f: RatPoly, z) -> list[float] | None:
    """Return inclusion radii for the approximations, or None if they overlap."""
    d = f.degree
    pts = [(_mpf_to_fraction(mpmath.re(w)), _mpf_to_fraction(mpmath.im(w))) for w in z]
    coeffs = f.coeffs
    radii = []
    for i, (xr, xi) in enumerate(pts):
        # Horner in Gaussian rationals
        vr, vi = Fraction(0), Fraction(0)
        for c in reversed(coeffs):
            vr, vi = vr * xr - vi * xi + c, vr * xi + vi * xr
        num2 = vr * vr + vi * vi
        den2 = Fraction(1)
        for j, (yr, yi) in enumerate(pts):
            if j == i:
                continue
            dr, di = xr - yr, xi - yi
            dist2 = dr * dr + di * di
            if not dist2:
                return None
            den2 *= dist2
        w2 = num2 / den2
        radii.append(d * _upper_sqrt(w2))
    for i in range(d):
        for j in range(i + 1, d):
            dr = pts[i][0] - pts[j][0]
            di = pts[i][1] - pts[j][1]
            gap = Fraction(radii[i]) + Fraction(radii[j])
            if dr * dr + di * di <= gap * gap:
                return None
    return radii


def _roots_squarefree(f: RatPoly, tol: float) -> list[tuple[complex, float, object]]:
    d = f.degree
    if d == 1:
        r = -f.coeffs[0] / f.coeffs[1]
        return [(complex(float(r)), 0.0, mpmath.mpf(r.numerator) / r.denominator)]
    coeffs_float = [float(c) for c in reversed(f.coeffs)]
    start = np.roots(coeffs_float)
    for dps in (40, 80, 160):
        with mpmath.workdps(dps):
            coeffs_desc = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(f.coeffs)]
            z = [mpmath.mpc(complex(s)) for s in start]
            # perturb exact duplicates so the Aberth step is defined
            for i in range(d):
                for j in range(i):
                    if z[i] == z[j]:
                        z[i] += mpmath.mpc(0, 1e-6 * (i + 1))
            z = _aberth(coeffs_desc, z)
            radii = _certify(f, z)
            if radii is not None:
                # widen each disk by the rounding of its centre to a double
                out = []
                for w, r in zip(z, radii):
                    c = complex(w)
                    out.append((c, r + _upper_sqrt(_abs2_fraction(w - mpmath.mpc(c))), w))
                if max(r for _, r, _ in out) <= tol:
                    return out
            start = [complex(w) for w in z]
    raise ConvergenceFailure(f"could not certify the roots of a degree-{d} factor to {tol}")


def poly_roots(p: RatPoly, tol: float = 1e-12) -> list[ComplexRoot]:
    """All complex roots of ``p`` with certified radii and multiplicities.

    Parameters
    ----------
    p : RatPoly
        Nonconstant polynomial.
    tol : float
        Largest acceptable inclusion radius.

    Raises
    ------
    ConvergenceFailure
        If some root cannot be isolated within ``tol``, or two roots from
        different squarefree factors cannot be separated.
    """
    if p.degree < 1:
        raise ValueError("need a nonconstant polynomial")
    found = []
    for factor, mult in squarefree_factorization(p):
        for value, radius, _ in _roots_squarefree(factor, tol):
            found.append(ComplexRoot(value, radius, mult))
    # roots from different factors are distinct; make sure their disks are too
    for i in range(len(found)):
        for j in range(i + 1, len(found)):
            a, b = found[i], found[j]
            if a.radius + b.radius > 0 and abs(a.value - b.value) <= a.radius + b.radius:
                raise ConvergenceFailure("overlapping inclusion disks across factors")
    found.sort(key=lambda r: (-r.value.real, -r.value.imag))
    return found


@dataclass(frozen=True)
class GammaResult:
    """Outcome of the normal-regime test for the m-ary search tree.

    Attributes
    ----------
    m : int
    gamma : float
        Largest real part among the roots other than 1; ``-inf`` when there
        are none (m = 2).
    radius : float
        Certified error bound on ``gamma``.
    normal : bool
        True iff ``gamma < 1/2``.
    margin : float
        ``|gamma - 1/2|``.
    """

    m: int
    gamma: float
    radius: float
    normal: bool
    margin: float


def shifted_rising_poly(m: int) -> RatPoly:
    """``prod_{i=1}^{m-1} (x + i) - m!``, which vanishes at ``x = 1``."""
    p = RatPoly([1])
    for i in range(1, m):
        p = p * RatPoly([i, 1])
    return p - RatPoly([math.factorial(m)])


def gamma_condition(m: int, tol: float = 1e-12) -> GammaResult:
    """Largest real part of the non-unit roots of ``shifted_rising_poly(m)``.

    The fringe and protected-node counts are asymptotically normal exactly
    when this is below 1/2, which holds for ``m <= 26``.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    q, rem = divmod(shifted_rising_poly(m), RatPoly([-1, 1]))
    assert not rem
    if q.degree < 1:
        return GammaResult(m, -math.inf, 0.0, True, math.inf)
    roots = poly_roots(q, tol)
    best = max(roots, key=lambda r: r.value.real)
    gamma = best.value.real
    margin = abs(gamma - 0.5)
    if margin <= best.radius:
        raise ConvergenceFailure(f"cannot decide gamma_{m} < 1/2 at tolerance {tol}")
    return GammaResult(m, gamma, best.radius, gamma < 0.5, margin)
