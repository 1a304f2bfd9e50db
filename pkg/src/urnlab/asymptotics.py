"""Exact limit laws of balanced urns.

For an urn whose live block has intensity matrix ``A`` with every draw
changing the total activity by the same ``c = lambda1``, the composition
satisfies ``X_n / n -> mu = lambda1 * v1`` and, in the normal regime (every
other eigenvalue has real part below ``lambda1 / 2``),
``(X_n - n mu) / sqrt(n) -> N(0, Sigma)``.  Here ``v1`` is the right
eigenvector of ``lambda1`` scaled so that ``a . v1 = 1``, and
``Sigma = c * X`` where ``X`` solves

    (A - lambda1/2 I) X + X (A - lambda1/2 I)' = -P B P',

``P = I - v1 a'`` projects away from the principal direction and
``B = sum_i v1_i a_i E[delta_i delta_i']``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .exact import RatMatrix, RatPoly, char_poly, ldl_psd, nullspace, rat_to_json
from .mst import IsoMode, MstTree, canonical, fringe_census, parse_mst, prob_mst_equals
from .pa import PaTree, PaWeights, canonical_pa, pa_fringe_census, parse_pa, prob_pa_equals
from .roots import ComplexRoot, gamma_condition, poly_roots
from .sylvester import solve_sylvester
from .urns import UrnSpec, live_indices, predicted_charpoly, protected_types

__all__ = [
    "NotNormalRegime",
    "SpectrumMismatch",
    "UrnAnalysis",
    "analyze_urn",
    "compute_b",
    "verify_spectrum",
    "cross_check_sigma_diag",
    "fringe_projection",
    "project",
    "functional_moments",
    "protected_functional",
    "mst_degree_functional",
    "affine_project",
    "hmu_mst",
    "hmu_pa",
    "harmonic",
    "protected_mean",
    "degree_means",
]


class NotNormalRegime(ArithmeticError):
    """Some non-principal eigenvalue has real part at least ``lambda1 / 2``."""

    def __init__(self, message: str, gamma: float, lambda1: Fraction, diagnostic: dict | None = None):
        super().__init__(message)
        self.gamma = gamma
        self.lambda1 = lambda1
        self.diagnostic = diagnostic or {}


class SpectrumMismatch(ArithmeticError):
    """The characteristic polynomial differs from the predicted product."""

    def __init__(self, actual: RatPoly, predicted: RatPoly):
        super().__init__(f"char poly {actual} != predicted {predicted}")
        self.actual = actual
        self.predicted = predicted


@dataclass
class UrnAnalysis:
    """Exact first- and second-order asymptotics of a balanced urn.

    All vectors and matrices are indexed by the live (positive-activity)
    types listed in ``labels``.
    """

    urn: UrnSpec
    live: list[int]
    labels: list[str]
    A: RatMatrix
    lambda1: Fraction
    u1: tuple[Fraction, ...]
    v1: tuple[Fraction, ...]
    mu: tuple[Fraction, ...]
    charpoly: RatPoly
    eigenvalues: list[ComplexRoot]
    gamma: float
    B: RatMatrix | None = None
    Sigma: RatMatrix | None = None
    method: str = ""
    predicted: RatPoly | None = None
    extras: dict = field(default_factory=dict)

    @property
    def q(self) -> int:
        return len(self.live)

    def to_json(self) -> dict:
        def mat(m):
            return None if m is None else [[rat_to_json(x) for x in r] for r in m]

        return {
            "provenance": self.urn.meta,
            "types": self.labels,
            "activities": [rat_to_json(self.urn.activities[i]) for i in self.live],
            "A": mat(self.A),
            "charpoly": [rat_to_json(c) for c in self.charpoly.coeffs],
            "predicted_charpoly": None if self.predicted is None else [rat_to_json(c) for c in self.predicted.coeffs],
            "spectrum_identity": None if self.predicted is None else self.predicted == self.charpoly,
            "eigenvalues": [
                {"re": r.value.real, "im": r.value.imag, "radius": r.radius, "multiplicity": r.multiplicity}
                for r in self.eigenvalues
            ],
            "lambda1": rat_to_json(self.lambda1),
            "gamma": self.gamma,
            "v1": [rat_to_json(x) for x in self.v1],
            "mu": [rat_to_json(x) for x in self.mu],
            "B": mat(self.B),
            "Sigma": mat(self.Sigma),
            "sigma_method": self.method,
            **{k: v for k, v in self.extras.items()},
        }


def compute_b(u: UrnSpec, live: Sequence[int], v1: Sequence[Fraction]) -> RatMatrix:
    """``B = sum_i v1_i a_i E[delta_i delta_i']`` on the live coordinates."""
    q = len(live)
    b = [[Fraction(0)] * q for _ in range(q)]
    for pos, i in enumerate(live):
        coef = v1[pos] * u.activities[i]
        if not coef:
            continue
        for o in u.outcomes[i]:
            d = [o.delta[j] for j in live]
            wgt = coef * o.prob
            nz = [k for k in range(q) if d[k]]
            for r in nz:
                f = wgt * d[r]
                for s in nz:
                    b[r][s] += f * d[s]
    return RatMatrix._raw(b)


def verify_spectrum(u: UrnSpec, a: RatMatrix | None = None) -> tuple[RatPoly, RatPoly]:
    """Check ``char_poly(A)`` against the predicted product on the live block.

    Raises
    ------
    SpectrumMismatch
    """
    live = live_indices(u)
    if a is None:
        a = u.intensity().submatrix(live, live)
    actual = char_poly(a)
    predicted = predicted_charpoly(u)
    if actual != predicted:
        raise SpectrumMismatch(actual, predicted)
    return actual, predicted


def _balance_constant(u: UrnSpec, live: Sequence[int]) -> Fraction:
    cs = {sum(u.activities[j] * o.delta[j] for j in range(u.q)) for i in live for o in u.outcomes[i]}
    if len(cs) != 1:
        raise ValueError(f"urn is not balanced: a . delta takes values {sorted(cs)}")
    return cs.pop()


def analyze_urn(
    u: UrnSpec,
    sigma_method: str = "auto",
    with_sigma: bool = True,
    check_spectrum: bool = True,
) -> UrnAnalysis:
    """Exact mean and covariance of the urn composition.

    Parameters
    ----------
    sigma_method : {"auto", "kronecker", "blocks"}
        Route for the Sylvester equation; see :mod:`urnlab.sylvester`.
    with_sigma : bool
        Skip the covariance (and the normal-regime gate) when False.
    check_spectrum : bool
        Compare with :func:`urnlab.urns.predicted_charpoly` when the builder
        supports a prediction.

    Raises
    ------
    NotNormalRegime
        If ``with_sigma`` and the covariance limit does not exist.
    SpectrumMismatch
    """
    live = live_indices(u)
    if not live:
        raise ValueError("urn has no type with positive activity")
    a = u.intensity().submatrix(live, live)
    q = len(live)
    c = _balance_constant(u, live)
    if c <= 0:
        raise ValueError("total activity does not grow")
    u1 = tuple(u.activities[i] for i in live)
    left = (RatMatrix._raw([list(u1)]) @ a).row(0)
    if left != tuple(x * c for x in u1):
        raise ArithmeticError("activities are not a left eigenvector")
    ker = nullspace(a - RatMatrix.identity(q) * c)
    if len(ker) != 1:
        raise ArithmeticError(f"principal eigenvalue {c} is not simple")
    k = ker[0]
    scale = sum(x * y for x, y in zip(u1, k))
    v1 = tuple(x / scale for x in k)
    mu = tuple(c * x for x in v1)
    p = char_poly(a)
    predicted = None
    if check_spectrum:
        try:
            predicted = predicted_charpoly(u)
        except ValueError:
            predicted = None
        if predicted is not None and predicted != p:
            raise SpectrumMismatch(p, predicted)
    rest, rem = divmod(p, RatPoly([-c, 1]))
    if rem:
        raise ArithmeticError("lambda1 is not a root of the characteristic polynomial")
    others = poly_roots(rest) if rest.degree >= 1 else []
    roots = [ComplexRoot(complex(float(c)), 0.0, 1)] + others
    gamma = max((r.real + r.radius for r in others), default=-math.inf)
    analysis = UrnAnalysis(u, live, [u.types[i].label for i in live], a, c, u1, v1, mu, p, roots, gamma, predicted=predicted)
    if not with_sigma:
        return analysis
    if gamma >= c / 2:
        diag = {"gamma": gamma, "lambda1": str(c)}
        if u.meta.get("model") in ("mst-fringe", "protected", "mst-degree"):
            g = gamma_condition(u.meta["m"])
            diag.update({"m": u.meta["m"], "gamma_m": g.gamma, "radius": g.radius})
        raise NotNormalRegime(
            f"largest non-principal real part {gamma:.6g} >= lambda1/2 = {float(c) / 2:.6g}; no normal limit",
            gamma,
            c,
            diag,
        )
    b = compute_b(u, live, v1)
    proj = RatMatrix.identity(q) - RatMatrix._raw([[v1[i] * u1[j] for j in range(q)] for i in range(q)])
    rhs = -(proj @ b @ proj.T)
    shifted = a - RatMatrix.identity(q) * (c / 2)
    method = sigma_method
    if method == "auto":
        method = "kronecker" if q <= 10 else "blocks"
    x = solve_sylvester(shifted, rhs, method=method, constraints=[u1])
    sigma = x * c
    analysis.B = b
    analysis.Sigma = sigma
    analysis.method = method
    return analysis


def _eigenbasis(a: np.ndarray, cluster_tol: float = 1e-6):
    """Eigenvalues and a basis of eigenvectors built one eigenspace at a time.

    Numerically equal eigenvalues are grouped and their eigenspace is taken
    from the SVD of ``A - lambda I``; returns None when some eigenspace is too
    small, i.e. ``A`` is not diagonalizable.
    """
    lam = np.linalg.eigvals(a)
    used = np.zeros(len(lam), dtype=bool)
    vals, cols = [], []
    n = a.shape[0]
    for i in range(len(lam)):
        if used[i]:
            continue
        group = np.abs(lam - lam[i]) < cluster_tol * max(1.0, abs(lam[i]))
        group &= ~used
        used |= group
        k = int(group.sum())
        centre = lam[group].mean()
        _, sv, vh = np.linalg.svd(a - centre * np.eye(n))
        if sv[n - k] > 1e-7 * max(1.0, sv[0]):
            return None
        for row in vh[n - k :]:
            vals.append(centre)
            cols.append(row.conj())
    return np.array(vals), np.array(cols).T


def cross_check_sigma_diag(an: UrnAnalysis, cond_limit: float = 1e10) -> float | None:
    """Floating-point covariance from an eigendecomposition of ``A``.

    Evaluates ``c * sum_{j,k != 1} (u_j' B u_k) / (lambda1 - lambda_j - lambda_k)
    v_j v_k'`` with dual bases ``U = V^{-1}`` and returns the largest absolute
    deviation from the exact ``Sigma``.  Returns None (skipped) when ``A`` is
    not diagonalizable or its eigenvector basis is too ill-conditioned.
    """
    if an.Sigma is None or an.B is None:
        raise ValueError("analysis has no covariance")
    a = an.A.to_float()
    basis = _eigenbasis(a)
    if basis is None:
        return None
    lam, vecs = basis
    if np.linalg.cond(vecs) > cond_limit:
        return None
    dual = np.linalg.inv(vecs)
    c = float(an.lambda1)
    principal = int(np.argmin(np.abs(lam - c)))
    g = dual @ an.B.to_float() @ dual.T
    h = 1.0 / (c - lam[:, None] - lam[None, :])
    h[principal, :] = 0.0
    h[:, principal] = 0.0
    sigma = c * (vecs @ (g * h) @ vecs.T)
    return float(np.max(np.abs(sigma.real - an.Sigma.to_float())))


# ---------------------------------------------------------------------------
# projections onto statistics


def fringe_projection(an: UrnAnalysis, targets: Sequence[str] | None = None) -> RatMatrix:
    """Matrix ``R`` with ``R[i][T]`` = number of copies of target ``i`` inside type ``T``."""
    meta = an.urn.meta
    model = meta.get("model")
    mode = IsoMode.coerce(meta.get("mode", "ordered"))
    if targets is None:
        targets = meta["targets"]
    rows = []
    for tgt in targets:
        row = []
        for lab in an.labels:
            if model == "mst-fringe":
                t = parse_mst(lab, meta["m"])
                key = canonical(parse_mst(tgt, meta["m"]), mode)
                row.append(Fraction(fringe_census(t, [key], mode)[key]))
            elif model == "pa-fringe":
                if lab == "*":
                    row.append(Fraction(0))
                    continue
                key = canonical_pa(parse_pa(tgt), mode)
                row.append(Fraction(pa_fringe_census(parse_pa(lab), [key], mode)[key]))
            else:
                raise ValueError(f"fringe projection needs a fringe urn, got {model!r}")
        rows.append(row)
    return RatMatrix._raw(rows)


def project(an: UrnAnalysis, r: RatMatrix) -> tuple[tuple[Fraction, ...], RatMatrix | None]:
    """``(R mu, R Sigma R')``."""
    mu_f = r.apply(an.mu)
    sig = None if an.Sigma is None else r @ an.Sigma @ r.T
    return mu_f, sig


def functional_moments(an: UrnAnalysis, f: Sequence, const=Fraction(0)) -> tuple[Fraction, Fraction | None]:
    """Mean and variance per unit time of ``f . X_n + const * n``."""
    f = [Fraction(x) for x in f]
    mean = sum((x * y for x, y in zip(f, an.mu)), Fraction(0)) + Fraction(const)
    if an.Sigma is None:
        return mean, None
    sf = an.Sigma.apply(f)
    return mean, sum((x * y for x, y in zip(f, sf)), Fraction(0))


def _xvec(label: str) -> tuple[int, ...]:
    return tuple(int(c) for c in label.strip("()").split(","))


def protected_functional(an: UrnAnalysis) -> tuple[list[Fraction], Fraction]:
    """Linear functional and constant giving the protected-node count.

    Protected nodes are the balls of types ``(i, 0, ..., 0)``, the dead type
    included.  Dead balls are not tracked, but every key lies in exactly one
    ball, so ``dead = (n - sum_x keys(x) X_x) / (m - 1)`` with
    ``keys(x) = m - 1 + sum_i (i - 1) x_i``.
    """
    m = an.urn.meta["m"]
    f = []
    for lab in an.labels:
        x = _xvec(lab)
        ind = 1 if sum(x[1:]) == 0 else 0
        keys = (m - 1) + sum(i * c for i, c in enumerate(x))
        f.append(ind - Fraction(keys, m - 1))
    return f, Fraction(1, m - 1)


def mst_degree_functional(an: UrnAnalysis) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Rows and constants expressing ``D_0 .. D_m`` in the m-ary degree urn.

    Type ``i`` (1-based) has out-degree 0 for ``2 <= i <= m``, ``i - m`` for
    ``m < i <= 2m - 2`` and ``m - 1`` for ``i = 1``; nodes of degree ``m``
    are dead and follow from the key count.
    """
    m = an.urn.meta["m"]
    q = 2 * m - 2
    rows = [[Fraction(0)] * q for _ in range(m + 1)]
    keys = []
    for i in range(1, q + 1):
        if i == 1:
            deg = m - 1
            k = m - 1
        elif i <= m - 1:
            deg, k = 0, i - 1
        elif i == m:
            deg, k = 0, m - 1
        else:
            deg, k = i - m, m - 1
        rows[deg][i - 1] += 1
        keys.append(k)
    rows[m] = [Fraction(-k, m - 1) for k in keys]
    consts = [Fraction(0)] * m + [Fraction(1, m - 1)]
    return rows, consts


def affine_project(an: UrnAnalysis, rows, consts) -> tuple[tuple[Fraction, ...], RatMatrix | None]:
    r = RatMatrix._raw([[Fraction(x) for x in row] for row in rows])
    mu_f, sig = project(an, r)
    return tuple(x + Fraction(c) for x, c in zip(mu_f, consts)), sig


# ---------------------------------------------------------------------------
# closed forms


def harmonic(m: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, m + 1)), Fraction(0))


def hmu_mst(targets: Iterable[MstTree], m: int, mode=IsoMode.ORDERED) -> tuple[Fraction, ...]:
    """Limit of ``E X_n^T / n``: ``P(T_k = T) / ((H_m - 1)(k + 1)(k + 2))``."""
    h = harmonic(m) - 1
    out = []
    for t in targets:
        if isinstance(t, str):
            t = parse_mst(t, m)
        k = t.keys
        out.append(prob_mst_equals(t, mode) / (h * (k + 1) * (k + 2)))
    return tuple(out)


def hmu_pa(targets: Iterable[PaTree], w: PaWeights, mode=IsoMode.ORDERED) -> tuple[Fraction, ...]:
    """Limit of ``E X_n^T / n``: ``P(L_k = T) kappa / ((k + kappa - 1)(k + kappa))``."""
    kappa = w.kappa
    out = []
    for t in targets:
        if isinstance(t, str):
            t = parse_pa(t)
        k = t.size
        out.append(prob_pa_equals(t, w, mode) * kappa / ((k + kappa - 1) * (k + kappa)))
    return tuple(out)


def protected_mean(m: int) -> Fraction:
    """Limit of (protected nodes) / n in the m-ary search tree."""
    total = Fraction(0)
    for l in range(m):
        s = m * (m - l)
        total += Fraction(math.factorial(m), math.factorial(m - l)) * Fraction(math.factorial(s), math.factorial(s + l + 1))
    return total / (m * (harmonic(m) - 1))


def degree_means(model: str, m: int | None = None, w: PaWeights | None = None, kmax: int | None = None) -> tuple[Fraction, ...]:
    """Limits of (nodes with out-degree k) / n.

    For ``model="mst"`` returns ``k = 0 .. m`` per key; for ``model="pa"``
    returns ``k = 0 .. kmax`` per node.
    """
    if model == "mst":
        h = harmonic(m) - 1
        mu0 = Fraction(m - 1) / (2 * h * (m + 1))
        rest = 1 / (h * m * (m + 1))
        return (mu0,) + (rest,) * m
    if model == "pa":
        w1 = w.w(1)
        out = []
        p = w1 / (w.w(0) + w1)
        for k in range(kmax + 1):
            if k:
                p *= w.w(k - 1) / (w.w(k) + w1)
            out.append(p)
        return tuple(out)
    raise ValueError(f"unknown model {model!r}")
