"""Kantorovich-type positive linear operators on [0, b_n].

The central operator maps f to

    sum_{k=0}^{n+m} w_k(x/b_n) * integral_0^1 f(node_k(t)) d_pq t,

with basis weights

    w_k(s) = [n+m k] s^k prod_{j=0}^{n+m-k-1} (p^j - q^j s)        (literal)

and integration nodes

    node_k(t) = ((1-t) [k] + [k+1] t + alpha) b_n / ([n+1] + beta).

The literal weights do not sum to one for p < 1 (already at n+m = 2,
p = 0.9, q = 0.8, s = 0.5 the sum is 0.925).  `normalized` mode rescales
weight k by p^{k(k-1)/2 - (n+m)(n+m-1)/2}, which restores the partition
of unity exactly; it is the default because constants are then
reproduced, the property every error bound here relies on.

Key computational identity: the normalized weights coincide with the
one-parameter basis at ratio r = q/p,

    w_k(s) = [n+m k]_r s^k prod_{j<n+m-k} (1 - r^j s),

whose factors are all in [0, 1]; the float path evaluates this form, so
weights stay overflow-free up to n+m ~ 1000 (the (p,q)-binomial itself
tops out near C(1000, 500) ~ 1e299).

Inner integrals are evaluated exactly for polynomial integrands (monomial
rule) and piecewise-linear integrands (geometric tail sums), by the
truncated series for general f when q < p, and by fixed Gauss-Legendre
quadrature for general f in the classical limit p = q = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad

from .errors import ConvergenceError, DomainError, RegimeError
from .functions import FunctionHandle, PiecewiseLinear
from .pq_calculus import (
    MIN_TERMS,
    TERM_CAP,
    PQPair,
    Scalar,
    _as_vectorized,
    bracket_table,
    pq_binomial,
    pq_integer,
    pq_integral_monomial,
)

MODES = ("literal", "normalized")


@dataclass(frozen=True)
class OperatorParams:
    """Full parameter set of one operator instance.

    n >= 1 is the principal degree, m >= 0 extends the summation range,
    (alpha, beta) with 0 <= alpha <= beta shift the nodes, b_n > 0 scales
    [0, 1] up to [0, b_n].  Integer alpha, beta, m are the documented
    regime; real values are accepted as a superset.  `mode` selects the
    basis normalization (see module docstring).
    """

    n: int
    m: int = 0
    alpha: Scalar = 0.0
    beta: Scalar = 0.0
    b_n: Scalar = 1.0
    mode: str = "normalized"

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 1):
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if not (isinstance(self.m, int) and self.m >= 0):
            raise DomainError(f"m must be a nonnegative integer, got {self.m}")
        if not (0 <= self.alpha <= self.beta):
            raise DomainError(
                f"require 0 <= alpha <= beta, got alpha={self.alpha}, beta={self.beta}"
            )
        if not self.b_n > 0:
            raise DomainError(f"b_n must be positive, got {self.b_n}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def degree(self) -> int:
        """Summation range n + m."""
        return self.n + self.m

    def is_exact(self, pq: PQPair) -> bool:
        return pq.is_exact and all(
            isinstance(v, Rational) for v in (self.alpha, self.beta, self.b_n)
        )


@dataclass(frozen=True)
class WeightVector:
    """Basis weights at one point; weights[k] multiplies node integral k."""

    weights: Union[np.ndarray, List[Fraction]]
    x_norm: Scalar
    mode: str

    def total(self) -> Scalar:
        if isinstance(self.weights, np.ndarray):
            return float(np.sum(self.weights))
        return sum(self.weights)


def _check_x(params: OperatorParams, x: Scalar) -> Scalar:
    if not (0 <= x <= params.b_n):
        raise DomainError(f"x={x} outside [0, b_n] with b_n={params.b_n}")
    return x / params.b_n


def _weights_float(degree: int, pq: PQPair, x_norm: float, mode: str) -> np.ndarray:
    p = float(pq.p)
    r = float(pq.q) / p
    ks = np.arange(degree + 1)
    if r == 1.0:
        brackets = np.arange(1, degree + 1, dtype=float)
    else:
        brackets = (1.0 - r ** np.arange(1, degree + 1)) / (1.0 - r)
    if degree == 0:
        w = np.ones(1)
    else:
        ratios = brackets[::-1] / brackets  # [N-i]_r / [i+1]_r
        binoms = np.concatenate(([1.0], np.cumprod(ratios)))
        factors = 1.0 - (r ** np.arange(degree)) * x_norm
        prefix = np.concatenate(([1.0], np.cumprod(factors)))
        w = binoms * (x_norm ** ks) * prefix[degree - ks]
    if mode == "literal":
        # literal = normalized * p^{(N(N-1) - k(k-1))/2}, a factor <= 1
        exponents = (degree * (degree - 1) - ks * (ks - 1)) / 2.0
        w = w * p ** exponents
    return w


def _weights_exact(degree: int, pq: PQPair, x_norm, mode: str) -> List[Fraction]:
    p, q = Fraction(pq.p), Fraction(pq.q)
    s = Fraction(x_norm)
    out = []
    for k in range(degree + 1):
        prod = Fraction(1)
        for j in range(degree - k):
            prod *= p ** j - q ** j * s
        w = pq_binomial(degree, k, pq) * s ** k * prod
        if mode == "normalized":
            w *= p ** ((k * (k - 1) - degree * (degree - 1)) // 2)
        out.append(Fraction(w))
    return out


def basis_weights(params: OperatorParams, pq: PQPair, x: Scalar) -> WeightVector:
    """Basis weights at x in [0, b_n], in the mode set on `params`.

    Dispatches to exact rational arithmetic when every input is rational,
    float otherwise.  Normalized weights are nonnegative and sum to 1;
    literal weights are nonnegative only.
    """
    x_norm = _check_x(params, x)
    if params.is_exact(pq) and isinstance(x, Rational):
        w = _weights_exact(params.degree, pq, x_norm, params.mode)
    else:
        w = _weights_float(params.degree, pq, float(x_norm), params.mode)
        x_norm = float(x_norm)
    return WeightVector(weights=w, x_norm=x_norm, mode=params.mode)


def kantorovich_node(k: int, t: Scalar, params: OperatorParams, pq: PQPair) -> Scalar:
    """Integration-node map ((1-t) [k] + [k+1] t + alpha) b_n / ([n+1] + beta).

    Affine in t; for 0 <= k <= n+m and t in [0, 1/p] the values stay in
    [0, node_hull_max].
    """
    if not (0 <= k <= params.degree):
        raise DomainError(f"k={k} outside 0..{params.degree}")
    num = (1 - t) * pq_integer(k, pq) + pq_integer(k + 1, pq) * t + params.alpha
    return num * params.b_n / (pq_integer(params.n + 1, pq) + params.beta)


def node_hull_max(params: OperatorParams, pq: PQPair) -> float:
    """Upper end of the interval containing every argument f sees inside
    the operator: ([n+m+1]/p + alpha) b_n / ([n+1] + beta).  (The series
    integral samples t up to 1/p.)"""
    top = pq_integer(params.degree + 1, pq) / pq.p + params.alpha
    return float(top * params.b_n / (pq_integer(params.n + 1, pq) + params.beta))


def _node_affine(params: OperatorParams, pq: PQPair) -> Tuple[np.ndarray, np.ndarray]:
    """(A, B) with node_k(t) = A[k] + B[k] t, as float arrays."""
    br = bracket_table(params.degree + 2, pq)
    scale = float(params.b_n) / (br[params.n + 1] + float(params.beta))
    a = (br[: params.degree + 1] + float(params.alpha)) * scale
    b = (br[1: params.degree + 2] - br[: params.degree + 1]) * scale
    return a, b


def _poly_integrals(coeffs: Sequence[float], a: np.ndarray, b: np.ndarray,
                    pq: PQPair) -> np.ndarray:
    """Exact integral of sum_u c_u (A + B t)^u over [0,1] against d_pq t,
    via the monomial rule (integral of t^j is 1/[j+1])."""
    deg = len(coeffs) - 1
    mono = [float(pq_integral_monomial(j, pq)) for j in range(deg + 1)]
    out = np.zeros_like(a)
    for u, c in enumerate(coeffs):
        if c == 0:
            continue
        term = np.zeros_like(a)
        for j in range(u + 1):
            term += math.comb(u, j) * a ** (u - j) * b ** j * mono[j]
        out += float(c) * term
    return out


def _series_integrals(f: FunctionHandle, a: np.ndarray, b: np.ndarray,
                      pq: PQPair, rel_tol: float) -> np.ndarray:
    """Truncated series integrals of f(A_k + B_k t) for every k at once.

    Same node set and stop rule as `pq_integral_unit` (running-max tail
    bound checked per k at chunk boundaries); stops when every k meets it.
    """
    p = float(pq.p)
    q = float(pq.q)
    r = q / p
    call = _as_vectorized(f)
    acc = np.zeros_like(a)
    max_abs = np.zeros_like(a)
    j0 = 0
    chunk = 256
    while j0 < TERM_CAP:
        js = np.arange(j0, min(j0 + chunk, TERM_CAP))
        t = (r ** js) / p
        fv = call(a[:, None] + b[:, None] * t[None, :])
        acc += (p - q) * (fv @ t)
        max_abs = np.maximum(max_abs, np.max(np.abs(fv), axis=1))
        j0 = int(js[-1]) + 1
        tail = max_abs * ((p - q) / p) * r ** j0 / (1.0 - r)
        if j0 >= MIN_TERMS and np.all(tail <= rel_tol * np.abs(acc)):
            return acc
    raise ConvergenceError(
        f"inner series integrals did not converge within {TERM_CAP} terms (q/p={r})"
    )


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def _gl_integrals(f: FunctionHandle, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Classical integrals over [0,1] by 64-point Gauss-Legendre; exact to
    machine precision for smooth f (the p = q = 1 path for general f)."""
    call = _as_vectorized(f)
    fv = call(a[:, None] + b[:, None] * _GL_T[None, :])
    return fv @ _GL_W


def _pl_integrals_classical(pl: PiecewiseLinear, a: np.ndarray,
                            b: np.ndarray) -> np.ndarray:
    """Exact classical integral of the piecewise-linear f(A + Bt) on [0,1]:
    trapezoid rule over the affine segments."""
    out = np.empty_like(a)
    for k in range(len(a)):
        ak, bk = float(a[k]), float(b[k])
        cuts = [0.0, 1.0]
        if bk != 0.0:
            for xk in pl.xs[1:]:
                tau = (xk - ak) / bk
                if 0.0 < tau < 1.0:
                    cuts.append(tau)
        cuts = sorted(set(cuts))
        total = 0.0
        for lo, hi in zip(cuts, cuts[1:]):
            g_lo = float(pl(ak + bk * lo))
            g_hi = float(pl(ak + bk * hi))
            total += 0.5 * (g_lo + g_hi) * (hi - lo)
        out[k] = total
    return out


def _pl_integrals_strict(pl: PiecewiseLinear, a: np.ndarray, b: np.ndarray,
                         pq: PQPair) -> np.ndarray:
    """Exact series integral of piecewise-linear f(A + Bt) for q < p.

    The series is a point mass sum over nodes t_j = (q/p)^j / p.  On any
    node range where the integrand is affine a' + b' t, the partial sums
    are geometric:

        sum_{j>=J} (p-q) t_j       = r^J            (r = q/p)
        sum_{j>=J} (p-q) t_j^2     = r^{2J} / (p+q)

    so splitting at the kinks gives the exact value in O(#kinks) work per
    node map, independent of how slowly the series converges.
    """
    p = float(pq.p)
    q = float(pq.q)
    r = q / p
    t_max = 1.0 / p
    log_r = math.log(r)

    def count_above(tau: float) -> int:
        # number of node indices j with t_j > tau
        if tau >= t_max:
            return 0
        return max(0, math.ceil(math.log(p * tau) / log_r))

    def s0(j: Optional[int]) -> float:
        return 0.0 if j is None else r ** j

    def s1(j: Optional[int]) -> float:
        return 0.0 if j is None else r ** (2 * j) / (p + q)

    out = np.empty_like(a)
    for k in range(len(a)):
        ak, bk = float(a[k]), float(b[k])
        taus = []
        if bk != 0.0:
            for xk in pl.xs[1:]:
                tau = (xk - ak) / bk
                if 0.0 < tau < t_max:
                    taus.append(tau)
        edges = [t_max] + sorted(set(taus), reverse=True) + [0.0]
        total = 0.0
        for hi, lo in zip(edges, edges[1:]):
            icpt, slope = pl.piece_at(ak + bk * 0.5 * (hi + lo))
            ga = icpt + slope * ak
            gb = slope * bk
            j_lo = count_above(hi)
            j_hi = count_above(lo) if lo > 0.0 else None
            total += ga * (s0(j_lo) - s0(j_hi)) + gb * (s1(j_lo) - s1(j_hi))
        out[k] = total
    return out


def _inner_integrals(f: FunctionHandle, a: np.ndarray, b: np.ndarray,
                     pq: PQPair, rel_tol: float) -> np.ndarray:
    if f.polynomial_coeffs is not None:
        return _poly_integrals(f.polynomial_coeffs, a, b, pq)
    if pq.is_classical:
        if f.piecewise_linear is not None:
            return _pl_integrals_classical(f.piecewise_linear, a, b)
        return _gl_integrals(f, a, b)
    if not pq.is_strict:
        raise RegimeError(
            "p = q < 1 supports only polynomial integrands (monomial rule); "
            "general integration needs q < p or p = q = 1"
        )
    if f.piecewise_linear is not None:
        return _pl_integrals_strict(f.piecewise_linear, a, b, pq)
    return _series_integrals(f, a, b, pq, rel_tol)


def apply_operator(f: FunctionHandle, x: Scalar, params: OperatorParams,
                   pq: PQPair, rel_tol: float = 1e-12) -> float:
    """Evaluate the operator at x in [0, b_n].

    Requires q < p, p = q = 1, or a polynomial f (any regime).  Linear,
    positive, and monotone in f; reproduces constants exactly in
    normalized mode.
    """
    x_norm = float(_check_x(params, x))
    w = _weights_float(params.degree, pq, x_norm, params.mode)
    a, b = _node_affine(params, pq)
    return float(np.dot(w, _inner_integrals(f, a, b, pq, rel_tol)))


def operator_profile(f: FunctionHandle, params: OperatorParams, pq: PQPair,
                     xs, rel_tol: float = 1e-12) -> np.ndarray:
    """Operator values at every x in xs (each within [0, b_n]).

    The inner integrals do not depend on x, so they are computed once and
    only the weights vary across the grid; identical results to calling
    `apply_operator` pointwise."""
    a, b = _node_affine(params, pq)
    integrals = _inner_integrals(f, a, b, pq, rel_tol)
    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        x_norm = float(_check_x(params, x))
        w = _weights_float(params.degree, pq, x_norm, params.mode)
        out[i] = float(np.dot(w, integrals))
    return out


def apply_unit_operator(f: FunctionHandle, x: Scalar, n: int, m: int, pq: PQPair,
                        mode: str = "normalized", rel_tol: float = 1e-12) -> float:
    """The operator specialized to alpha = beta = 0, b_n = 1 (domain [0, 1])."""
    params = OperatorParams(n=n, m=m, alpha=0.0, beta=0.0, b_n=1.0, mode=mode)
    return apply_operator(f, x, params, pq, rel_tol)


def apply_extended(f: FunctionHandle, x: Scalar, params: OperatorParams,
                   pq: PQPair, rel_tol: float = 1e-12) -> float:
    """Extension to [0, inf): operator value on [0, b_n], f(x) beyond.

    x = b_n takes the operator branch (boundary convention).
    """
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x > params.b_n:
        return float(f.evaluator(float(x)))
    return apply_operator(f, x, params, pq, rel_tol)


def apply_classical_reference(f: FunctionHandle, x: Scalar,
                              params: OperatorParams) -> float:
    """Independent classical-limit oracle (p = q = 1 throughout).

    Bernstein weights C(n+m, k) s^k (1-s)^{n+m-k}, node map
    (k + t + alpha) b_n / (n+1+beta), and plain Riemann integrals over
    [0, 1]: power rule for polynomial f, adaptive quadrature otherwise.
    Shares no code with the (p,q) evaluation path; used only as an oracle.
    """
    s = float(_check_x(params, x))
    deg = params.degree
    alpha = float(params.alpha)
    scale = float(params.b_n) / (params.n + 1 + float(params.beta))
    total = 0.0
    for k in range(deg + 1):
        wk = math.comb(deg, k) * s ** k * (1.0 - s) ** (deg - k)
        if wk == 0.0:
            continue
        a_k = (k + alpha) * scale
        b_k = scale
        if f.polynomial_coeffs is not None:
            val = 0.0
            for u, c in enumerate(f.polynomial_coeffs):
                if c == 0:
                    continue
                val += float(c) * sum(
                    math.comb(u, j) * a_k ** (u - j) * b_k ** j / (j + 1)
                    for j in range(u + 1)
                )
        else:
            val, _err = quad(lambda t: float(f.evaluator(a_k + b_k * t)),
                             0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
        total += wk * val
    return total
