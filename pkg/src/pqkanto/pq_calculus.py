"""Primitives of two-parameter (p, q)-calculus.

For 0 < q <= p <= 1 the (p,q)-integer is

    [n] = p^{n-1} + p^{n-2} q + ... + q^{n-1},

which equals (p^n - q^n)/(p - q) when p != q and n p^{n-1} at p = q.
On top of it sit the (p,q)-factorial, binomial coefficient, the product
power

    (a + b)^n = (a + b)(pa + qb)(p^2 a + q^2 b) ... (p^{n-1} a + q^{n-1} b),

its expanded form, and the series-defined integral over [0, 1].

Every function in this module is pure and accepts either floats or
`fractions.Fraction` values inside `PQPair`; passing Fractions keeps the
whole computation exact (the artifact's identity-verification mode).
The series integral is float-only since it is an infinite sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Union

import numpy as np

from .errors import ConvergenceError, DomainError, RegimeError

Scalar = Union[float, Fraction]

#: Hard cap on series terms for the truncated (p,q)-integral.
TERM_CAP = 10 ** 6

#: Terms always summed before the tail-bound stop rule may fire; guards
#: against a spurious stop when the integrand vanishes at the first nodes.
MIN_TERMS = 16


@dataclass(frozen=True)
class PQPair:
    """Deformation parameters with the validity regime 0 < q <= p <= 1.

    q < p strictly is required by the series-based integral (queryable via
    `is_strict`); p = q = 1 is the classical limit.  Fields may be floats
    or Fractions; mixing is allowed but keeps only float accuracy.
    """

    p: Scalar
    q: Scalar

    def __post_init__(self):
        if not (0 < self.q <= self.p <= 1):
            raise DomainError(f"require 0 < q <= p <= 1, got p={self.p}, q={self.q}")

    @property
    def is_strict(self) -> bool:
        """True when q < p, the regime the series integral needs."""
        return self.q < self.p

    @property
    def is_classical(self) -> bool:
        return self.p == 1 and self.q == 1

    @property
    def is_exact(self) -> bool:
        """True when both parameters are rational (exact-arithmetic mode)."""
        return isinstance(self.p, Rational) and isinstance(self.q, Rational)


def pq_bracket(n: int, p: Scalar, q: Scalar) -> Scalar:
    """Raw homogeneous sum sum_{i<n} p^{n-1-i} q^i, no validation.

    Symmetric in (p, q) and well defined at p = q, unlike the quotient
    (p^n - q^n)/(p - q) it equals for p != q.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    acc = p * 0
    pw = acc + 1
    for _ in range(n):
        acc = pw + q * acc
        pw = pw * p
    return acc


def pq_integer(n: int, pq: PQPair) -> Scalar:
    """(p,q)-integer [n], via the homogeneous sum."""
    return pq_bracket(n, pq.p, pq.q)


def pq_integer_quotient(n: int, pq: PQPair) -> Scalar:
    """[n] via (p^n - q^n)/(p - q); requires q < p.

    Kept as an independent cross-check of `pq_integer`; the homogeneous
    sum is the production form because it is uniformly valid at p = q.
    """
    if not pq.is_strict:
        raise RegimeError("quotient form requires q < p")
    return (pq.p ** n - pq.q ** n) / (pq.p - pq.q)


def pq_factorial(n: int, pq: PQPair) -> Scalar:
    """[n]! = [n][n-1]...[1]; empty product is 1."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    acc = pq.p * 0 + 1
    for j in range(1, n + 1):
        acc = acc * pq_integer(j, pq)
    return acc


def pq_binomial(n: int, k: int, pq: PQPair) -> Scalar:
    """(p,q)-binomial coefficient [n]! / ([k]! [n-k]!).

    Exact inputs go through the factorials; float inputs use the product
    of ratios [n-i]/[i+1], which keeps intermediates near the magnitude
    of the result instead of near [n]!.
    """
    if k < 0 or n < 0:
        raise DomainError("n and k must be nonnegative")
    if k > n:
        raise DomainError(f"k={k} exceeds n={n}")
    if pq.is_exact:
        return pq_factorial(n, pq) / (pq_factorial(k, pq) * pq_factorial(n - k, pq))
    k = min(k, n - k)
    acc = 1.0
    for i in range(k):
        acc *= pq_integer(n - i, pq) / pq_integer(i + 1, pq)
    return acc


def pq_power(a: Scalar, b: Scalar, n: int, pq: PQPair) -> Scalar:
    """Product power (a + b)(pa + qb)...(p^{n-1} a + q^{n-1} b); empty = 1."""
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    p, q = pq.p, pq.q
    acc = p * 0 + 1
    pw_p = acc
    pw_q = acc
    for _ in range(n):
        acc = acc * (pw_p * a + pw_q * b)
        pw_p = pw_p * p
        pw_q = pw_q * q
    return acc


def pq_binomial_expand(a: Scalar, b: Scalar, n: int, pq: PQPair) -> Scalar:
    """Expanded form of `pq_power`:

        sum_k [n k] p^{(n-k)(n-k-1)/2} q^{k(k-1)/2} a^{n-k} b^k.

    The triangular power factors are essential: the naive expansion
    without them already contradicts the product definition at n = 2
    ((a+b)(pa+qb) has cross term (p+q)ab, matching [2] ab only with the
    factors p^0 q^0 in place and p a^2, q b^2 on the ends).  Equality
    with `pq_power` is exact in rational arithmetic and is covered by
    the test suite for n <= 12.
    """
    if n < 0:
        raise DomainError(f"n must be nonnegative, got {n}")
    p, q = pq.p, pq.q
    acc = p * 0
    for k in range(n + 1):
        acc = acc + (
            pq_binomial(n, k, pq)
            * p ** ((n - k) * (n - k - 1) // 2)
            * q ** (k * (k - 1) // 2)
            * a ** (n - k)
            * b ** k
        )
    return acc


def _as_vectorized(f) -> Callable[[np.ndarray], np.ndarray]:
    """Adapt a FunctionHandle or plain callable to ndarray evaluation."""
    evaluator = getattr(f, "evaluator", f)

    def call(t: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(evaluator(t), dtype=float)
            if out.shape != t.shape:
                raise ValueError
            return out
        except (TypeError, ValueError):
            return np.array([evaluator(float(v)) for v in t.ravel()],
                            dtype=float).reshape(t.shape)

    return call


def pq_integral_unit(f, pq: PQPair, rel_tol: float = 1e-12) -> float:
    """Truncated series for the integral of f over [0, 1]:

        (p - q) * sum_{j>=0} (q^j / p^{j+1}) f(q^j / p^{j+1}).

    Requires q < p strictly.  The nodes q^j/p^{j+1} start at 1/p (which
    exceeds 1 when p < 1), so f must be evaluable on [0, 1/p].  Truncation
    stops once the geometric tail bound

        M * (p-q)/p * (q/p)^{J+1} / (1 - q/p),   M = running max |f|,

    drops to rel_tol times |accumulated value|, after at least MIN_TERMS
    terms; exceeding TERM_CAP raises ConvergenceError.  The running max
    makes the bound rigorous for f whose magnitude on the unvisited nodes
    does not exceed the visited ones.
    """
    if not pq.is_strict:
        raise RegimeError("series integral requires q < p strictly")
    if rel_tol <= 0:
        raise DomainError("rel_tol must be positive")
    p = float(pq.p)
    q = float(pq.q)
    r = q / p
    call = _as_vectorized(f)
    acc = 0.0
    max_abs = 0.0
    j0 = 0
    chunk = 256
    while j0 < TERM_CAP:
        js = np.arange(j0, min(j0 + chunk, TERM_CAP))
        t = (r ** js) / p
        fv = call(t)
        acc += float(np.sum((p - q) * t * fv))
        max_abs = max(max_abs, float(np.max(np.abs(fv))))
        j0 = int(js[-1]) + 1
        tail = max_abs * (p - q) / p * r ** j0 / (1.0 - r)
        if j0 >= MIN_TERMS and tail <= rel_tol * abs(acc):
            return acc
    raise ConvergenceError(
        f"series integral did not reach rel_tol={rel_tol} within {TERM_CAP} terms "
        f"(q/p={r})"
    )


def pq_integral_monomial(j: int, pq: PQPair) -> Scalar:
    """Closed form of the unit-interval integral of t^j: 1/[j+1].

    Follows from summing the geometric series (p-q) sum_k (q^k/p^{k+1})^{j+1}
    = (p-q)/(p^{j+1} - q^{j+1}).  Valid at p = q as well, where the series
    definition itself degenerates.
    """
    if j < 0:
        raise DomainError(f"j must be nonnegative, got {j}")
    one = pq.p * 0 + 1
    return one / pq_integer(j + 1, pq)


def bracket_table(count: int, pq: PQPair) -> np.ndarray:
    """Float [0], [1], ..., [count-1] via the Horner recurrence
    [k+1] = p^k + q [k]; one pass, numerically equivalent to the
    homogeneous sums."""
    p = float(pq.p)
    q = float(pq.q)
    out = np.empty(count)
    if count == 0:
        return out
    out[0] = 0.0
    pw = 1.0
    for k in range(1, count):
        out[k] = pw + q * out[k - 1]
        pw *= p
    return out


def math_comb_table(n: int) -> np.ndarray:
    """Classical binomial row C(n, 0..n) as floats (oracle helper)."""
    return np.array([math.comb(n, k) for k in range(n + 1)], dtype=float)
