"""Named test functions with optional structure metadata.

A `FunctionHandle` bundles an evaluator on [0, inf) with whatever exact
structure is known about it: polynomial coefficients, a piecewise-linear
description, a Lipschitz pair (M, gamma), exact moduli of continuity, or
a support bound.  The operator code exploits the structure (polynomials
and piecewise-linear functions integrate exactly); the bound code uses
the moduli; everything else falls back to generic numerics.

Builtin registry names (stable CLI surface):

    const1, id, square, sin, absdev:<a>, lip:<a>:<gamma>, bump:<C>
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on [0, inf).

    Defined by breakpoints (xs[i], ys[i]) with xs ascending and xs[0] = 0,
    extended beyond xs[-1] with slope `end_slope`.  Slope changes happen
    only at the interior breakpoints xs[1:].
    """

    xs: Tuple[float, ...]
    ys: Tuple[float, ...]
    end_slope: float = 0.0

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 1:
            raise DomainError("breakpoint lists must be nonempty and equal length")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise DomainError("breakpoints must be strictly ascending")

    def piece_at(self, x: float) -> Tuple[float, float]:
        """(intercept, slope) of the affine piece active at x."""
        xs, ys = self.xs, self.ys
        if x >= xs[-1] or len(xs) == 1:
            s = self.end_slope
            return ys[-1] - s * xs[-1], s
        i = int(np.searchsorted(xs, x, side="right")) - 1
        i = max(i, 0)
        s = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
        return ys[i] - s * xs[i], s

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.asarray(self.xs)
        ys = np.asarray(self.ys)
        out = np.interp(x, xs, ys)
        beyond = x > xs[-1]
        if np.any(beyond):
            out = np.where(beyond, ys[-1] + self.end_slope * (x - xs[-1]), out)
        below = x < xs[0]
        if np.any(below):
            icpt, s = (self.piece_at(xs[0]) if len(xs) > 1
                       else (ys[-1] - self.end_slope * xs[-1], self.end_slope))
            out = np.where(below, icpt + s * x, out)
        return out if out.shape else float(out)


@dataclass(frozen=True)
class FunctionHandle:
    """A named real function on [0, inf) plus optional exact metadata.

    Metadata, when present, must agree with the evaluator; the test suite
    spot-checks this.  `lip` is a pair (M, gamma) certifying
    |f(t) - f(x)| <= M |t - x|^gamma; `exact_modulus` maps delta to the
    modulus of continuity over [0, inf); `support_bound` C certifies
    f == 0 on [C, inf).
    """

    name: str
    evaluator: Callable
    lip: Optional[Tuple[float, float]] = None
    exact_modulus: Optional[Callable[[float], float]] = None
    exact_second_modulus: Optional[Callable[[float], float]] = None
    support_bound: Optional[float] = None
    polynomial_coeffs: Optional[Tuple[float, ...]] = None
    piecewise_linear: Optional[PiecewiseLinear] = None

    def __call__(self, x):
        return self.evaluator(x)


def polynomial_handle(name: str, coeffs: Sequence) -> FunctionHandle:
    """Handle for sum_i coeffs[i] * x^i (ascending order)."""
    coeffs = tuple(coeffs)

    def ev(x, _c=coeffs):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in reversed(_c):
            out = out * x + float(c)
        return out if out.shape else float(out)

    return FunctionHandle(name=name, evaluator=ev, polynomial_coeffs=coeffs)


def const1() -> FunctionHandle:
    h = polynomial_handle("const1", (1.0,))
    return FunctionHandle(
        name="const1", evaluator=h.evaluator, polynomial_coeffs=(1.0,),
        lip=(0.0, 1.0), exact_modulus=lambda d: 0.0,
        exact_second_modulus=lambda d: 0.0,
    )


def identity() -> FunctionHandle:
    h = polynomial_handle("id", (0.0, 1.0))
    return FunctionHandle(
        name="id", evaluator=h.evaluator, polynomial_coeffs=(0.0, 1.0),
        lip=(1.0, 1.0), exact_modulus=lambda d: float(d),
        exact_second_modulus=lambda d: 0.0,
    )


def square() -> FunctionHandle:
    # unbounded on [0, inf): no global modulus, no Lipschitz pair
    h = polynomial_handle("square", (0.0, 0.0, 1.0))
    return FunctionHandle(
        name="square", evaluator=h.evaluator, polynomial_coeffs=(0.0, 0.0, 1.0),
        exact_second_modulus=lambda d: 2.0 * d * d,
    )


def sine() -> FunctionHandle:
    # modulus over [0, inf): 2 sin(delta/2) for delta <= pi, else 2
    def mod(d):
        return 2.0 if d >= np.pi else float(2.0 * np.sin(d / 2.0))

    return FunctionHandle(
        name="sin", evaluator=lambda x: np.sin(x), lip=(1.0, 1.0),
        exact_modulus=mod,
    )


def absdev(a: float) -> FunctionHandle:
    """|x - a|: kink at a, slope 1 beyond; exact modulus delta."""
    if a < 0:
        raise DomainError("absdev requires a >= 0")
    if a == 0:
        pl = PiecewiseLinear(xs=(0.0,), ys=(0.0,), end_slope=1.0)
    else:
        pl = PiecewiseLinear(xs=(0.0, float(a)), ys=(float(a), 0.0), end_slope=1.0)
    return FunctionHandle(
        name=f"absdev:{a:g}", evaluator=lambda x: np.abs(np.asarray(x, float) - a),
        lip=(1.0, 1.0), exact_modulus=lambda d: float(d), piecewise_linear=pl,
    )


def lip_handle(a: float, gamma: float) -> FunctionHandle:
    """|x - a|^gamma for gamma in (0, 1]; member of Lip_1(gamma).

    |u^g - v^g| <= |u - v|^g for u, v >= 0 gives the Lipschitz certificate
    and the exact modulus delta^gamma (attained at the kink).
    """
    if a < 0:
        raise DomainError("lip requires a >= 0")
    if not (0 < gamma <= 1):
        raise DomainError("lip requires gamma in (0, 1]")

    def ev(x, _a=float(a), _g=float(gamma)):
        return np.abs(np.asarray(x, float) - _a) ** _g

    pl = absdev(a).piecewise_linear if gamma == 1.0 else None
    return FunctionHandle(
        name=f"lip:{a:g}:{gamma:g}", evaluator=ev, lip=(1.0, float(gamma)),
        exact_modulus=lambda d, _g=float(gamma): float(d) ** _g,
        piecewise_linear=pl,
    )


def bump(c: float) -> FunctionHandle:
    """Hat max(0, 1 - x/C): supported on [0, C], Lipschitz 1/C.

    Exact modulus min(1, delta/C); satisfies the vanishing-function
    hypothesis of the unweighted sup-error sweep.
    """
    if c <= 0:
        raise DomainError("bump requires C > 0")
    pl = PiecewiseLinear(xs=(0.0, float(c)), ys=(1.0, 0.0), end_slope=0.0)
    return FunctionHandle(
        name=f"bump:{c:g}", evaluator=pl, lip=(1.0 / c, 1.0),
        exact_modulus=lambda d, _c=float(c): min(1.0, float(d) / _c),
        support_bound=float(c), piecewise_linear=pl,
    )


BUILTIN_NAMES = ("const1", "id", "square", "sin",
                 "absdev:<a>", "lip:<a>:<gamma>", "bump:<C>")


def builtin(name: str) -> FunctionHandle:
    """Resolve a registry name (see BUILTIN_NAMES) to a handle."""
    plain = {"const1": const1, "id": identity, "square": square, "sin": sine}
    if name in plain:
        return plain[name]()
    head, _, rest = name.partition(":")
    try:
        if head == "absdev" and rest:
            return absdev(float(rest))
        if head == "bump" and rest:
            return bump(float(rest))
        if head == "lip" and rest:
            a_str, _, g_str = rest.partition(":")
            return lip_handle(float(a_str), float(g_str))
    except ValueError as exc:
        raise DomainError(f"bad parameters in function name {name!r}") from exc
    raise DomainError(
        f"unknown function {name!r}; builtins: {', '.join(BUILTIN_NAMES)}"
    )
