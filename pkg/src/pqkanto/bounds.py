"""Moduli of smoothness and rate-of-convergence bound reports.

Three bounds are evaluated per point:

  * Lipschitz bound   M * central2^{gamma/2}       for f in Lip_M(gamma),
  * modulus bound     2 * omega(f, sqrt(central2)),
  * two-term smoothness pair (omega_2(f, sqrt(peetre_arg)),
    omega(f, |bias|)) whose bound carries an unspecified constant and is
    therefore reported without a total.

central2 is always the direct-summation second central moment.  The first
two bounds are proven inequalities for a positive operator that
reproduces constants, so with exact moduli they must hold at every point;
`holds_*` flags assert exactly that and are set only when the modulus
comes from exact metadata, never from a grid estimate (grid estimates are
lower bounds of the true modulus and could fake a violation).

Moduli are measured over the node hull [0, node_hull_max]: the operator
never evaluates f outside it, and the bound proofs only need |t - x|
with t in the hull.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError
from .functions import FunctionHandle
from .moments import peetre_bound_args, second_central_moment
from .operators import OperatorParams, apply_operator, node_hull_max
from .pq_calculus import PQPair

#: Sampling defaults for grid-estimated moduli: offsets step delta/256,
#: base points step (hi - lo)/4096.  Keeps grid bias below the tolerances
#: asserted for the bundled test functions.
OFFSET_STEPS = 256
DOMAIN_STEPS = 4096

#: Multiplicative and additive slack when asserting a proven bound in floats.
HOLDS_RTOL = 1e-9
HOLDS_ATOL = 1e-12


def _eval(f: FunctionHandle, x: np.ndarray) -> np.ndarray:
    return np.asarray(f.evaluator(x), dtype=float)


def modulus(f: FunctionHandle, delta: float, domain: Tuple[float, float],
            grid_step: Optional[float] = None) -> float:
    """Modulus of continuity sup_{|t-x| <= delta} |f(t) - f(x)|.

    Returns exact metadata when the handle carries it; otherwise a grid
    estimate over `domain`, which is a lower estimate of the true value.
    """
    if delta < 0:
        raise DomainError(f"delta must be nonnegative, got {delta}")
    if f.exact_modulus is not None:
        return float(f.exact_modulus(delta))
    lo, hi = domain
    if hi <= lo:
        raise DomainError(f"empty domain [{lo}, {hi}]")
    if delta == 0:
        return 0.0
    step = grid_step if grid_step is not None else delta / OFFSET_STEPS
    if step <= 0:
        raise DomainError("grid_step must be positive")
    base = np.linspace(lo, hi, DOMAIN_STEPS + 1)
    f_base = _eval(f, base)
    offsets = np.arange(1, int(np.floor(delta / step)) + 1) * step
    if offsets.size == 0 or offsets[-1] < delta:
        offsets = np.append(offsets, delta)
    best = 0.0
    for h in offsets:
        shifted = base + h
        ok = shifted <= hi
        if not np.any(ok):
            continue
        diff = np.abs(_eval(f, shifted[ok]) - f_base[ok])
        best = max(best, float(np.max(diff)))
    return best


def second_modulus(f: FunctionHandle, delta: float, domain: Tuple[float, float],
                   grid_step: Optional[float] = None) -> float:
    """Second modulus sup_{0 < h <= delta} |f(x+2h) - 2 f(x+h) + f(x)|
    over x with x + 2h in `domain`; exact metadata honored."""
    if delta < 0:
        raise DomainError(f"delta must be nonnegative, got {delta}")
    if f.exact_second_modulus is not None:
        return float(f.exact_second_modulus(delta))
    lo, hi = domain
    if hi <= lo:
        raise DomainError(f"empty domain [{lo}, {hi}]")
    if delta == 0:
        return 0.0
    step = grid_step if grid_step is not None else delta / OFFSET_STEPS
    if step <= 0:
        raise DomainError("grid_step must be positive")
    base = np.linspace(lo, hi, DOMAIN_STEPS + 1)
    f_base = _eval(f, base)
    offsets = np.arange(1, int(np.floor(delta / step)) + 1) * step
    if offsets.size == 0 or offsets[-1] < delta:
        offsets = np.append(offsets, delta)
    best = 0.0
    for h in offsets:
        ok = base + 2 * h <= hi
        if not np.any(ok):
            continue
        x = base[ok]
        diff = np.abs(_eval(f, x + 2 * h) - 2.0 * _eval(f, x + h) + f_base[ok])
        best = max(best, float(np.max(diff)))
    return best


@dataclass
class BoundReport:
    """Observed error and every bound quantity at a single point.

    `lipschitz_bound` and `holds_lipschitz` are present only for handles
    carrying a Lipschitz pair; `holds_modulus` only when the modulus is
    exact metadata.  `bias` is signed; |bias| feeds the modulus."""

    x: float
    observed_error: float
    second_central_moment: float
    modulus_at_sqrt_moment: float
    modulus_bound: float
    peetre_arg: float
    bias: float
    second_modulus_at_sqrt_peetre: float
    modulus_at_abs_bias: float
    lipschitz_bound: Optional[float] = None
    holds_lipschitz: Optional[bool] = None
    holds_modulus: Optional[bool] = None

    def to_json_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


BOUND_CSV_FIELDS = (
    "x", "observed_error", "second_central_moment", "modulus_at_sqrt_moment",
    "modulus_bound", "lipschitz_bound", "peetre_arg", "bias",
    "second_modulus_at_sqrt_peetre", "modulus_at_abs_bias",
    "holds_lipschitz", "holds_modulus",
)


def _holds(observed: float, bound: float) -> bool:
    return observed <= bound * (1.0 + HOLDS_RTOL) + HOLDS_ATOL


def bound_report(f: FunctionHandle, x: float, params: OperatorParams, pq: PQPair,
                 rel_tol: float = 1e-12) -> BoundReport:
    """Evaluate observed error and all bound quantities at x in [0, b_n].

    Requires normalized mode: the bounds are proved for an operator that
    reproduces constants.  The sqrt argument of the second modulus clamps
    the printed peetre_arg at zero (it is reported unclamped)."""
    if params.mode != "normalized":
        raise DomainError("bound reports require normalized mode")
    kf = apply_operator(f, x, params, pq, rel_tol)
    fx = float(f.evaluator(float(x)))
    observed = abs(kf - fx)
    central2 = max(second_central_moment(params, pq, x), 0.0)
    hull = (0.0, node_hull_max(params, pq))
    om = modulus(f, float(np.sqrt(central2)), hull)
    mod_bound = 2.0 * om
    peetre_arg, bias = peetre_bound_args(params, pq, x)
    peetre_arg = float(peetre_arg)
    bias = float(bias)
    om2 = second_modulus(f, float(np.sqrt(max(peetre_arg, 0.0))), hull)
    om_bias = modulus(f, abs(bias), hull)
    lip_bound = None
    holds_lip = None
    if f.lip is not None:
        m_const, gamma = f.lip
        lip_bound = float(m_const) * central2 ** (float(gamma) / 2.0)
        holds_lip = _holds(observed, lip_bound)
    holds_mod = _holds(observed, mod_bound) if f.exact_modulus is not None else None
    return BoundReport(
        x=float(x),
        observed_error=observed,
        second_central_moment=central2,
        modulus_at_sqrt_moment=om,
        modulus_bound=mod_bound,
        peetre_arg=peetre_arg,
        bias=bias,
        second_modulus_at_sqrt_peetre=om2,
        modulus_at_abs_bias=om_bias,
        lipschitz_bound=lip_bound,
        holds_lipschitz=holds_lip,
        holds_modulus=holds_mod,
    )
