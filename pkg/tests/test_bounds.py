import numpy as np
import pytest

from pqkanto import (
    DomainError,
    OperatorParams,
    PQPair,
    bound_report,
    builtin,
    modulus,
    node_hull_max,
    polynomial_handle,
    second_modulus,
)
from pqkanto.bounds import BOUND_CSV_FIELDS
from pqkanto.functions import FunctionHandle

P11 = PQPair(1, 1)


def stripped(handle):
    """Same evaluator, no metadata: forces the grid estimators."""
    return FunctionHandle(name="plain", evaluator=handle.evaluator)


class TestModulus:
    def test_linear_slope(self):
        lin = polynomial_handle("3x", (0.0, 3.0))
        assert modulus(lin, 0.2, (0.0, 2.0)) == pytest.approx(0.6, abs=1e-12)

    def test_constant_is_zero(self):
        c = stripped(builtin("const1"))
        assert modulus(c, 0.5, (0.0, 1.0)) == 0.0

    def test_square_example(self):
        # true modulus on [0,1] with delta=0.1 is 2*0.9*0.1 + 0.01 = 0.19
        got = modulus(builtin("square"), 0.1, (0.0, 1.0))
        assert got <= 0.19 + 1e-12
        assert got == pytest.approx(0.19, abs=2e-3)

    def test_exact_metadata_shortcut(self):
        h = builtin("absdev:5")
        assert modulus(h, 0.37, (0.0, 100.0)) == 0.37

    def test_grid_estimate_below_exact(self):
        h = builtin("absdev:1")
        for delta in (0.1, 0.5, 1.3):
            est = modulus(stripped(h), delta, (0.0, 4.0))
            assert est <= h.exact_modulus(delta) + 1e-12

    def test_nondecreasing_and_zero_at_zero(self):
        h = stripped(builtin("sin"))
        deltas = [0.0, 0.1, 0.5, 1.0, 2.0]
        vals = [modulus(h, d, (0.0, 8.0)) for d in deltas]
        assert vals[0] == 0.0
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_rejects_negative_delta(self):
        with pytest.raises(DomainError):
            modulus(builtin("id"), -0.1, (0.0, 1.0))

    def test_rejects_empty_domain(self):
        with pytest.raises(DomainError):
            modulus(stripped(builtin("id")), 0.1, (1.0, 1.0))


class TestSecondModulus:
    def test_linear_vanishes(self):
        lin = polynomial_handle("lin", (2.0, -3.0))
        assert second_modulus(lin, 0.3, (0.0, 2.0)) == pytest.approx(0.0, abs=1e-12)

    def test_square_exact(self):
        assert second_modulus(builtin("square"), 0.1, (0.0, 1.0)) == \
            pytest.approx(0.02, rel=1e-12)

    def test_square_grid_matches_exact(self):
        h = stripped(builtin("square"))
        got = second_modulus(h, 0.1, (0.0, 1.0))
        assert got == pytest.approx(0.02, abs=1e-4)
        assert got <= 0.02 + 1e-12

    def test_constant_vanishes(self):
        assert second_modulus(builtin("const1"), 1.0, (0.0, 2.0)) == 0.0


class TestBoundReport:
    def test_constant_function(self):
        rep = bound_report(builtin("const1"), 0.4, OperatorParams(n=4), PQPair(0.9, 0.8))
        assert rep.observed_error == pytest.approx(0.0, abs=1e-12)
        assert rep.modulus_bound >= 0.0
        assert rep.holds_modulus is True
        assert rep.holds_lipschitz is True

    def test_absdev_bounds_hold(self):
        rng = np.random.default_rng(17)
        for _ in range(12):
            p = rng.uniform(0.7, 1.0)
            pq = PQPair(p, p * rng.uniform(0.5, 0.98))
            params = OperatorParams(n=int(rng.integers(2, 10)),
                                    m=int(rng.integers(0, 3)),
                                    alpha=1.0, beta=2.0, b_n=2.0)
            x = rng.uniform(0, 2.0)
            rep = bound_report(builtin("absdev:0.9"), x, params, pq)
            assert rep.holds_modulus is True
            assert rep.holds_lipschitz is True
            assert rep.modulus_bound == pytest.approx(2 * rep.modulus_at_sqrt_moment)

    def test_lip_bound_formula(self):
        params = OperatorParams(n=5, b_n=1.0)
        pq = PQPair(0.9, 0.8)
        rep = bound_report(builtin("lip:0.5:0.5"), 0.3, params, pq)
        assert rep.lipschitz_bound == pytest.approx(
            rep.second_central_moment ** 0.25, rel=1e-12
        )
        assert rep.holds_lipschitz is True

    def test_negative_bias_uses_absolute_value(self):
        # large beta pushes the first-moment ratio below one, so the signed
        # displacement at x = b_n is negative
        params = OperatorParams(n=4, m=0, alpha=0.0, beta=6.0, b_n=1.0)
        pq = PQPair(0.95, 0.9)
        h = builtin("absdev:0.5")
        rep = bound_report(h, 1.0, params, pq)
        assert rep.bias < 0
        assert rep.modulus_at_abs_bias == pytest.approx(abs(rep.bias))

    def test_grid_moduli_set_no_flags(self):
        h = stripped(builtin("sin"))
        rep = bound_report(h, 0.5, OperatorParams(n=4), PQPair(0.9, 0.8))
        assert rep.holds_modulus is None
        assert rep.holds_lipschitz is None
        assert rep.lipschitz_bound is None

    def test_requires_normalized_mode(self):
        with pytest.raises(DomainError):
            bound_report(builtin("id"), 0.2, OperatorParams(n=3, mode="literal"),
                         PQPair(0.9, 0.8))

    def test_moduli_measured_over_hull(self):
        # square has no exact modulus; its grid modulus grows with the
        # domain, so the report must use the hull end, not b_n
        params = OperatorParams(n=2, m=0, b_n=1.0)
        pq = PQPair(0.8, 0.5)
        hull_hi = node_hull_max(params, pq)
        assert hull_hi > 1.0
        rep = bound_report(builtin("square"), 0.5, params, pq)
        direct = modulus(builtin("square"), np.sqrt(rep.second_central_moment),
                         (0.0, hull_hi))
        assert rep.modulus_at_sqrt_moment == pytest.approx(direct, rel=1e-12)

    def test_csv_fields_cover_report(self):
        rep = bound_report(builtin("absdev:1"), 0.5, OperatorParams(n=3),
                           PQPair(0.9, 0.8))
        payload = rep.to_json_dict()
        for field in BOUND_CSV_FIELDS:
            assert field in payload
