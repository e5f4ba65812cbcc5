"""Recurrence fixtures, characteristic roots, and growth-exponent estimates."""

import numpy as np
import pytest

from ulamadd import asymptotics, exact
from ulamadd.asymptotics import RecurrencePoly


def _sorted_real(roots):
    return sorted(r.real for r in roots)


class TestRecurrencePoly:
    def test_needs_two_polynomials(self):
        with pytest.raises(ValueError):
            RecurrencePoly(((1.0,),))

    def test_rejects_vanishing_edges(self):
        with pytest.raises(ValueError):
            RecurrencePoly(((0.0, 0.0), (1.0,)))
        with pytest.raises(ValueError):
            RecurrencePoly(((1.0,), (0.0,)))

    def test_order_and_degree(self):
        rec = RecurrencePoly(((1.0, 2.0), (0.0, 1.0, 3.0), (4.0,)))
        assert rec.order == 2
        assert rec.degree == 2

    def test_eval_coeff_is_horner(self):
        rec = RecurrencePoly(((2.0, -1.0, 3.0), (1.0,)))
        for n in (0.0, 1.0, 2.5, -4.0):
            want = 2.0 - n + 3.0 * n * n
            assert rec.eval_coeff(0, n) == pytest.approx(want, rel=1e-15)

    def test_iterate_geometric(self):
        # y_{n+1} - 2 y_n = 0 doubles forever
        rec = RecurrencePoly(((-2.0,), (1.0,)))
        out = rec.iterate([1.0], 10)
        np.testing.assert_allclose(out, 2.0 ** np.arange(10), rtol=0)

    def test_iterate_checks_initial_count(self):
        rec = RecurrencePoly(((1.0,), (1.0,), (1.0,)))
        with pytest.raises(ValueError):
            rec.iterate([1.0], 5)

    def test_iterate_stops_on_vanishing_lead(self):
        # leading coefficient (n - 1) dies at the first step
        rec = RecurrencePoly(((1.0,), (-1.0, 1.0)), start_index=1)
        with pytest.raises(ZeroDivisionError):
            rec.iterate([1.0], 4)


class TestCharacteristicRoots:
    def test_base_second_moment_roots(self):
        rec = asymptotics.load_fixture("second_moment_base")
        deltas = asymptotics.characteristic_delta(rec)
        assert len(deltas) == 2
        assert all(abs(d - 1.0) < 1e-6 for d in deltas)
        rho = _sorted_real(asymptotics.polynomial_rho(rec, 1.0))
        np.testing.assert_allclose(rho, [1.0, 2.0], atol=1e-9)

    def test_base_third_moment_roots(self):
        rec = asymptotics.load_fixture("third_moment_base")
        deltas = asymptotics.characteristic_delta(rec)
        # triple root at 1; np.roots splits it by about eps^(1/3)
        assert all(abs(d - 1.0) < 1e-4 for d in deltas)
        rho = _sorted_real(asymptotics.polynomial_rho(rec, 1.0))
        np.testing.assert_allclose(rho, [1.0, 2.0, 3.0], atol=1e-9)

    def test_base_fourth_moment_roots(self):
        rec = asymptotics.load_fixture("fourth_moment_base")
        deltas = asymptotics.characteristic_delta(rec)
        assert all(abs(d - 1.0) < 5e-3 for d in deltas)
        rho = _sorted_real(asymptotics.polynomial_rho(rec, 1.0))
        np.testing.assert_allclose(rho, [1.0, 1.0, 2.0, 3.0, 4.0], atol=1e-5)

    def test_lazy_recurrence_root_clusters(self):
        nu = 0.6
        rec = asymptotics.p_adding_second_moment_recurrence(1.0 - nu)
        deltas = sorted(asymptotics.characteristic_delta(rec), key=abs)
        assert len(deltas) == 4
        assert all(abs(d - nu) < 1e-6 for d in deltas[:2])
        assert all(abs(d - 1.0) < 1e-6 for d in deltas[2:])
        rho = _sorted_real(asymptotics.polynomial_rho(rec, 1.0))
        np.testing.assert_allclose(rho, [1.0, 2.0], atol=1e-9)

    def test_dominant_power_matches_growth(self):
        # indicial exponent 2 at delta=1 is the q ~ n^2 statement
        rec = asymptotics.load_fixture("second_moment_base")
        rho_max = max(_sorted_real(asymptotics.polynomial_rho(rec, 1.0)))
        qs = exact.second_moment_sequence([1.0], 1.0, 3000)
        est = asymptotics.empirical_exponent(qs)
        assert abs(est.slope - rho_max) < 0.02

    def test_roots_invariant_under_common_scaling(self):
        rec = asymptotics.p_adding_second_moment_recurrence(0.37)
        scaled = RecurrencePoly(
            tuple(tuple(7.5 * c for c in poly) for poly in rec.coefficients),
            start_index=rec.start_index,
        )
        d1 = np.sort_complex(np.asarray(asymptotics.characteristic_delta(rec)))
        d2 = np.sort_complex(np.asarray(asymptotics.characteristic_delta(scaled)))
        np.testing.assert_allclose(d1, d2, atol=1e-9)
        r1 = _sorted_real(asymptotics.polynomial_rho(rec, 1.0))
        r2 = _sorted_real(asymptotics.polynomial_rho(scaled, 1.0))
        np.testing.assert_allclose(r1, r2, atol=1e-9)

    def test_lazy_builder_rejects_degenerate_p(self):
        with pytest.raises(ValueError):
            asymptotics.p_adding_second_moment_recurrence(0.0)
        with pytest.raises(ValueError):
            # nu = 0 kills the leading coefficient identically
            asymptotics.p_adding_second_moment_recurrence(1.0)


class TestFixtureIterationAgainstForwardSystems:
    """The stored scalar recurrences must regenerate the moment sequences."""

    def test_second_moment_base(self):
        qs = exact.second_moment_sequence([1.0], 1.0, 2000)
        rec = asymptotics.load_fixture("second_moment_base")
        it = rec.iterate(qs[: rec.order], 2000)
        np.testing.assert_allclose(it, qs, rtol=1e-10)

    def test_third_moment_base(self):
        ts = exact.third_moment_sequence(1500)
        rec = asymptotics.load_fixture("third_moment_base")
        it = rec.iterate(ts[: rec.order], 1500)
        np.testing.assert_allclose(it, ts, rtol=1e-7)

    def test_fourth_moment_base(self):
        # order-5, degree-10: roundoff along subdominant solutions grows,
        # so keep the horizon where 1e-6 still holds
        fs = exact.fourth_moment_sequence(600)
        rec = asymptotics.load_fixture("fourth_moment_base")
        it = rec.iterate(fs[: rec.order], 600)
        np.testing.assert_allclose(it, fs, rtol=1e-6)

    def test_lazy_second_moment(self):
        qs = exact.second_moment_sequence([1.0], 0.4, 2000)
        rec = asymptotics.p_adding_second_moment_recurrence(0.4)
        it = rec.iterate(qs[: rec.order], 2000)
        np.testing.assert_allclose(it, qs, rtol=1e-7)


class TestEmpiricalExponent:
    def test_pure_power_recovered_exactly(self):
        ns = np.arange(1, 2001, dtype=float)
        est = asymptotics.empirical_exponent(2.7 * ns**2.5)
        assert est.slope == pytest.approx(2.5, abs=1e-9)
        assert est.stderr < 1e-10

    def test_moment_sequences(self):
        qs = exact.second_moment_sequence([1.0], 1.0, 3000)
        assert abs(asymptotics.empirical_exponent(qs).slope - 2) < 0.02
        ts = exact.third_moment_sequence(3000)
        assert abs(asymptotics.empirical_exponent(ts).slope - 3) < 0.02
        fs = exact.fourth_moment_sequence(3000)
        assert abs(asymptotics.empirical_exponent(fs).slope - 4) < 0.02

    def test_lazy_growth_is_still_quadratic(self):
        qs = exact.second_moment_sequence([1.0], 0.4, 3000)
        assert abs(asymptotics.empirical_exponent(qs).slope - 2) < 0.03

    def test_explicit_indices_match_default(self):
        ns = np.arange(1, 3001, dtype=float)
        qs = exact.second_moment_sequence([1.0], 1.0, 3000)
        a = asymptotics.empirical_exponent(qs)
        b = asymptotics.empirical_exponent(qs, indices=ns)
        assert a.slope == pytest.approx(b.slope, rel=1e-12)

    def test_needs_enough_tail(self):
        with pytest.raises(ValueError):
            asymptotics.empirical_exponent(np.arange(1.0, 15.0))


def test_unknown_fixture_name():
    with pytest.raises(ValueError):
        asymptotics.load_fixture("no_such_table")
