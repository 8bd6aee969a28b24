import numpy as np
import pytest

import lie_sde as ls
from lie_sde.core import ScalarField
from lie_sde.errors import ShapeError, SingularFormError
from lie_sde.hamiltonian import (Polynomial, bracket_function, casimir_constant,
                                 check_casimir, check_hamiltonian_pair,
                                 check_lh_brackets, poisson_bracket,
                                 prolong_structure, sl2_casimir)


class TestPoissonBracket:
    def test_corona_central_value(self, rng):
        S = ls.get_entry("corona").ham
        h1, h2 = S.hams
        for _ in range(50):
            x = np.abs(rng.normal(size=2)) + 0.3
            np.testing.assert_allclose(poisson_bracket(S, h1, h2, x), -1.0,
                                       atol=1e-10)

    def test_bracket_with_self_vanishes(self, rng):
        S = ls.get_entry("ermakov").ham
        x = np.array([1.3, -0.4])
        for h in S.hams:
            assert abs(poisson_bracket(S, h, h, x)) < 1e-15

    def test_riccati_prolonged_spot_value(self):
        S = ls.riccati().ham
        h0, h1, _ = S.hams
        g = np.array([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_allclose(poisson_bracket(S, h0, h1, g), 2.0, atol=1e-12)
        np.testing.assert_allclose(-h0(g), 2.0)

    def test_antisymmetry(self, entries, rng):
        for name in ("riccati", "ermakov", "corona", "lv-diffusion"):
            S = entries[name].ham
            pts = entries[name].sample_ham_points(rng, 10)
            for x in pts:
                for f in S.hams:
                    for g in S.hams:
                        lhs = poisson_bracket(S, f, g, x)
                        rhs = -poisson_bracket(S, g, f, x)
                        assert abs(lhs - rhs) < 1e-8

    def test_bilinearity(self, entries, rng):
        for name in ("ermakov", "corona"):
            S = entries[name].ham
            f, g = S.hams[0], S.hams[-1]
            for _ in range(20):
                a, b = rng.normal(size=2)
                x = entries[name].sample_ham_points(rng, 1)[0]
                combo = ScalarField(
                    S.form.dim,
                    lambda p, a=a, b=b: a * f(p) + b * g(p),
                    lambda p, a=a, b=b: a * f.gradient(p) + b * g.gradient(p))
                h = S.hams[1]
                lhs = poisson_bracket(S, combo, h, x)
                rhs = a * poisson_bracket(S, f, h, x) + b * poisson_bracket(S, g, h, x)
                assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))

    def test_leibniz_rule(self, entries, rng):
        for name in ("ermakov", "lv-diffusion"):
            S = entries[name].ham
            f, g, h = S.hams
            product = ScalarField(
                S.form.dim,
                lambda p: f(p) * g(p),
                lambda p: f(p) * g.gradient(p) + g(p) * f.gradient(p))
            for x in entries[name].sample_ham_points(rng, 50):
                lhs = poisson_bracket(S, product, h, x)
                rhs = (f(x) * poisson_bracket(S, g, h, x)
                       + g(x) * poisson_bracket(S, f, h, x))
                assert abs(lhs - rhs) < 1e-8 * (1 + abs(rhs))

    def test_jacobi_identity_fd_mode(self, entries, rng):
        # inner brackets get finite-difference gradients, hence the wide tolerance
        for name in ("ermakov", "corona"):
            S = entries[name].ham
            f, g = S.hams[0], S.hams[-1]
            h = S.hams[1] if S.r > 2 else S.hams[0]
            for x in entries[name].sample_ham_points(rng, 10):
                cyc = (poisson_bracket(S, f, bracket_function(S, g, h), x)
                       + poisson_bracket(S, g, bracket_function(S, h, f), x)
                       + poisson_bracket(S, h, bracket_function(S, f, g), x))
                assert abs(cyc) < 1e-5

    def test_singular_form(self):
        S = ls.riccati().ham
        with pytest.raises(SingularFormError):
            poisson_bracket(S, S.hams[0], S.hams[1], [1.0, 1.0, 2.0, 3.0])


class TestHamiltonianPairs:
    def test_ermakov_pairs(self, entries, rng):
        entry = entries["ermakov"]
        pts = entry.sample_ham_points(rng, 30)
        for Y, h in zip(entry.ham.fields, entry.ham.hams):
            rep = check_hamiltonian_pair(entry.ham, Y, h, pts, tol=1e-9)
            assert rep.passed

    def test_wrong_sign_fails(self, entries, rng):
        entry = entries["ermakov"]
        S = entry.ham
        X1, h1 = S.fields[0], S.hams[0]
        neg = ScalarField(2, lambda p: -h1(p), lambda p: -h1.gradient(p))
        pts = entry.sample_ham_points(rng, 30)
        rep = check_hamiltonian_pair(S, X1, neg, pts, tol=1e-9)
        assert not rep.passed
        worst = max(2.0 * np.max(np.abs(h1.gradient(p))) for p in pts)
        np.testing.assert_allclose(rep.max_residual, worst)

    def test_all_catalog_pairs(self, entries, rng):
        for name in ("riccati", "ermakov", "corona", "lv-diffusion"):
            entry = entries[name]
            pts = entry.sample_ham_points(rng, 50)
            for Y, h in zip(entry.ham.fields, entry.ham.hams):
                rep = check_hamiltonian_pair(entry.ham, Y, h, pts, tol=1e-8)
                assert rep.passed, f"{name}: residual {rep.max_residual}"


class TestBracketTables:
    def test_riccati_prolonged_table(self, entries, rng):
        S = entries["riccati"].ham
        h0, h1, h2 = S.hams
        for x in entries["riccati"].sample_ham_points(rng, 50):
            assert abs(poisson_bracket(S, h0, h1, x) + h0(x)) < 1e-8
            assert abs(poisson_bracket(S, h0, h2, x) + 2 * h1(x)) < 1e-8
            assert abs(poisson_bracket(S, h1, h2, x) + h2(x)) < 1e-8

    def test_lh_tables_all_entries(self, entries, rng):
        for name in ("riccati", "ermakov", "corona", "lv-diffusion"):
            entry = entries[name]
            rep = check_lh_brackets(entry.ham, entry.sample_ham_points(rng, 50),
                                    tol=1e-8)
            assert rep.passed, f"{name}: residual {rep.max_residual}"

    def test_prolonged_charges_scale(self, entries, rng):
        # a constant bracket picks up one copy per block: corona doubles to -2
        S2 = prolong_structure(entries["corona"].ham, 2)
        assert S2.central_charges[0, 1] == -2.0
        h1, h2 = S2.hams
        for _ in range(10):
            x = np.abs(rng.normal(size=4)) + 0.3
            np.testing.assert_allclose(poisson_bracket(S2, h1, h2, x), -2.0,
                                       atol=1e-9)


class TestCasimirs:
    def test_polynomial_partials(self):
        C = sl2_casimir()  # v0 v2 - v1^2
        v = np.array([2.0, 3.0, 5.0])
        assert C(v) == 1.0
        assert C.partial(0)(v) == 5.0
        assert C.partial(1)(v) == -6.0
        assert C.partial(2)(v) == 2.0

    def test_riccati_spot_value(self, entries):
        cas = entries["riccati"].integrals[0].func
        np.testing.assert_allclose(cas([1.0, 2.0, 3.0, 4.0]), 3.0)

    def test_constant_polynomial(self, entries, rng):
        S = entries["ermakov"].ham
        const = Polynomial(3, ((4.5, (0, 0, 0)),))
        F = casimir_constant(S, const, 2, 2)
        for _ in range(5):
            x = np.concatenate([S.form.domain.sample(rng) for _ in range(2)])
            assert F(x) == 4.5
            np.testing.assert_array_equal(F.gradient(x), np.zeros(4))

    def test_ermakov_f1_matches_printed_formula(self, entries, rng):
        entry = entries["ermakov"]
        h1, h2, h3 = entry.ham.hams
        F1 = entry.integrals[0].func
        for _ in range(10):
            x = np.concatenate([entry.sys.domain.sample(rng) for _ in range(2)])
            a, b = x[:2], x[2:]
            expected = ((h1(a) + h1(b)) * (h3(a) + h3(b))
                        - (h2(a) + h2(b)) ** 2)
            np.testing.assert_allclose(F1(x), expected, rtol=1e-12)

    def test_ermakov_f2_uses_copies_0_and_2(self, entries, rng):
        entry = entries["ermakov"]
        F2 = entry.integrals[1].func
        x = np.concatenate([entry.sys.domain.sample(rng) for _ in range(3)])
        y = x.copy()
        y[2:4] = rng.normal(size=2)  # copy 1 must not matter
        np.testing.assert_allclose(F2(x), F2(y), rtol=1e-14)

    def test_base_casimir_is_constant_k_over_4(self, entries, rng):
        # on one copy the sl(2) combination collapses to k/4
        entry = entries["ermakov"]
        C = casimir_constant(entry.ham, sl2_casimir(), 1, 1)
        for _ in range(10):
            np.testing.assert_allclose(C(entry.sys.domain.sample(rng)), 0.25,
                                       rtol=1e-12)

    def test_check_casimir_riccati(self, entries, rng):
        entry = entries["riccati"]
        pts = entry.sample_ham_points(rng, 100)
        rep = check_casimir(entry.ham, entry.integrals[0].func, pts, tol=1e-8)
        assert rep.passed, rep.max_residual

    def test_check_casimir_ermakov_prolonged(self, entries, rng):
        entry = entries["ermakov"]
        S2 = prolong_structure(entry.ham, 2)
        pts = [np.concatenate([entry.sys.domain.sample(rng) for _ in range(2)])
               for _ in range(50)]
        rep = check_casimir(S2, entry.integrals[0].func, pts, tol=1e-8)
        assert rep.passed, rep.max_residual

    def test_non_casimir_fails(self, entries, rng):
        entry = entries["riccati"]
        S = entry.ham
        pts = entry.sample_ham_points(rng, 20)
        rep = check_casimir(S, S.hams[1], pts, tol=1e-8)
        assert not rep.passed

    def test_gradient_matches_fd(self, entries, rng):
        for name in ("riccati", "ermakov"):
            F = entries[name].integrals[-1].func
            x = np.concatenate([entries[name].sys.domain.sample(rng)
                                for _ in range(F.dim // entries[name].sys.dim)])
            fd = ls.core.fd_gradient(F.func, x)
            np.testing.assert_allclose(F.gradient(x), fd, atol=1e-6, rtol=1e-6)

    def test_subset_validation(self, entries):
        S = entries["ermakov"].ham
        with pytest.raises(ShapeError):
            casimir_constant(S, sl2_casimir(), 2, (0, 5))
        with pytest.raises(ShapeError):
            casimir_constant(S, Polynomial(2, ((1.0, (1, 0)),)), 2, 2)
