import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

import lie_sde as ls
from lie_sde.core import brownian_family, brownian_path, zero_noise_path
from lie_sde.catalog import gbm_stratonovich_solution, gbm_system
from lie_sde.errors import DomainError, StudyFailed, UnsupportedError
from lie_sde.integrate import (ITO_CORRECTION_SIGN, convergence_study,
                               integrate_ito, integrate_stratonovich,
                               stratonovich_to_ito_drift)

ZERO_NOISE = {
    "riccati": dict(bp0=0.0, bp1=0.0, bp2=0.0),
    "oscillator": dict(omega2_B=0.0, gamma_B=0.0),
    "ermakov": dict(sigma=0.0),
    "corona": dict(B=0.0),
    "lv-diffusion": dict(sigma1=0.0, sigma2=0.0),
    "lv-additive": dict(sigma2=0.0),
}


def riccati_exact(b0, b1, b2, g0, t_grid):
    """Deterministic Riccati solution via the associated linear 2nd-order ODE.

    With G = -u'/(b2 u) the equation becomes u'' = b1 u' - b0 b2 u; the flow
    is the matrix exponential of the companion matrix, applied step by step.
    """
    C = np.array([[0.0, 1.0], [-b0 * b2, b1]])
    E = expm((t_grid[1] - t_grid[0]) * C)
    v = np.array([1.0, -b2 * g0])
    out = np.empty(len(t_grid))
    for j in range(len(t_grid)):
        out[j] = -v[1] / (b2 * v[0])
        v = E @ v
    return out


class TestStratonovichHeun:
    def test_zero_coefficients_constant(self):
        sys = ls.riccati(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).sys
        tr = integrate_stratonovich(sys, [1.5], brownian_path(1, 2, 1.0, 100))
        np.testing.assert_array_equal(tr.states, np.full((101, 1), 1.5))

    def test_pure_drift_exponential(self):
        sys = ls.riccati(b0=0.0, b1=1.0, b2=0.0, bp0=0, bp1=0, bp2=0).sys
        tr = integrate_stratonovich(sys, [1.0], zero_noise_path(2, 1.0, 1000))
        assert abs(tr.final_state()[0] - np.e) < 1e-5

    def test_gbm_strong_error_shrinks(self):
        mu, sig = 0.1, 0.2
        sys = gbm_system(mu, sig)
        family = brownian_family(17, 2, 1.0, 100, 3)
        errs = []
        for path in family:
            tr = integrate_stratonovich(sys, [1.0], path)
            exact = gbm_stratonovich_solution(path, 1.0, mu, sig)
            errs.append(np.max(np.abs(tr.states[:, 0] - exact)))
        assert errs[2] < errs[1] < errs[0]
        assert errs[2] < 1e-4

    def test_initial_state_recorded_and_domain_respected(self):
        entry = ls.get_entry("corona")
        path = brownian_path(5, 2, 1.0, 500)
        tr = integrate_stratonovich(entry.sys, (1.0, 1.0), path)
        np.testing.assert_array_equal(tr.states[0], [1.0, 1.0])
        for state in tr.states:
            assert ls.validate_state(entry.sys, state)

    def test_initial_outside_domain_raises(self):
        entry = ls.get_entry("corona")
        with pytest.raises(DomainError):
            integrate_stratonovich(entry.sys, (-1.0, 1.0),
                                   brownian_path(0, 2, 1.0, 10))

    def test_riccati_blowup_truncates(self):
        entry = ls.riccati()  # drift 1 - G^2 escapes to -inf below G = -1
        tr = integrate_stratonovich(entry.sys, [-3.0],
                                    brownian_path(5, 2, 2.0, 2000))
        assert tr.status == "truncated"
        assert tr.t_escape is not None and 0.0 < tr.t_escape < 2.0
        assert tr.n_valid == tr.states.shape[0]

    def test_determinism(self):
        entry = ls.get_entry("lv-diffusion")
        path = brownian_path(9, 3, 1.0, 200)
        a = integrate_stratonovich(entry.sys, (1.0, 1.0), path)
        b = integrate_stratonovich(entry.sys, (1.0, 1.0), path)
        np.testing.assert_array_equal(a.states, b.states)

    def test_shared_path_consistency(self):
        # a coarsened path and a hand-built path with identical arrays
        # produce bit-identical trajectories
        entry = ls.get_entry("corona")
        family = brownian_family(3, 2, 1.0, 50, 3)
        coarse = family[0]
        rebuilt = ls.DriverPath(coarse.seed, coarse.t_grid.copy(),
                                coarse.increments.copy(), coarse.level)
        a = integrate_stratonovich(entry.sys, (1.0, 1.0), coarse)
        b = integrate_stratonovich(entry.sys, (1.0, 1.0), rebuilt)
        np.testing.assert_array_equal(a.states, b.states)

    def test_positivity_preserved(self):
        for name in ("corona", "lv-diffusion", "lv-additive"):
            entry = ls.get_entry(name)
            path = brownian_path(11, entry.sys.ell, 1.0, 1000)
            tr = integrate_stratonovich(entry.sys, entry.defaults["initial"], path)
            assert tr.complete
            assert np.all(tr.states[:, 0] > 0.0)
            if entry.sys.log_mask == (True, True):
                assert np.all(tr.states > 0.0)

    def test_matches_deterministic_rk(self):
        for name, kw in ZERO_NOISE.items():
            entry = ls.get_entry(name, **kw)
            x0 = np.asarray(entry.defaults["initial"], float)
            tr = integrate_stratonovich(entry.sys, x0,
                                        zero_noise_path(entry.sys.ell, 1.0, 1000))
            assert tr.complete

            def drift(t, x, sys=entry.sys):
                B = np.zeros(sys.ell)
                B[0] = t
                return ls.assemble_operator(sys, B, x)[0]

            ref = solve_ivp(drift, (0.0, 1.0), x0, t_eval=tr.t_grid,
                            rtol=1e-11, atol=1e-13, max_step=0.01)
            err = np.max(np.abs(tr.states - ref.y.T))
            assert err < 1e-6, f"{name}: {err}"


class TestItoConversion:
    def test_constant_noise_no_correction(self):
        sys = ls.riccati(b0=0.3, b1=0.0, b2=0.0, bp0=0.7, bp1=0.0, bp2=0.0).sys
        d = stratonovich_to_ito_drift(sys, [0.0, 0.0], [1.2])
        np.testing.assert_array_equal(d, [0.3])

    def test_gbm_corrected_drift(self):
        mu, sig = 0.1, 0.2
        d = stratonovich_to_ito_drift(gbm_system(mu, sig), [0.0, 0.0], [1.0])
        np.testing.assert_allclose(d, [mu + 0.5 * sig ** 2])

    def test_riccati_quadratic_noise_correction(self):
        # noise field G^2 + G + 1: correction (2G+1)(G^2+G+1)/2 = 4.5 at G = 1
        sys = ls.riccati(b0=0, b1=0, b2=0, bp0=1.0, bp1=1.0, bp2=1.0).sys
        d = stratonovich_to_ito_drift(sys, [0.0, 0.0], [1.0])
        np.testing.assert_allclose(d, [4.5])

    def test_sign_is_calibrated_positive(self):
        assert ITO_CORRECTION_SIGN == 1.0

    def test_brownian_dependent_noise_unsupported(self):
        sys = ls.riccati(bp1=lambda B: 0.1 * B[1]).sys
        with pytest.raises(UnsupportedError):
            stratonovich_to_ito_drift(sys, [0.0, 1.0], [1.0])
        with pytest.raises(UnsupportedError):
            integrate_ito(sys, [1.0], brownian_path(0, 2, 1.0, 10))

    def test_brownian_dependent_drift_supported(self):
        sys = ls.riccati(b1=lambda B: 0.1 * B[1], bp1=0.0).sys
        d = stratonovich_to_ito_drift(sys, [0.0, 2.0], [1.0])
        np.testing.assert_allclose(d, [0.2])


class TestItoIntegrator:
    def test_zero_noise_matches_euler(self):
        sys = ls.riccati(b0=1.0, b1=0.5, b2=0.0, bp0=0, bp1=0, bp2=0).sys
        path = zero_noise_path(2, 1.0, 200)
        tr = integrate_ito(sys, [0.2], path)
        x = 0.2
        dt = 1.0 / 200
        for _ in range(200):
            x = x + (1.0 + 0.5 * x) * dt
        np.testing.assert_allclose(tr.final_state()[0], x, rtol=1e-14)

    def test_gbm_em_converges_to_stratonovich_solution(self):
        # smoke-scale version; the acceptance suite pins order >= 0.45 at the
        # full 64-seed ensemble
        mu, sig = 0.1, 0.2
        sys = gbm_system(mu, sig)
        study = convergence_study(
            sys, [1.0], seed=2024, levels=4, t_end=1.0, base_steps=100,
            n_seeds=16, method="ito",
            oracle=lambda p: [gbm_stratonovich_solution(p, 1.0, mu, sig)[-1]])
        assert study.fitted_order >= 0.3
        assert study.rows[-1].error < study.rows[0].error

    def test_gap_to_heun_shrinks_with_rate(self):
        # The strong Ito/Stratonovich integrator gap on shared noise is
        # dominated by the Euler-Maruyama martingale term of strong order 1/2,
        # so one halving of dt shrinks it by ~sqrt(2) and two halvings by ~2
        # (measured 1.41 per halving at 256 seeds).  Frozen seeds keep this
        # deterministic; the aggregate two-halving ratio is the stable stat.
        mu, sig = 0.1, 0.2
        sys = gbm_system(mu, sig)
        gaps = np.zeros(3)
        for seed in range(64):
            family = brownian_family(1000 + seed, 2, 1.0, 100, 3)
            for lev, path in enumerate(family):
                s = integrate_stratonovich(sys, [1.0], path)
                i = integrate_ito(sys, [1.0], path)
                gaps[lev] += abs(s.final_state()[0] - i.final_state()[0])
        gaps /= 64
        assert np.all(gaps[1:] < gaps[:-1])
        assert 1.4 < gaps[0] / gaps[2] < 3.0, gaps


class TestConvergenceStudy:
    def test_gbm_heun_order(self):
        mu, sig = 0.1, 0.2
        study = convergence_study(
            gbm_system(mu, sig), [1.0], seed=11, levels=4, t_end=1.0,
            base_steps=100, n_seeds=16,
            oracle=lambda p: [gbm_stratonovich_solution(p, 1.0, mu, sig)[-1]])
        assert 0.7 <= study.fitted_order <= 1.3

    def test_deterministic_riccati_order_two(self):
        b0, b1, b2 = 1.0, 0.0, -1.0
        sys = ls.riccati(b0, b1, b2, 0.0, 0.0, 0.0).sys
        study = convergence_study(
            sys, [0.3], seed=0, levels=4, t_end=1.0, base_steps=50, n_seeds=1,
            oracle=lambda p: [riccati_exact(b0, b1, b2, 0.3, p.t_grid)[-1]])
        assert 1.7 <= study.fitted_order <= 2.3

    def test_finest_level_reference(self):
        sys = gbm_system(0.1, 0.2)
        study = convergence_study(sys, [1.0], seed=4, levels=4, t_end=1.0,
                                  base_steps=100, n_seeds=8)
        assert study.reference == "finest-level"
        assert len(study.rows) == 3
        assert study.rows[-1].error < study.rows[0].error

    def test_too_few_levels(self):
        with pytest.raises(StudyFailed):
            convergence_study(gbm_system(0.1, 0.2), [1.0], seed=0, levels=1,
                              t_end=1.0)

    def test_all_truncated(self):
        sys = ls.riccati(b0=0.0, b1=0.0, b2=1.0, bp0=0, bp1=0, bp2=0).sys
        # dG = G^2 dt from G = 3 escapes at t = 1/3 on every path
        with pytest.raises(StudyFailed):
            convergence_study(sys, [3.0], seed=0, levels=3, t_end=1.0,
                              base_steps=100, n_seeds=4)

    def test_riccati_analytic_matches_entry_invariant(self):
        # catalog invariant: zero-noise default entry vs the linear-ODE oracle
        entry = ls.riccati(bp0=0.0, bp1=0.0, bp2=0.0)
        tr = integrate_stratonovich(entry.sys, [0.3],
                                    zero_noise_path(2, 1.0, 1000))
        exact = riccati_exact(1.0, 0.0, -1.0, 0.3, tr.t_grid)
        assert np.max(np.abs(tr.states[:, 0] - exact)) < 1e-6
