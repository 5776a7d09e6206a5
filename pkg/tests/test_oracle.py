import numpy as np
import pytest

from mtmlab import oracle as orc
from mtmlab.errors import EnumerationBudgetError


class TestBuilders:
    def test_mh_two_state_hand_value(self, two_state_spec):
        P = orc.build_mh(two_state_spec).P
        np.testing.assert_allclose(P, [[0.75, 0.25], [0.5, 0.5]], atol=1e-15)

    def test_mh_uniform_pi_symmetric_q_is_q(self, rng):
        m = 4
        A = rng.random((m, m)) + 0.2
        q = (A + A.T) / (A + A.T).sum(axis=1, keepdims=True)
        # symmetrize rows: make q symmetric AND row-stochastic via doubly stochastic trick
        B = (A + A.T)
        for _ in range(500):
            B /= B.sum(axis=1, keepdims=True)
            B = (B + B.T) / 2
        q = B / B.sum(axis=1, keepdims=True)
        spec = orc.FiniteChainSpec(pi=np.full(m, 1 / m), q=q, w=np.ones((m, m)), n=1)
        np.testing.assert_allclose(orc.build_mh(spec).P, q, atol=1e-12)

    def test_mh_invariance_battery(self, rng):
        for _ in range(100):
            spec = orc.random_spec(rng, m=3)
            P = orc.build_mh(spec).P
            np.testing.assert_allclose(spec.pi @ P, spec.pi, atol=1e-12)

    def test_ideal_uninformed_weights_equal_mh(self, rng):
        spec = orc.random_spec(rng, m=4)
        spec = orc.FiniteChainSpec(pi=spec.pi, q=spec.q, w=np.ones((4, 4)), n=2)
        np.testing.assert_allclose(
            orc.build_ideal(spec).P, orc.build_mh(spec).P, atol=1e-14
        )

    def test_ideal_reversible_battery(self, rng):
        for _ in range(50):
            spec = orc.random_spec(rng, m=3)
            assert orc.reversibility_gap(orc.build_ideal(spec), spec.pi) < 1e-12

    def test_semi_ideal_collapses_at_n1(self, rng):
        for _ in range(20):
            spec = orc.random_spec(rng, m=3, n=1)
            np.testing.assert_allclose(
                orc.build_semi_ideal(spec).P, orc.build_mh(spec).P, atol=1e-12
            )

    def test_semi_ideal_normalizer_converges_to_qw(self, rng):
        # law of large numbers: (q~w)_n(x, y) approaches (qw)(x) as n grows
        spec = orc.random_spec(rng, m=3)
        qw = orc.qw_normalizers(spec)
        dev4 = np.abs(orc.qw_tilde(spec.with_n(4)) - qw[:, None]).max()
        dev12 = np.abs(orc.qw_tilde(spec.with_n(12)) - qw[:, None]).max()
        assert dev12 < dev4

    def test_semi_ideal_invariance(self, rng):
        for n in (2, 3):
            spec = orc.random_spec(rng, m=3, n=n)
            P = orc.build_semi_ideal(spec).P
            np.testing.assert_allclose(spec.pi @ P, spec.pi, atol=1e-12)

    def test_mtm_collapses_at_n1(self, rng):
        for _ in range(20):
            spec = orc.random_spec(rng, m=3, n=1)
            np.testing.assert_allclose(
                orc.build_mtm(spec).P, orc.build_mh(spec).P, atol=1e-12
            )

    def test_mtm_invariance_and_reversibility_battery(self, rng):
        for _ in range(100):
            spec = orc.random_spec(rng, m=3, n=3)
            P = orc.build_mtm(spec)
            np.testing.assert_allclose(spec.pi @ P.P, spec.pi, atol=1e-11)
            assert orc.reversibility_gap(P, spec.pi) < 1e-11

    def test_budgets_fail_loudly(self, rng):
        spec = orc.random_spec(rng, m=3, n=12)
        with pytest.raises(EnumerationBudgetError):
            orc.build_mtm(spec)
        with pytest.raises(EnumerationBudgetError):
            orc.build_semi_ideal(spec.with_n(14))


class TestSpectral:
    def test_dirichlet_constant_and_identity(self, two_state_spec, rng):
        P = orc.build_mh(two_state_spec)
        assert orc.dirichlet_form(P, two_state_spec.pi, np.ones(2)) == 0.0
        eye = orc.TransitionMatrix(P=np.eye(3), kind="id")
        pi = rng.dirichlet(np.ones(3))
        f = rng.standard_normal(3)
        assert orc.dirichlet_form(eye, pi, f) == 0.0

    def test_dirichlet_two_state_hand_sum(self, two_state_spec):
        P = orc.build_mh(two_state_spec)
        val = orc.dirichlet_form(P, two_state_spec.pi, np.array([0.0, 1.0]))
        assert val == pytest.approx(1 / 6, abs=1e-15)

    def test_spectral_two_state(self, two_state_spec):
        rep = orc.spectral_quantities(orc.build_mh(two_state_spec), two_state_spec.pi)
        assert rep.gap == pytest.approx(0.75, abs=1e-12)
        assert rep.lambda_min == pytest.approx(0.25, abs=1e-12)
        assert rep.positive

    def test_spectral_identity(self):
        pi = np.array([0.3, 0.7])
        rep = orc.spectral_quantities(np.eye(2), pi)
        assert rep.gap == pytest.approx(0.0, abs=1e-14)

    def test_lazy_halving(self, rng):
        for _ in range(10):
            spec = orc.random_spec(rng, m=4, n=2)
            P = orc.build_mtm(spec)
            rep = orc.spectral_quantities(P, spec.pi)
            lazy = orc.lazy_matrix(P)
            rep_lazy = orc.spectral_quantities(lazy, spec.pi)
            assert rep_lazy.lambda_min >= -1e-12
            assert rep_lazy.gap == pytest.approx(rep.gap / 2, abs=1e-12)

    def test_non_reversible_rejected(self):
        P = np.array([[0.1, 0.9], [0.5, 0.5]])
        pi = np.array([0.5, 0.5])
        with pytest.raises(ValueError, match="lazy"):
            orc.spectral_quantities(P, pi)


class TestConductance:
    def test_two_state_hand_value(self, two_state_spec):
        P = orc.build_mh(two_state_spec)
        assert orc.conductance(P, two_state_spec.pi, backend="numpy") == pytest.approx(0.5)

    def test_perfect_kernel(self):
        pi = np.array([0.5, 0.25, 0.25])
        P = orc.TransitionMatrix(P=np.tile(pi, (3, 1)), kind="perfect")
        assert orc.conductance(P, pi, backend="numpy") == pytest.approx(0.5, abs=1e-15)

    def test_cheeger_battery_and_upper_direction_log(self, rng):
        # asserted: Phi^2/2 <= gamma <= 2 Phi. The single-sided gamma <= Phi
        # claim is logged only: the 2-state hand example already violates it.
        upper_dir_violations = 0
        for _ in range(200):
            spec = orc.random_spec(rng, m=4, n=2)
            P = orc.lazy_matrix(orc.build_mh(spec))  # lazy => positive
            pi = spec.pi
            gam = orc.spectral_quantities(P, pi).gap
            phi = orc.conductance(P, pi, backend="numpy")
            assert 0.5 * phi * phi <= gam + 1e-12
            assert gam <= 2 * phi + 1e-12
            if gam > phi + 1e-12:
                upper_dir_violations += 1

    def test_two_state_violates_quoted_upper_direction(self, two_state_spec):
        P = orc.build_mh(two_state_spec)
        gam = orc.spectral_quantities(P, two_state_spec.pi).gap
        phi = orc.conductance(P, two_state_spec.pi, backend="numpy")
        assert gam > phi  # 3/4 > 1/2: the one-sided reading fails here

    def test_budget_rejected(self):
        m = 25
        pi = np.full(m, 1 / m)
        with pytest.raises(EnumerationBudgetError):
            orc.conductance(np.eye(m), pi, backend="numpy")


class TestVerifier:
    def test_uniform_weights_collapse_all_kernels(self, rng):
        spec = orc.random_spec(rng, m=3, n=3)
        spec = orc.FiniteChainSpec(pi=spec.pi, q=spec.q, w=np.ones((3, 3)), n=3)
        mh = orc.build_mh(spec).P
        for build in (orc.build_ideal, orc.build_semi_ideal, orc.build_mtm):
            np.testing.assert_allclose(build(spec).P, mh, atol=1e-12)
        w_sup, w_inv_sup = orc.sup_importance_weight(spec)
        assert w_sup == pytest.approx(1.0)
        assert w_inv_sup == pytest.approx(1.0)

    def test_all_checks_pass_on_random_specs(self, rng):
        for _ in range(10):
            spec = orc.random_spec(rng, m=3, n=3)
            results = orc.verify_inequalities(spec, n_random_f=40)
            assert all(r.passed for r in results), [r for r in results if not r.passed]

    def test_sink_receives_every_check(self, rng):
        got = []
        spec = orc.random_spec(rng, m=3, n=2)
        results = orc.verify_inequalities(spec, report_sink=got.append, n_random_f=10)
        assert got == results
        line = results[0].to_json()
        assert '"name"' in line and '"spec_hash"' in line and '"pass"' in line

    def test_beta1n_decreasing_in_s(self, rng):
        spec = orc.random_spec(rng, m=3, n=3)
        grid = [0.2, 0.5, 1.0, 2.0, 5.0]
        vals = [orc.beta1n_exact(spec, s) for s in grid]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_beta1n_indicator_limit_direction(self, rng):
        # sup_s |beta_{1,n}(s) - 1{s<=1}| at s in {0.5, 2} decreases in n
        for _ in range(10):
            spec = orc.random_spec(rng, m=3)
            prof = orc.beta1n_limit_profile(spec, n_values=(2, 4, 8), s_values=(0.5, 2.0))
            dev = [max(1 - prof[0.5][i], prof[2.0][i]) for i in range(3)]
            assert dev[0] >= dev[1] - 1e-12 >= dev[2] - 2e-12

    def test_spec_round_trip(self, tmp_path, rng):
        spec = orc.random_spec(rng, m=3, n=4)
        path = tmp_path / "spec.json"
        orc.save_spec(spec, path)
        loaded = orc.load_spec(path)
        np.testing.assert_allclose(loaded.pi, spec.pi)
        np.testing.assert_allclose(loaded.q, spec.q)
        np.testing.assert_allclose(loaded.w, spec.w)
        assert loaded.n == spec.n


class TestValidation:
    def test_bad_rows_rejected(self):
        with pytest.raises(ValueError):
            orc.FiniteChainSpec(
                pi=np.array([0.5, 0.5]),
                q=np.array([[0.7, 0.2], [0.5, 0.5]]),
                w=np.ones((2, 2)),
                n=1,
            )

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            orc.FiniteChainSpec(
                pi=np.array([1.0, 0.0]),
                q=np.full((2, 2), 0.5),
                w=np.ones((2, 2)),
                n=1,
            )
