"""Classical solvers: stationary matrix ansatz, Markov chain, phase map."""

import numpy as np
import pytest

from qca_tasep import (
    ModelParams,
    build_markov,
    build_mpa,
    classify_phase,
    critical_rate,
    density_matrix,
    distribution_profile,
    evolve_to_ness,
    init_state,
    mpa_profile,
    stationary_distribution,
)
from qca_tasep.classical import MAX_MARKOV_SITES


class TestBuildMpa:
    @pytest.mark.parametrize("tau", [0.0, 1.0])
    def test_rejects_degenerate_hop_rate(self, tau):
        with pytest.raises(ValueError):
            build_mpa(0.3, 0.7, tau)

    def test_rejects_blocked_boundaries(self):
        with pytest.raises(ValueError):
            build_mpa(0.0, 0.7, 0.75)
        with pytest.raises(ValueError):
            build_mpa(0.3, 0.0, 0.75)

    def test_accepts_unit_ejection(self):
        m = build_mpa(0.5, 1.0, 0.75)
        assert np.isinf(m.beta_prime)

    def test_rejects_tiny_bond_dimension(self):
        with pytest.raises(ValueError):
            build_mpa(0.3, 0.7, 0.75, chi=1)

    @pytest.mark.parametrize(
        "rates", [(0.3, 0.7, 0.75), (0.2, 0.2, 0.75), (0.6, 0.6, 0.4), (0.5, 1.0, 0.75)]
    )
    def test_boundary_eigen_relations(self, rates):
        # the boundary vector is a left eigenvector of the vacant matrix and
        # a right eigenvector of the occupied matrix, with eigenvalues set by
        # the mapped boundary rates; this holds exactly at any truncation
        a, b, t = rates
        m = build_mpa(a, b, t, chi=12)
        scale = np.sqrt(1.0 - t)
        occupied = m.F / scale
        vacant = scale * m.E
        w = m.boundary_vector
        inv_b = 0.0 if np.isinf(m.beta_prime) else 1.0 / m.beta_prime
        np.testing.assert_allclose(w @ vacant, w / m.alpha_prime, atol=1e-14)
        np.testing.assert_allclose(occupied @ w, inv_b * w, atol=1e-14)

    def test_bulk_relation_residual_confined_to_truncation_corner(self):
        m = build_mpa(0.6, 0.6, 0.75, chi=9)
        scale = np.sqrt(1.0 - 0.75)
        occupied = m.F / scale
        vacant = scale * m.E
        residual = occupied @ vacant - occupied - vacant
        corner = residual[m.chi - 1, m.chi - 1]
        assert corner == pytest.approx(-1.0, abs=1e-12)
        residual[m.chi - 1, m.chi - 1] = 0.0
        assert np.max(np.abs(residual)) < 1e-12


class TestMpaProfile:
    def test_matches_markov_chain(self):
        p = ModelParams(n_sites=4, alpha=0.3, beta=0.7, tau=0.75, omega=0.0)
        prof = mpa_profile(build_mpa(0.3, 0.7, 0.75), 4)
        target = distribution_profile(stationary_distribution(build_markov(p)), 4)
        np.testing.assert_allclose(prof, target, atol=1e-8)

    def test_equal_subcritical_rates_stay_real(self):
        # here the ladder shift parameter is imaginary, but all observable
        # weights remain real
        prof = mpa_profile(build_mpa(0.2, 0.2, 0.75), 5)
        assert not np.iscomplexobj(prof)
        p = ModelParams(n_sites=5, alpha=0.2, beta=0.2, tau=0.75, omega=0.0)
        target = distribution_profile(stationary_distribution(build_markov(p)), 5)
        np.testing.assert_allclose(prof, target, atol=1e-8)

    def test_bulk_density_sits_on_expected_side_of_half(self):
        low = mpa_profile(build_mpa(0.2, 0.6, 0.75, chi=65), 64)
        high = mpa_profile(build_mpa(0.6, 0.2, 0.75, chi=65), 64)
        assert low[32] < 0.5
        assert high[32] > 0.5

    def test_truncation_is_exact_beyond_chain_length(self):
        for a, b in [(0.2, 0.6), (0.6, 0.2), (0.7, 0.7), (0.3, 0.55)]:
            p20 = mpa_profile(build_mpa(a, b, 0.75, chi=20), 16)
            p40 = mpa_profile(build_mpa(a, b, 0.75, chi=40), 16)
            np.testing.assert_allclose(p20, p40, atol=1e-12)

    def test_rejects_short_chain(self):
        with pytest.raises(ValueError):
            mpa_profile(build_mpa(0.3, 0.7, 0.75), 1)


class TestBuildMarkov:
    def test_rejects_coherent_dynamics(self):
        p = ModelParams(n_sites=3, alpha=0.3, beta=0.7, tau=0.75, omega=np.pi / 4)
        with pytest.raises(ValueError):
            build_markov(p)

    def test_rejects_oversized_chain(self):
        p = ModelParams(
            n_sites=MAX_MARKOV_SITES + 1, alpha=0.3, beta=0.7, tau=0.75, omega=0.0
        )
        with pytest.raises(ValueError):
            build_markov(p)

    @pytest.mark.parametrize("rates", [(0.3, 0.7, 0.75), (0.9, 0.1, 0.5)])
    def test_columns_are_stochastic(self, rates):
        a, b, t = rates
        p = ModelParams(n_sites=4, alpha=a, beta=b, tau=t, omega=0.0)
        m = build_markov(p).matrix.toarray()
        assert np.all(m >= -1e-15)
        np.testing.assert_allclose(m.sum(axis=0), np.ones(16), atol=1e-12)

    def test_zero_rates_give_identity(self):
        p = ModelParams(n_sites=3, alpha=0.0, beta=0.0, tau=0.0, omega=0.0)
        np.testing.assert_allclose(
            build_markov(p).matrix.toarray(), np.eye(8), atol=1e-15
        )

    def test_deterministic_rates_full_update(self):
        # with all rates 1 each configuration maps deterministically:
        # injection fills the left edge, the bond move carries the left
        # particle right, ejection drains the right edge.  Composing the
        # three steps on each of the four two-site configurations:
        # 00 -> (10) -> (01) -> 00, 01 -> (11) -> (11) -> 10,
        # 10 -> (10) -> (01) -> 00, 11 -> (11) -> (11) -> 10.
        p = ModelParams(n_sites=2, alpha=1.0, beta=1.0, tau=1.0, omega=0.0)
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[2, 1] = expected[0, 2] = expected[2, 3] = 1.0
        np.testing.assert_allclose(build_markov(p).matrix.toarray(), expected, atol=1e-15)


class TestStationaryDistribution:
    def test_identity_chain_warns_and_returns_uniform(self):
        p = ModelParams(n_sites=3, alpha=0.0, beta=0.0, tau=0.0, omega=0.0)
        model = build_markov(p)
        with pytest.warns(UserWarning):
            dist = stationary_distribution(model)
        np.testing.assert_allclose(dist, np.full(8, 1 / 8), atol=1e-15)

    def test_is_a_probability_vector(self):
        p = ModelParams(n_sites=5, alpha=0.4, beta=0.6, tau=0.75, omega=0.0)
        dist = stationary_distribution(build_markov(p))
        assert np.all(dist >= 0)
        assert dist.sum() == pytest.approx(1.0, abs=1e-12)

    def test_is_fixed_by_the_chain(self):
        p = ModelParams(n_sites=4, alpha=0.55, beta=0.35, tau=0.6, omega=0.0)
        model = build_markov(p)
        dist = stationary_distribution(model)
        np.testing.assert_allclose(model.matrix @ dist, dist, atol=1e-12)

    def test_matches_quantum_backend_diagonal(self):
        p = ModelParams(n_sites=3, alpha=0.5, beta=0.5, tau=0.75, omega=0.0)
        st, report = evolve_to_ness(init_state(3, "empty"), p, tol=1e-12)
        assert report.converged
        target = stationary_distribution(build_markov(p))
        np.testing.assert_allclose(
            np.diag(density_matrix(st)).real, target, atol=1e-8
        )

    def test_nonconvergence_raises(self):
        p = ModelParams(n_sites=4, alpha=0.3, beta=0.7, tau=0.75, omega=0.0)
        with pytest.raises(RuntimeError):
            stationary_distribution(build_markov(p), tol=1e-15, max_iter=2)


class TestDistributionProfile:
    def test_known_two_config_mixture(self):
        dist = np.zeros(4)
        dist[2] = 0.25  # configuration 10
        dist[3] = 0.75  # configuration 11
        np.testing.assert_allclose(
            distribution_profile(dist, 2), [1.0, 0.75], atol=1e-15
        )

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            distribution_profile(np.ones(5) / 5, 2)


class TestPhaseMap:
    def test_critical_rate_value(self):
        assert critical_rate(0.75) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("tau", [0.0, 1.0])
    def test_critical_rate_domain(self, tau):
        with pytest.raises(ValueError):
            critical_rate(tau)

    @pytest.mark.parametrize(
        "alpha, beta, expected",
        [
            (0.2, 0.6, "LD"),
            (0.6, 0.2, "HD"),
            (0.7, 0.7, "MC"),
            (0.5, 0.5, "MC"),
            (0.5, 0.7, "MC"),
            (0.3, 0.3, "coexistence-line"),
            (0.2, 0.2, "coexistence-line"),
            (0.0, 0.5, "LD"),
            (0.5, 0.0, "HD"),
        ],
    )
    def test_phase_labels(self, alpha, beta, expected):
        assert classify_phase(alpha, beta, 0.75) == expected

    def test_fully_blocked_chain_rejected(self):
        with pytest.raises(ValueError):
            classify_phase(0.0, 0.0, 0.75)

    def test_rates_outside_unit_interval_rejected(self):
        with pytest.raises(ValueError):
            classify_phase(1.2, 0.5, 0.75)
