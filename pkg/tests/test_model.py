"""Gate constructors, Kraus extraction, channels, and the Lindblad generator."""

import numpy as np
import pytest
import scipy.linalg

from qca_tasep import (
    GateMatrix,
    KrausChannel,
    ModelParams,
    build_bulk_hop_gate,
    build_coherent_hop,
    build_left_boundary_gate,
    build_right_boundary_gate,
    bulk_channel,
    derive_kraus,
    left_boundary_channel,
    lindblad_generator,
    right_boundary_channel,
)

# Two-site basis ordering: |00>, |01>, |10>, |11> with the left site as the
# most significant bit; "01" means left vacant, right occupied.
KET_01 = np.array([0.0, 1.0, 0.0, 0.0], dtype=complex)
KET_10 = np.array([0.0, 0.0, 1.0, 0.0], dtype=complex)


class TestModelParams:
    def test_defaults(self):
        p = ModelParams(n_sites=6, alpha=0.3, beta=0.7)
        assert p.tau == 0.75
        assert p.omega == np.pi / 4

    def test_rejects_short_chain(self):
        with pytest.raises(ValueError):
            ModelParams(n_sites=1, alpha=0.3, beta=0.7)

    @pytest.mark.parametrize("field", ["alpha", "beta", "tau"])
    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_rejects_rates_outside_unit_interval(self, field, bad):
        kwargs = {"n_sites": 4, "alpha": 0.3, "beta": 0.7, field: bad}
        with pytest.raises(ValueError):
            ModelParams(**kwargs)

    def test_rejects_non_finite_angle(self):
        with pytest.raises(ValueError):
            ModelParams(n_sites=4, alpha=0.3, beta=0.7, omega=np.nan)


class TestGateMatrix:
    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            GateMatrix(
                np.diag([1.0, 1.0, 1.0, 0.5]),
                site_span=("system-left", "system-right"),
            )

    def test_rejects_shape_span_mismatch(self):
        with pytest.raises(ValueError):
            GateMatrix(np.eye(4), site_span=("ancilla", "system-left", "system-right"))

    def test_n_qubits(self):
        span = ("ancilla", "system-left", "system-right")
        assert GateMatrix(np.eye(8), site_span=span).n_qubits == 3


class TestCoherentHop:
    def test_zero_angle_is_identity(self):
        np.testing.assert_allclose(build_coherent_hop(0.0).entries, np.eye(4), atol=1e-15)

    def test_quarter_angle_splits_single_particle(self):
        # one particle on the right half-hops: |01> -> (|01> - i|10>)/sqrt(2)
        out = build_coherent_hop(np.pi / 4).entries @ KET_01
        expected = (KET_01 - 1j * KET_10) / np.sqrt(2)
        np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_half_angle_swaps_completely(self):
        out = build_coherent_hop(np.pi / 2).entries @ KET_10
        np.testing.assert_allclose(out, -1j * KET_01, atol=1e-15)

    def test_occupation_blocked_sectors_untouched(self):
        g = build_coherent_hop(0.37).entries
        for idx in (0, 3):  # |00> and |11> have nothing to hop
            col = np.zeros(4, dtype=complex)
            col[idx] = 1.0
            np.testing.assert_allclose(g @ col, col, atol=1e-15)


class TestBulkHopGate:
    # Three-qubit ordering (ancilla, left, right); ancilla is the most
    # significant bit, so |0,10> = index 2 and |1,01> = index 5.
    def test_zero_rate_is_identity(self):
        np.testing.assert_allclose(build_bulk_hop_gate(0.0).entries, np.eye(8), atol=1e-15)

    def test_unit_rate_moves_particle_and_flags_ancilla(self):
        g = build_bulk_hop_gate(1.0).entries
        assert g[5, 2] == pytest.approx(1j, abs=1e-15)
        assert g[2, 2] == pytest.approx(0.0, abs=1e-15)

    def test_partial_rate_amplitudes(self):
        g = build_bulk_hop_gate(0.75).entries
        assert g[2, 2] == pytest.approx(0.5, abs=1e-15)  # sqrt(1 - 0.75)
        assert g[5, 2] == pytest.approx(1j * np.sqrt(0.75), abs=1e-15)
        assert g[2, 5] == pytest.approx(1j * np.sqrt(0.75), abs=1e-15)
        assert g[5, 5] == pytest.approx(0.5, abs=1e-15)


class TestBoundaryGates:
    def test_left_zero_rate_is_identity(self):
        np.testing.assert_allclose(
            build_left_boundary_gate(0.0).entries, np.eye(4), atol=1e-15
        )

    def test_left_unit_rate_injects_deterministically(self):
        g = build_left_boundary_gate(1.0).entries
        assert g[3, 0] == pytest.approx(1j, abs=1e-15)
        assert g[0, 0] == pytest.approx(0.0, abs=1e-15)

    def test_left_partial_rate(self):
        g = build_left_boundary_gate(0.51).entries
        assert g[0, 0] == pytest.approx(np.sqrt(0.49), abs=1e-15)
        assert g[0, 3] == pytest.approx(1j * np.sqrt(0.51), abs=1e-15)

    def test_right_partial_rate(self):
        g = build_right_boundary_gate(0.75).entries
        assert g[1, 1] == pytest.approx(0.5, abs=1e-15)
        assert g[2, 1] == pytest.approx(1j * np.sqrt(0.75), abs=1e-15)
        assert g[2, 2] == pytest.approx(0.5, abs=1e-15)

    def test_occupied_sectors_passive(self):
        # injection acts only when the edge site is empty; ejection only when
        # it is filled
        gl = build_left_boundary_gate(0.8).entries
        col = np.zeros(4, dtype=complex)
        col[1] = 1.0  # ancilla 0, site already occupied
        np.testing.assert_allclose(gl @ col, col, atol=1e-15)


def expected_bulk_kraus(tau):
    k_stay = np.eye(4, dtype=complex)
    k_stay[2, 2] = np.sqrt(1.0 - tau)
    k_move = np.zeros((4, 4), dtype=complex)
    k_move[1, 2] = 1j * np.sqrt(tau)
    return k_stay, k_move


class TestDeriveKraus:
    @pytest.mark.parametrize("tau", [0.0, 0.25, 0.5, 0.75, 1.0])
    def test_bulk_closed_form(self, tau):
        ops = derive_kraus(build_bulk_hop_gate(tau)).ops
        k_stay, k_move = expected_bulk_kraus(tau)
        np.testing.assert_allclose(ops[0], k_stay, atol=1e-15)
        np.testing.assert_allclose(ops[1], k_move, atol=1e-15)

    @pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
    def test_left_boundary_closed_form(self, alpha):
        ops = derive_kraus(build_left_boundary_gate(alpha)).ops
        np.testing.assert_allclose(
            ops[0], np.diag([np.sqrt(1 - alpha), 1.0]), atol=1e-15
        )
        expected_fill = np.zeros((2, 2), dtype=complex)
        expected_fill[1, 0] = 1j * np.sqrt(alpha)
        np.testing.assert_allclose(ops[1], expected_fill, atol=1e-15)

    @pytest.mark.parametrize("beta", [0.0, 0.6, 1.0])
    def test_right_boundary_closed_form(self, beta):
        ops = derive_kraus(build_right_boundary_gate(beta)).ops
        np.testing.assert_allclose(
            ops[0], np.diag([1.0, np.sqrt(1 - beta)]), atol=1e-15
        )
        expected_drain = np.zeros((2, 2), dtype=complex)
        expected_drain[0, 1] = 1j * np.sqrt(beta)
        np.testing.assert_allclose(ops[1], expected_drain, atol=1e-15)

    def test_ancilla_started_occupied(self):
        # flipping the ancilla reference state swaps which branch is which
        ch = derive_kraus(build_bulk_hop_gate(0.36), ancilla_init=1)
        total = sum(k.conj().T @ k for k in ch.ops)
        np.testing.assert_allclose(total, np.eye(4), atol=1e-14)

    def test_support_and_labels(self):
        ch = derive_kraus(build_bulk_hop_gate(0.5))
        assert ch.support == 2
        assert len(ch.ops) == len(ch.labels) == 2


class TestKrausChannel:
    def test_completeness_defect_zero_for_unitary(self):
        ch = KrausChannel((np.eye(4),), support=2, labels=("identity",))
        assert ch.completeness_defect() == pytest.approx(0.0, abs=1e-15)

    def test_rejects_label_count_mismatch(self):
        with pytest.raises(ValueError):
            KrausChannel((np.eye(4),), support=2)

    def test_rejects_incomplete_ops(self):
        bad = (0.5 * np.eye(2), 0.5 * np.eye(2))
        with pytest.raises(ValueError):
            KrausChannel(bad, support=1, labels=("a", "b"))

    def test_superoperator_shape_and_action(self):
        ch = left_boundary_channel(0.3)
        sup = ch.superoperator()
        assert sup.shape == (4, 4)
        rho = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        out = (sup @ rho.reshape(-1)).reshape(2, 2)
        np.testing.assert_allclose(np.diag(out).real, [0.7, 0.3], atol=1e-15)


class TestChannels:
    def test_bulk_channel_identity_at_zero(self):
        ch = bulk_channel(0.0, 0.0)
        np.testing.assert_allclose(ch.ops[0], np.eye(4), atol=1e-15)
        np.testing.assert_allclose(ch.ops[1], np.zeros((4, 4)), atol=1e-15)

    def test_bulk_channel_zero_angle_is_bare_hop(self):
        ch = bulk_channel(0.42, 0.0)
        k_stay, k_move = expected_bulk_kraus(0.42)
        np.testing.assert_allclose(ch.ops[0], k_stay, atol=1e-15)
        np.testing.assert_allclose(ch.ops[1], k_move, atol=1e-15)

    def test_bulk_channel_coherent_split_amplitude(self):
        # full hop after a half-split leaves amplitude 1/sqrt(2) on |01>
        ch = bulk_channel(1.0, np.pi / 4)
        out = ch.ops[1] @ KET_01
        np.testing.assert_allclose(out, KET_01 / np.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("tau", np.linspace(0.0, 1.0, 6))
    @pytest.mark.parametrize("omega", np.linspace(0.0, np.pi / 2, 5))
    def test_bulk_completeness_grid(self, tau, omega):
        assert bulk_channel(tau, omega).completeness_defect() < 1e-12

    @pytest.mark.parametrize("rate", np.linspace(0.0, 1.0, 6))
    def test_boundary_completeness(self, rate):
        assert left_boundary_channel(rate).completeness_defect() < 1e-12
        assert right_boundary_channel(rate).completeness_defect() < 1e-12


def trace_functional(dim):
    """Row vector t with t @ vec(rho) = tr(rho) for row-major vectorization."""
    t = np.zeros(dim * dim)
    t[:: dim + 1] = 1.0
    return t


class TestLindbladGenerator:
    def test_zero_rates_zero_generator(self):
        gen = lindblad_generator(3, 0.0, 0.0, 0.0)
        assert np.max(np.abs(gen.matrix)) == 0.0

    def test_single_site_source_fills_site(self):
        gen = lindblad_generator(1, 1.0, 0.0, 0.0)
        ness = scipy.linalg.null_space(gen.matrix)
        assert ness.shape[1] == 1
        rho = ness[:, 0].reshape(2, 2)
        rho = rho / np.trace(rho)
        np.testing.assert_allclose(rho, np.diag([0.0, 1.0]), atol=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_trace_preservation(self, n):
        gen = lindblad_generator(n, 0.8, 0.5, 1.0)
        t = trace_functional(2**n)
        assert np.max(np.abs(t @ gen.matrix)) < 1e-10

    def test_derivative_preserves_hermiticity(self):
        rng = np.random.default_rng(7)
        gen = lindblad_generator(2, 0.6, 0.4, 1.0)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        drho = (gen.matrix @ rho.reshape(-1)).reshape(4, 4)
        np.testing.assert_allclose(drho, drho.conj().T, atol=1e-12)

    def test_rejects_oversized_chain(self):
        with pytest.raises(ValueError):
            lindblad_generator(7, 1.0, 1.0, 1.0)

    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            lindblad_generator(3, -1.0, 1.0, 1.0)

    def test_fields(self):
        gen = lindblad_generator(2, 0.1, 0.2, 0.3)
        assert gen.n_sites == 2
        assert gen.matrix.shape == (16, 16)
