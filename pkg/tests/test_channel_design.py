"""Tests for phase-damping design, the amplitude-damping bounds and the feasibility search."""

import numpy as np
import pytest


class TestPhaseDamping:
    def test_endpoints(self):
        from channel import choi_distance, identity_channel, unitary_channel
        from channel_design import phase_damping_family
        from operator_core import SIGMA_Z
        family = phase_damping_family([0.0, 1.0])
        assert choi_distance(family.channel(1.0), identity_channel(2)) < 1e-12
        assert choi_distance(family.channel(0.0), unitary_channel(SIGMA_Z)) < 1e-12

    def test_off_diagonal_scaling(self, qubit_states):
        from channel import apply
        from channel_design import phase_damping_family
        out = apply(phase_damping_family([0.25]).channel(0.25), qubit_states["+"])
        # off-diagonal 0.5 scaled by 2 theta - 1
        assert out[0, 1] == pytest.approx(-0.25)
        assert out[0, 0] == pytest.approx(0.5)

    def test_theta_out_of_range(self):
        from channel_design import phase_damping_family
        from errors import InvalidInputError
        with pytest.raises(InvalidInputError):
            phase_damping_family([0.5, 1.5])

    def test_empty_grid(self):
        from channel_design import phase_damping_family
        from errors import SchemaError
        with pytest.raises(SchemaError):
            phase_damping_family([])

    def test_processor_reproduces_family(self):
        from channel import choi_distance
        from channel_design import build_phase_damping_processor, phase_damping_family
        from processor import induced_channel
        proc, program_fn = build_phase_damping_processor()
        assert (proc.data_dim, proc.prog_dim) == (2, 2)
        grid = np.linspace(0.0, 1.0, 101)
        family = phase_damping_family(grid)
        worst = max(choi_distance(induced_channel(proc, program_fn(t)), family.channel(t)) for t in grid)
        assert worst <= 1e-10

    def test_half_is_fully_dephasing(self, qubit_states):
        from channel import apply
        from channel_design import build_phase_damping_processor
        from processor import induced_channel
        proc, program_fn = build_phase_damping_processor()
        prog = program_fn(0.5)
        np.testing.assert_allclose(prog.value, np.array([1, 1]) / np.sqrt(2), atol=1e-15)
        out = apply(induced_channel(proc, prog), qubit_states["+"])
        np.testing.assert_allclose(out, np.eye(2) / 2, atol=1e-12)


class TestAmplitudeDamping:
    def test_no_decay(self, rng):
        from channel import choi_distance, identity_channel
        from channel_design import amplitude_damping_family
        assert choi_distance(amplitude_damping_family([0.0]).channel(0.0), identity_channel(2)) < 1e-12

    def test_full_decay(self, rng):
        from channel import apply
        from channel_design import amplitude_damping_family
        from operator_core import random_density
        ch = amplitude_damping_family([1.0]).channel(1.0)
        np.testing.assert_allclose(apply(ch, random_density(2, rng)), np.diag([1, 0]), atol=1e-12)

    def test_half_decay_of_excited_state(self, qubit_states):
        from channel import apply
        from channel_design import amplitude_damping_family
        ch = amplitude_damping_family([0.5]).channel(0.5)
        np.testing.assert_allclose(apply(ch, qubit_states["1"]), np.diag([0.5, 0.5]), atol=1e-12)

    def test_kraus_overlap_closed_form(self, rng):
        from channel_design import kraus_overlap, kraus_overlap_closed_form
        for t1, t2 in rng.uniform(0.0, 1.0, size=(200, 2)):
            np.testing.assert_allclose(kraus_overlap(t1, t2), kraus_overlap_closed_form(t1, t2), atol=1e-12)
        np.testing.assert_allclose(kraus_overlap(0.25, 0.75), kraus_overlap_closed_form(0.25, 0.75), atol=1e-12)

    def test_kraus_overlap_diagonal_is_identity(self, rng):
        from channel_design import kraus_overlap
        for t in rng.uniform(0.0, 1.0, size=50):
            np.testing.assert_allclose(kraus_overlap(t, t), np.eye(2), atol=1e-12)

    def test_kraus_overlap_extremes(self):
        from channel_design import kraus_overlap
        np.testing.assert_allclose(kraus_overlap(0.0, 1.0), np.diag([1, 0]), atol=1e-15)


class TestOverlapBound:
    def test_diagonal_value(self, rng):
        from channel_design import overlap_bound_g
        for t in rng.uniform(1e-6, 1.0, size=20):
            assert overlap_bound_g(t, t) == pytest.approx(1.0)

    def test_geometric_bound_for_small_witness(self):
        from channel_design import overlap_bound_g, zeta_sequence
        z1, z2 = zeta_sequence(2)
        assert overlap_bound_g(z1, z2) <= 1.0 / 3.0

    def test_bound_chain_on_random_pairs(self, rng):
        from channel_design import g_relaxations, overlap_bound_g
        t1 = 1.0 - rng.uniform(0.0, 1.0, size=10000)
        t2 = 1.0 - rng.uniform(0.0, 1.0, size=10000)
        g = overlap_bound_g(t1, t2)
        first, second = g_relaxations(t1, t2)
        assert np.all(g <= first * (1 + 1e-12))
        assert np.all(first <= second * (1 + 1e-12))
        ratio = (t1 + t2) / (t1 + t2 - t1 * t2 / 2)
        assert np.all(ratio <= 4.0 / 3.0 + 1e-12)

    def test_tiny_arguments_stay_finite(self):
        from channel_design import overlap_bound_g, zeta_sequence
        zetas = zeta_sequence(6)
        g = overlap_bound_g(zetas[4], zetas[5])
        assert np.isfinite(g)
        assert 0 < g < 1.0 / 6.0

    def test_both_zero(self):
        from channel_design import overlap_bound_g
        from errors import InvalidInputError
        with pytest.raises(InvalidInputError):
            overlap_bound_g(0.0, 0.0)

    def test_one_zero(self):
        from channel_design import overlap_bound_g
        assert overlap_bound_g(0.0, 0.5) == 0.0

    def test_out_of_range(self):
        from channel_design import overlap_bound_g
        from errors import InvalidInputError
        with pytest.raises(InvalidInputError):
            overlap_bound_g(0.5, 1.5)

    def test_zeta_sequence(self):
        from channel_design import zeta_sequence
        zetas = zeta_sequence(3)
        assert len(zetas) == 3
        assert zetas[0] == pytest.approx(1.0 / 144.0)
        assert all(0 < b < a < 1 for a, b in zip(zetas, zetas[1:]))


class TestLinearIndependence:
    def test_orthonormal_basis(self):
        from channel_design import linear_independence_check
        assert linear_independence_check(list(np.eye(4)))

    def test_duplicate_vectors(self):
        from channel_design import linear_independence_check
        v = np.array([1, 1j]) / np.sqrt(2)
        assert not linear_independence_check([v, v])

    def test_too_many_vectors(self, rng):
        from channel_design import linear_independence_check
        from operator_core import random_state_vector
        assert not linear_independence_check([random_state_vector(2, rng) for _ in range(3)])

    def test_non_unit_vector(self):
        from channel_design import linear_independence_check
        from errors import InvalidInputError
        with pytest.raises(InvalidInputError):
            linear_independence_check([np.array([1, 0]), np.array([1, 1])])

    def test_needs_two_vectors(self):
        from channel_design import linear_independence_check
        from errors import InvalidInputError
        with pytest.raises(InvalidInputError):
            linear_independence_check([np.array([1, 0])])

    def test_mixed_dimensions(self):
        from channel_design import linear_independence_check
        from errors import DimensionMismatch
        with pytest.raises(DimensionMismatch):
            linear_independence_check([np.array([1, 0]), np.array([1, 0, 0])])

    def test_small_overlaps_in_dimension_eight(self, rng):
        from channel_design import small_overlap_condition, linear_independence_check
        vectors = []
        for i in range(5):
            v = np.eye(8)[i] + 0.01 * (rng.standard_normal(8) + 1j * rng.standard_normal(8))
            vectors.append(v / np.linalg.norm(v))
        assert small_overlap_condition(vectors)
        assert linear_independence_check(vectors)

    def test_small_overlaps_imply_independence(self, rng):
        from channel_design import small_overlap_condition, linear_independence_check
        held = 0
        for _ in range(1000):
            count = int(rng.integers(3, 9))
            dim = count + int(rng.integers(0, 4))
            scale = rng.uniform(0.0, 0.15) / np.sqrt(dim)
            vectors = []
            for i in range(count):
                v = np.eye(dim)[i] + scale * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
                vectors.append(v / np.linalg.norm(v))
            if small_overlap_condition(vectors):
                held += 1
                assert linear_independence_check(vectors)
        assert held >= 200


class TestNoGoWitness:
    def test_three_in_two(self):
        from channel_design import no_go_witness
        report = no_go_witness(3, 2)
        assert len(report.bound_checks) == 3
        assert all(check.g < 1.0 / 3.0 for check in report.bound_checks)
        assert report.holds
        assert report.gershgorin_lower_bound > 0
        assert "cannot fit in 2 dimensions" in report.statement

    def test_five_in_four(self):
        from channel_design import no_go_witness
        report = no_go_witness(5, 4)
        assert len(report.bound_checks) == 10
        for check in report.bound_checks:
            assert check.g <= check.relaxation_half_angle * (1 + 1e-12)
            assert check.relaxation_sum < check.geometric < 1.0 / 5.0
        assert report.holds

    def test_bounds_match_direct_formulas(self):
        from channel_design import g_relaxations, no_go_witness, overlap_bound_g
        for check in no_go_witness(5, 4).bound_checks:
            first, second = g_relaxations(check.theta1, check.theta2)
            assert check.g == pytest.approx(overlap_bound_g(check.theta1, check.theta2), rel=1e-12)
            assert check.relaxation_half_angle == pytest.approx(first, rel=1e-12)
            assert check.relaxation_sum == pytest.approx(second, rel=1e-12)

    def test_large_witness_survives_zeta_underflow(self):
        from channel_design import no_go_witness
        report = no_go_witness(100, 2)
        assert report.zeta_sequence[-1] == 0.0
        assert len(report.bound_checks) == 4950
        neighbours = [check for check in report.bound_checks if check.m == check.n + 1]
        assert all(0.0 < check.g < 1.0 / 100 for check in neighbours)
        assert report.gershgorin_lower_bound > 0
        assert report.holds

    def test_gram_bound_matrix(self):
        from channel_design import no_go_witness
        report = no_go_witness(4, 3)
        np.testing.assert_allclose(np.diag(report.gram_matrix), np.ones(4))
        np.testing.assert_allclose(report.gram_matrix, report.gram_matrix.T)
        assert report.min_singular_value > 0.5

    def test_zeta_sequence_stored(self):
        from channel_design import no_go_witness, zeta_sequence
        assert list(no_go_witness(3, 2).zeta_sequence) == zeta_sequence(3)

    def test_no_contradiction_without_extra_vectors(self):
        from channel_design import no_go_witness
        from errors import SchemaError
        with pytest.raises(SchemaError):
            no_go_witness(2, 2)
        with pytest.raises(SchemaError):
            no_go_witness(3, 1)

    def test_report_serializes(self):
        import json
        from channel_design import no_go_witness
        from serialization import dumps
        data = json.loads(dumps(no_go_witness(3, 2).to_dict()))
        assert data["M_witness"] == 3
        assert data["holds"] is True
        assert len(data["bound_checks"]) == 3
        assert data["gram_matrix"]["rows"] == 3


class TestFeasibilitySearch:
    def test_phase_damping_is_found(self):
        from channel import choi_distance
        from channel_design import feasibility_search, phase_damping_family
        from processor import induced_channel
        family = phase_damping_family([0.0, 0.25, 0.5, 0.75, 1.0])
        result = feasibility_search(family, 2, iterations=5000, seed=0)
        assert result.best_residual <= 1e-6
        assert len(result.best_programs) == 5
        for theta, prog in zip(family.theta_grid, result.best_programs):
            assert choi_distance(induced_channel(result.best_processor, prog), family.channel(theta)) <= 1e-3

    def test_constant_identity_with_trivial_program(self):
        from channel import identity_channel
        from channel_design import constant_family, feasibility_search
        result = feasibility_search(constant_family(identity_channel(2), [0.0, 0.5, 1.0]), 1, iterations=400)
        assert result.best_residual <= 1e-10
        g = result.best_processor.G
        np.testing.assert_allclose(g, g[0, 0] * np.eye(2), atol=1e-5)

    def test_amplitude_damping_reports_residual(self):
        from channel_design import amplitude_damping_family, feasibility_search
        from operator_core import is_unitary
        family = amplitude_damping_family([0.1, 0.5, 0.9])
        result = feasibility_search(family, 2, iterations=200, seed=1, starts=2)
        assert np.isfinite(result.best_residual)
        assert result.best_residual >= 0
        assert result.log
        assert is_unitary(result.best_processor.G)
        assert all(np.isfinite(r) for _, r in result.log)

    def test_seeded_and_worker_independent(self):
        from channel_design import amplitude_damping_family, feasibility_search
        family = amplitude_damping_family([0.2, 0.7])
        a = feasibility_search(family, 2, iterations=120, seed=4, starts=3)
        b = feasibility_search(family, 2, iterations=120, seed=4, starts=3)
        c = feasibility_search(family, 2, iterations=120, seed=4, starts=3, workers=3)
        assert a.best_residual == b.best_residual == c.best_residual
        assert a.log == c.log

    def test_log_is_plot_ready(self):
        import json
        from channel_design import feasibility_search, phase_damping_family
        from serialization import dumps
        result = feasibility_search(phase_damping_family([0.3, 0.6]), 2, iterations=100, starts=1)
        data = json.loads(dumps(result.to_dict()))
        assert data["family"] == "phase"
        assert all(len(entry) == 2 for entry in data["log"])
        assert [entry[0] for entry in data["log"]] == sorted(entry[0] for entry in data["log"])

    def test_bad_program_dimension(self):
        from channel_design import feasibility_search, phase_damping_family
        from errors import InvalidInputError
        with pytest.raises(InvalidInputError):
            feasibility_search(phase_damping_family([0.5]), 0)
