import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heisenflow.errors import DimensionError, ValidationError
from heisenflow.games import born_oracle
from heisenflow.operators import (
    CompositeSpace,
    HeisenbergState,
    MatrixUnitFamily,
    Observable,
    ProjectorFamily,
    Spectrum,
    Unitary,
    accessible_info,
    evolve,
    express_in_family,
    frob,
    is_pure,
    joint_family,
    make_matrix_units,
    spectral_decompose,
    tensor_embed,
)
from heisenflow.sampling import random_hermitian, random_observable, random_unitary, rng_from

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)

seeds = st.integers(min_value=0, max_value=2**31 - 1)
dims = st.integers(min_value=1, max_value=6)


class TestSpectralDecompose:
    def test_diagonal(self):
        obs = spectral_decompose(np.diag([1.0, 2.0]))
        assert obs.spectrum.values == (1.0, 2.0)
        np.testing.assert_allclose(obs.projectors[0], np.diag([1, 0]), atol=1e-12)
        np.testing.assert_allclose(obs.projectors[1], np.diag([0, 1]), atol=1e-12)

    def test_full_degeneracy_groups_into_identity(self):
        obs = spectral_decompose(np.eye(3))
        assert obs.spectrum.values == (1.0,)
        assert len(obs.family) == 1
        np.testing.assert_allclose(obs.projectors[0], np.eye(3), atol=1e-12)
        assert obs.family.ranks == (3,)

    def test_random_reconstructs(self):
        h = random_hermitian(4, rng_from(0))
        assert frob(spectral_decompose(h).matrix - h) < 1e-10

    def test_close_eigenvalues_group(self):
        obs = spectral_decompose(np.diag([0.0, 1e-12, 1.0]))
        assert len(obs.spectrum) == 2
        assert obs.family.ranks == (2, 1)

    def test_grouping_tolerance_controls_split(self):
        obs = spectral_decompose(np.diag([0.0, 1e-6, 1.0]), grouping_tol=1e-9)
        assert len(obs.spectrum) == 3

    def test_non_hermitian_names_asymmetry(self):
        with pytest.raises(ValidationError, match="max asymmetry"):
            spectral_decompose(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_nonpositive_grouping_tol(self):
        with pytest.raises(ValidationError):
            spectral_decompose(np.eye(2), grouping_tol=0.0)

    @settings(max_examples=40, deadline=None)
    @given(seeds, dims)
    def test_round_trip_property(self, seed, n):
        h = random_hermitian(n, rng_from(seed))
        obs = spectral_decompose(h)
        assert frob(obs.matrix - h) < 1e-10
        assert max(obs.family.residuals().values()) < 1e-10


class TestProjectorFamily:
    def test_rejects_incomplete(self):
        with pytest.raises(ValidationError, match="completeness"):
            ProjectorFamily((np.diag([1.0, 0.0]),))

    def test_rejects_non_idempotent(self):
        with pytest.raises(ValidationError):
            ProjectorFamily((np.diag([0.5, 0.5]), np.diag([0.5, 0.5])))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            ProjectorFamily((np.eye(2), np.eye(3)))

    def test_labels_default(self):
        assert ProjectorFamily.computational(3).labels == (0, 1, 2)

    def test_joint_family_of_products(self):
        space = CompositeSpace((2, 2))
        f = joint_family(ProjectorFamily.computational(2).embed(0, space),
                         ProjectorFamily.computational(2).embed(1, space))
        assert f.labels == ((0, 0), (0, 1), (1, 0), (1, 1))
        assert f.rank_one


class TestMatrixUnits:
    def test_qubit_standard_units(self):
        units = make_matrix_units(ProjectorFamily.computational(2))
        np.testing.assert_allclose(units.unit(0, 1), [[0, 1], [0, 0]], atol=1e-15)

    def test_single_unit(self):
        units = make_matrix_units(ProjectorFamily.computational(1))
        np.testing.assert_allclose(units.unit(0, 0), [[1]])

    def test_random_family_exhaustive_algebra(self):
        obs = random_observable(3, rng_from(1))
        units = make_matrix_units(obs.family)
        s = units.units
        worst = 0.0
        for a in range(3):
            for b in range(3):
                for c in range(3):
                    for d in range(3):
                        expected = s[a, d] if b == c else np.zeros((3, 3))
                        worst = max(worst, frob(s[a, b] @ s[c, d] - expected))
        assert worst < 1e-10
        assert units.algebra_residual() < 1e-10

    def test_diagonal_units_are_projectors(self):
        obs = random_observable(4, rng_from(2))
        units = make_matrix_units(obs.family)
        for a in range(4):
            assert frob(units.unit(a, a) - obs.projectors[a]) < 1e-12

    def test_gauge_largest_component_real_positive(self):
        obs = random_observable(4, rng_from(3))
        v = make_matrix_units(obs.family).vectors
        for col in v.T:
            k = int(np.argmax(np.abs(col)))
            assert abs(col[k].imag) < 1e-12 and col[k].real > 0

    def test_gauge_is_deterministic_under_phase_of_input(self):
        basis = random_unitary(3, rng_from(4))
        f1 = ProjectorFamily.from_basis(basis)
        f2 = ProjectorFamily.from_basis(basis * np.exp(1j * np.array([0.3, 1.1, -2.0])))
        np.testing.assert_allclose(make_matrix_units(f1).vectors, make_matrix_units(f2).vectors, atol=1e-12)

    def test_rank_two_rejected(self):
        fam = ProjectorFamily((np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 0.0, 1.0])))
        with pytest.raises(ValidationError, match="rank-1"):
            make_matrix_units(fam)


class TestExpressInFamily:
    def test_same_basis_is_diagonal_pattern(self):
        fam = ProjectorFamily.computational(3)
        beta = express_in_family(fam, make_matrix_units(fam)).beta
        expected = np.zeros((3, 3, 3))
        for c in range(3):
            expected[c, c, c] = 1
        np.testing.assert_allclose(beta, expected, atol=1e-15)

    def test_hadamard_moduli_are_half(self):
        had = Observable.from_basis((1.0, -1.0), HADAMARD)
        beta = express_in_family(had, MatrixUnitFamily.computational(2)).beta
        np.testing.assert_allclose(np.abs(beta), 0.5, atol=1e-15)

    def test_random_reconstruction(self):
        rng = rng_from(5)
        obs, units = random_observable(4, rng), make_matrix_units(random_observable(4, rng).family)
        coeffs = express_in_family(obs, units)
        for p, q in zip(coeffs.reconstruct(units), obs.projectors):
            assert frob(p - q) < 1e-10
        assert coeffs.projector_residual(units) < 1e-10

    def test_entries_are_traces(self):
        rng = rng_from(6)
        obs, units = random_observable(3, rng), make_matrix_units(random_observable(3, rng).family)
        beta = express_in_family(obs, units).beta
        c, d, e = 1, 0, 2
        assert abs(beta[c, d, e] - np.trace(units.unit(e, d) @ obs.projectors[c])) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            express_in_family(ProjectorFamily.computational(2), MatrixUnitFamily.computational(3))


class TestEvolve:
    def test_identity(self):
        a = random_hermitian(3, rng_from(7))
        np.testing.assert_allclose(evolve(a, Unitary.identity(3)), a)

    def test_swap_exchanges_eigenvalues(self):
        out = evolve(np.diag([0.25, 4.0]), Unitary(PAULI_X))
        np.testing.assert_allclose(out, np.diag([4.0, 0.25]), atol=1e-15)

    def test_observable_keeps_labels(self):
        obs = Observable.diagonal((0.25, 4.0))
        moved = evolve(obs, Unitary(PAULI_X))
        assert moved.spectrum.values == (0.25, 4.0)
        np.testing.assert_allclose(moved.matrix, np.diag([4.0, 0.25]), atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            evolve(np.eye(2), Unitary.identity(3))

    def test_non_unitary_rejected(self):
        with pytest.raises(ValidationError):
            Unitary(np.diag([1.0, 2.0]))

    @settings(max_examples=40, deadline=None)
    @given(seeds, dims)
    def test_spectrum_and_hermiticity_preserved(self, seed, n):
        rng = rng_from(seed)
        h, u = random_hermitian(n, rng), Unitary(random_unitary(n, rng))
        out = evolve(h, u)
        assert frob(out - out.conj().T) < 1e-9
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(h), atol=1e-9)


class TestTensorEmbed:
    def test_commuting_embeddings_give_kron(self):
        rng = rng_from(8)
        a, b = random_hermitian(2, rng), random_hermitian(3, rng)
        space = CompositeSpace((2, 3))
        np.testing.assert_allclose(tensor_embed(a, 0, space) @ tensor_embed(b, 1, space), np.kron(a, b), atol=1e-14)

    def test_identity_embeds_to_identity(self):
        space = CompositeSpace((2, 3, 2))
        for slot, d in enumerate(space.dims):
            np.testing.assert_allclose(tensor_embed(np.eye(d), slot, space), np.eye(12))

    def test_trace_doubles(self):
        a = random_hermitian(2, rng_from(9))
        assert abs(np.trace(tensor_embed(a, 0, CompositeSpace((2, 2)))) - 2 * np.trace(a)) < 1e-12

    def test_slot_out_of_range(self):
        with pytest.raises(ValidationError):
            tensor_embed(np.eye(2), 2, CompositeSpace((2, 2)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            tensor_embed(np.eye(3), 0, CompositeSpace((2, 2)))

    def test_index_fusion_is_row_major(self):
        space = CompositeSpace((2, 3))
        assert space.total == 6
        assert space.flat_index((1, 2)) == 5
        assert space.split_index(4) == (1, 1)


class TestStates:
    def test_accessible_info_pure_eigenstate(self):
        rho = HeisenbergState(np.diag([1.0, 0.0]))
        out = accessible_info(rho, Observable.diagonal((3.0, -1.0)))
        np.testing.assert_allclose(out, 3.0 * rho.matrix)

    def test_accessible_info_identity_observable(self):
        rng = rng_from(10)
        v = random_unitary(3, rng)
        rho = HeisenbergState.mixture([0.2, 0.3, 0.5], v.T)
        np.testing.assert_allclose(accessible_info(rho, np.eye(3)), rho.matrix)

    def test_trace_matches_oracle(self):
        rng = rng_from(11)
        obs = random_observable(3, rng)
        rho = HeisenbergState.mixture([0.6, 0.4], random_unitary(3, rng)[:, :2].T)
        assert abs(np.trace(accessible_info(rho, obs)).real - born_oracle(rho, obs)) < 1e-12

    def test_accessible_info_bilinear(self):
        rng = rng_from(12)
        rho = HeisenbergState.pure(random_unitary(3, rng)[:, 0])
        a, b = random_hermitian(3, rng), random_hermitian(3, rng)
        lhs = accessible_info(rho, a + b)
        assert frob(lhs - accessible_info(rho, a) - accessible_info(rho, b)) < 1e-14

    def test_accessible_info_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            accessible_info(HeisenbergState.maximally_mixed(2), np.eye(3))

    def test_purity(self):
        assert is_pure(HeisenbergState(np.diag([0.0, 1.0])))
        assert not is_pure(HeisenbergState.maximally_mixed(2))
        rng = rng_from(13)
        v = random_unitary(3, rng)
        mixed = HeisenbergState.mixture([0.5, 0.5], [v[:, 0], v[:, 1]])
        assert not mixed.purity
        assert np.sum(np.linalg.eigvalsh(mixed.matrix) > 1e-9) == 2

    @pytest.mark.parametrize("bad, message", [
        (np.diag([0.5, 0.6]), "trace"),
        (np.diag([1.5, -0.5]), "positive"),
        (np.array([[0.5, 0.1], [0.3, 0.5]]), "Hermitian"),
    ])
    def test_invalid_states(self, bad, message):
        with pytest.raises(ValidationError, match=message):
            HeisenbergState(bad)


class TestObservable:
    def test_size_mismatch(self):
        with pytest.raises(ValidationError):
            Observable(Spectrum((1.0, 2.0, 3.0)), ProjectorFamily.computational(2))

    def test_given_matrix_must_match(self):
        with pytest.raises(ValidationError):
            Observable(Spectrum((1.0, 2.0)), ProjectorFamily.computational(2), np.diag([2.0, 1.0]))

    def test_spectrum_rejects_nonfinite(self):
        with pytest.raises(ValidationError):
            Spectrum((1.0, float("nan")))

    def test_relabel_keeps_projectors(self):
        obs = random_observable(3, rng_from(14))
        payoff = obs.relabel((5.0, 5.0, -1.0))
        assert payoff.family is obs.family
        assert payoff.reconstruction_residual() < 1e-12
