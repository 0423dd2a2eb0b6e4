"""Schmidt decomposition with residual, composed embeddings, joint
distributions."""
from __future__ import annotations

from functools import reduce

import numpy as np
import pytest

from relfock import (
    EmbeddingValidationError,
    ModeSpec,
    StateVector,
    basis_state,
    bell_state,
    build_fock_space,
    compose_embeddings,
    identity_embedding,
    joint_distribution,
    mode_partition_embedding,
    possible_internal_states,
    random_isometry_embedding,
    random_state_vector,
    regroup_embedding,
    relational_state,
    schmidt_decompose,
    tensor_product,
    validate_embedding,
)

from conftest import qudit_space, random_pair
from test_relational import deficient_bell_pair


def padded_sorted_desc(values, length):
    out = sorted((float(v) for v in values), reverse=True)
    return np.array(out + [0.0] * (length - len(out)))


def reconstruct(dec, e):
    total = np.array(dec.residual.amplitudes)
    for c, a, b in zip(dec.coefficients, dec.a_vectors, dec.b_vectors):
        total = total + c * (e.isometry @ np.kron(a.amplitudes, b.amplitudes))
    return total


class TestSchmidt:
    def test_bell_state(self):
        sp = build_fock_space([ModeSpec("q0"), ModeSpec("q1")], "R")
        e = mode_partition_embedding(sp, ["q0"])
        dec = schmidt_decompose(bell_state(sp), e)
        np.testing.assert_allclose(dec.coefficients, [1 / np.sqrt(2)] * 2, atol=1e-12)
        assert dec.residual_norm_sq == pytest.approx(0.0, abs=1e-12)

    def test_product_state_single_coefficient(self):
        a, b = qudit_space(3, "a"), qudit_space(2, "b")
        e = identity_embedding(a, b)
        psi = tensor_product(random_state_vector(a, 1), random_state_vector(b, 2))
        dec = schmidt_decompose(StateVector(e.reference_id, psi.amplitudes), e)
        assert dec.rank == 1
        assert dec.coefficients[0] == pytest.approx(1.0, abs=1e-12)
        assert dec.residual_norm_sq == pytest.approx(0.0, abs=1e-12)

    def test_deficient_bell_against_relational_spectra(self):
        sp, e, psi = deficient_bell_pair()
        dec = schmidt_decompose(psi, e)
        np.testing.assert_allclose(
            sorted(dec.coefficients), sorted([np.sqrt(0.35)] * 2), atol=1e-10)
        assert dec.residual_norm_sq == pytest.approx(0.3, abs=1e-10)
        # residual equals the direct projector computation
        proj = e.isometry @ e.isometry.conj().T
        expected_residual = psi.amplitudes - proj @ psi.amplitudes
        np.testing.assert_allclose(dec.residual.amplitudes, expected_residual, atol=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_reconstruction_and_orthogonality(self, seed):
        psi, e = random_pair(seed * 17 + 9)
        dec = schmidt_decompose(psi, e)
        err = np.abs(reconstruct(dec, e) - psi.amplitudes).max()
        assert err < 1e-10
        # residual orthogonal to ALL product pairs, not only the diagonal
        for a in dec.a_vectors:
            for b in dec.b_vectors:
                product = e.isometry @ np.kron(a.amplitudes, b.amplitudes)
                assert abs(np.vdot(dec.residual.amplitudes, product)) < 1e-10
        total = sum(c * c for c in dec.coefficients) + dec.residual_norm_sq
        assert total == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("seed", range(6))
    def test_coefficients_match_both_relational_spectra(self, seed):
        psi, e = random_pair(seed * 19 + 1)
        dec = schmidt_decompose(psi, e)
        c_sq = padded_sorted_desc([c * c for c in dec.coefficients],
                                  max(e.subsystem.dimension, e.complementer.dimension))
        for factor, dim in (("A", e.subsystem.dimension), ("B", e.complementer.dimension)):
            spectrum = possible_internal_states(relational_state(psi, e, factor))
            eigs = padded_sorted_desc(spectrum.eigenvalues, len(c_sq))
            np.testing.assert_allclose(c_sq, eigs, atol=1e-10)

    def test_vectors_orthonormal_and_coefficients_nonneg(self):
        psi, e = random_pair(404)
        dec = schmidt_decompose(psi, e)
        assert all(c >= 0 for c in dec.coefficients)
        amat = np.stack([v.amplitudes for v in dec.a_vectors], axis=1)
        bmat = np.stack([v.amplitudes for v in dec.b_vectors], axis=1)
        np.testing.assert_allclose(amat.conj().T @ amat, np.eye(dec.rank), atol=1e-10)
        np.testing.assert_allclose(bmat.conj().T @ bmat, np.eye(dec.rank), atol=1e-10)


def three_qubit_space():
    return build_fock_space([ModeSpec("q0"), ModeSpec("q1"), ModeSpec("q2")], "R3q")


class TestComposeEmbeddings:
    def test_two_single_qubit_factors(self):
        sp = three_qubit_space()
        parts = [mode_partition_embedding(sp, ["q0"]),
                 mode_partition_embedding(sp, ["q1"])]
        joint = compose_embeddings(parts)
        assert joint.subsystem.dimension == 4
        assert joint.complementer.dimension == 2
        assert joint.isometry.shape == (8, 8)
        assert validate_embedding(joint).passed

    def test_swapped_factors_transpose_distribution(self):
        sp = three_qubit_space()
        amps = np.zeros(8, dtype=complex)
        amps[0b000] = 0.6
        amps[0b110] = 0.8
        psi = StateVector(sp.space_id, amps)
        e0 = mode_partition_embedding(sp, ["q0"])
        e1 = mode_partition_embedding(sp, ["q1"])

        def dist(parts):
            joint = compose_embeddings(parts)
            factors = [p.subsystem for p in parts]
            spectra = [
                possible_internal_states(relational_state(
                    psi, regroup_embedding(joint, factors, [i]), "A"))
                for i in range(len(parts))
            ]
            return joint_distribution(psi, joint, spectra)

        d01 = dist([e0, e1])
        d10 = dist([e1, e0])
        np.testing.assert_allclose(d01.probabilities, d10.probabilities.T, atol=1e-12)

    def test_overlapping_factors_fail_validation(self):
        sp = three_qubit_space()
        parts = [mode_partition_embedding(sp, ["q0"]),
                 mode_partition_embedding(sp, ["q0"])]
        with pytest.raises(EmbeddingValidationError) as err:
            compose_embeddings(parts)
        assert err.value.report.max_deviation > 0.5
        # the defective map itself can be materialized and inspected
        broken = compose_embeddings(parts, validate=False)
        assert not validate_embedding(broken).passed

    def test_frozen_conflict_rejected(self):
        sp = three_qubit_space()
        parts = [mode_partition_embedding(sp, ["q0"], frozen={"q2": 0}),
                 mode_partition_embedding(sp, ["q1"], frozen={"q2": 1})]
        with pytest.raises(ValueError, match="frozen"):
            compose_embeddings(parts)

    def test_explicit_isometry_parts_rejected(self):
        a, b, r = qudit_space(2, "a"), qudit_space(2, "b"), qudit_space(5, "r")
        e = random_isometry_embedding(a, b, r, seed=3)
        with pytest.raises(ValueError, match="mode-partition"):
            compose_embeddings([e])


def random_multiparty(seed: int, dims: tuple[int, ...], dim_b: int, dim_r: int):
    """Random joint embedding of several abstract factors plus a state."""
    factors = [qudit_space(d, f"m{i}", f"F{i}x{seed}") for i, d in enumerate(dims)]
    sub = reduce(tensor_product, factors)
    comp = qudit_space(dim_b, "env", f"E{seed}")
    ref = qudit_space(dim_r, "ref", f"Rr{seed}")
    joint = random_isometry_embedding(sub, comp, ref, seed=seed)
    psi = random_state_vector(ref, seed=seed + 1)
    return psi, joint, factors


def spectra_for(psi, joint, factors):
    return [
        possible_internal_states(relational_state(
            psi, regroup_embedding(joint, factors, [i]), "A"))
        for i in range(len(factors))
    ]


class TestJointDistribution:
    def test_bell_state_perfect_correlation(self):
        sp = build_fock_space([ModeSpec("q0"), ModeSpec("q1")], "R")
        psi = bell_state(sp)
        parts = [mode_partition_embedding(sp, ["q0"]),
                 mode_partition_embedding(sp, ["q1"])]
        joint = compose_embeddings(parts)
        factors = [p.subsystem for p in parts]
        dist = joint_distribution(psi, joint, spectra_for(psi, joint, factors))
        probs = dist.probabilities
        assert probs.shape == (2, 2)
        assert probs[0, 0] + probs[1, 1] == pytest.approx(1.0, abs=1e-10)
        assert abs(probs[0, 1]) < 1e-10 and abs(probs[1, 0]) < 1e-10
        assert probs[0, 0] == pytest.approx(0.5, abs=1e-10)

    def test_product_state_single_certain_entry(self):
        sp = build_fock_space([ModeSpec("q0"), ModeSpec("q1")], "R")
        psi = basis_state(sp, (1, 0))
        parts = [mode_partition_embedding(sp, ["q0"]),
                 mode_partition_embedding(sp, ["q1"])]
        joint = compose_embeddings(parts)
        factors = [p.subsystem for p in parts]
        dist = joint_distribution(psi, joint, spectra_for(psi, joint, factors))
        assert dist.probabilities.shape == (1, 1)
        assert dist.probabilities[0, 0] == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("seed", range(5))
    def test_three_party_dense_oracle(self, seed):
        # Oracle: P = <psi| V (pi_1 x pi_2 x pi_3 x 1_B) V^dagger |psi> with
        # every projector built dense on the reference space.
        psi, joint, factors = random_multiparty(seed * 23 + 7, (2, 2, 2), 1, 10)
        spectra = spectra_for(psi, joint, factors)
        dist = joint_distribution(psi, joint, spectra)
        dim_b = joint.complementer.dimension
        for jj in np.ndindex(*dist.index_ranges):
            pis = [spectra[i].projector(j) for i, j in enumerate(jj)]
            middle = reduce(np.kron, pis)
            middle = np.kron(middle, np.eye(dim_b))
            mat = joint.isometry @ middle @ joint.isometry.conj().T
            expected = float(np.vdot(psi.amplitudes, mat @ psi.amplitudes).real)
            assert dist.probabilities[jj] == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("seed", range(4))
    def test_marginalization_chain(self, seed):
        psi, joint, factors = random_multiparty(seed * 41 + 3, (2, 3, 2), 2, 36)
        spectra = spectra_for(psi, joint, factors)
        dist3 = joint_distribution(psi, joint, spectra)
        for drop in range(3):
            keep = [i for i in range(3) if i != drop]
            sub_joint = regroup_embedding(joint, factors, keep)
            sub_spectra = [spectra[i] for i in keep]
            dist2 = joint_distribution(psi, sub_joint, sub_spectra)
            np.testing.assert_allclose(
                dist3.probabilities.sum(axis=drop), dist2.probabilities, atol=1e-9)
            # and down to one party: entries equal the eigenvalues
            for axis, i in enumerate(keep):
                marg1 = dist2.probabilities.sum(axis=1 - axis)
                np.testing.assert_allclose(marg1, spectra[i].eigenvalues, atol=1e-9)

    def test_entries_nonnegative_and_total_bounded(self):
        psi, joint, factors = random_multiparty(99, (2, 2), 2, 24)
        dist = joint_distribution(psi, joint, spectra_for(psi, joint, factors))
        assert dist.probabilities.min() > -1e-10
        assert dist.total <= 1 + 1e-10
        assert dist.max_imag < 1e-10

    def test_inconsistent_spectra_rejected(self):
        psi, joint, factors = random_multiparty(7, (2, 2), 1, 8)
        other_psi = random_state_vector(joint.reference, seed=1000)
        wrong = spectra_for(other_psi, joint, factors)
        with pytest.raises(ValueError, match="inconsistent"):
            joint_distribution(psi, joint, wrong)

    def test_marginalize_method(self):
        psi, joint, factors = random_multiparty(55, (2, 2), 1, 9)
        dist = joint_distribution(psi, joint, spectra_for(psi, joint, factors))
        marg = dist.marginalize(1)
        assert marg.subsystem_ids == dist.subsystem_ids[:1]
        np.testing.assert_allclose(marg.probabilities, dist.probabilities.sum(axis=1))
