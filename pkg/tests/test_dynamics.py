"""Hamiltonian assembly and exact unitary evolution."""
from __future__ import annotations

import numpy as np
import pytest

from relfock import (
    ModeSpec,
    basis_state,
    build_fock_space,
    build_hamiltonian,
    charge_operator,
    conversion_hamiltonian,
    evolve,
    evolve_trajectory,
    free_hamiltonian,
    hopping_hamiltonian,
    mode_partition_embedding,
    number_operator,
    random_state_vector,
    relational_state,
    trace_deficit_trajectory,
)

from conftest import qudit_space


def pair_annihilation_model(g: float = 1.0):
    """Two charged two-level modes whose pair converts into a neutral third
    mode, so the pair subsystem can leave the embedded product space."""
    space = build_fock_space([
        ModeSpec("e-", "fermion", 1, {"electric": -1, "lepton": 1}),
        ModeSpec("e+", "fermion", 1, {"electric": 1, "lepton": -1}),
        ModeSpec("photon", "boson", 1),
    ], "U")
    h = conversion_hamiltonian(space, g, ["photon"], ["e-", "e+"])
    psi0 = basis_state(space, (1, 1, 0))
    embedding = mode_partition_embedding(space, ["e-"], frozen={"photon": 0})
    return space, h, psi0, embedding


class TestBuildHamiltonian:
    def test_free_term_is_diagonal(self):
        sp = build_fock_space([ModeSpec("a", "boson", 2)])
        h = free_hamiltonian(sp, {"a": 2.0})
        np.testing.assert_allclose(h.matrix, np.diag([0.0, 2.0, 4.0]))

    def test_zero_terms_zero_operator(self):
        sp = qudit_space(3, "a")
        h = build_hamiltonian(sp, [])
        assert np.all(h.matrix == 0)

    def test_non_self_adjoint_term_gets_adjoint(self):
        sp = build_fock_space([ModeSpec("a", "boson", 1), ModeSpec("b", "boson", 1)])
        h = hopping_hamiltonian(sp, 0.7, "a", "b")
        dev = np.abs(h.matrix - h.matrix.conj().T).max()
        assert dev == 0.0
        assert np.abs(h.matrix).max() > 0

    def test_trilinear_conserves_mode_sum(self):
        # Oracle: numerical commutator with n_a + n_b.
        sp = build_fock_space([
            ModeSpec("a", "boson", 1), ModeSpec("b", "boson", 1), ModeSpec("c", "boson", 1),
        ])
        h = build_hamiltonian(sp, [(0.9, (("create", "a"), ("annihilate", "b"),
                                          ("annihilate", "c")))])
        assert np.abs(h.matrix - h.matrix.conj().T).max() < 1e-12
        conserved = number_operator(sp, "a").matrix + number_operator(sp, "b").matrix
        comm = h.matrix @ conserved - conserved @ h.matrix
        assert np.abs(comm).max() < 1e-12

    def test_complex_coefficient_rejected(self):
        sp = qudit_space(2, "a")
        with pytest.raises(ValueError, match="real"):
            build_hamiltonian(sp, [(1j, (("number", "a"),))])

    def test_unknown_label_rejected(self):
        sp = qudit_space(2, "a")
        with pytest.raises(ValueError, match="no mode"):
            build_hamiltonian(sp, [(1.0, (("number", "zz"),))])


class TestEvolve:
    def test_zero_hamiltonian_identity(self):
        sp = qudit_space(4, "a")
        h = build_hamiltonian(sp, [])
        psi = random_state_vector(sp, 5)
        out = evolve(psi, h, 3.7)
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-12)

    def test_stationary_state_accumulates_phase_only(self):
        sp = build_fock_space([ModeSpec("a", "boson", 1), ModeSpec("b", "boson", 1)], "S")
        omega = 1.3
        h = free_hamiltonian(sp, {"a": omega})
        psi = basis_state(sp, (1, 0))
        t = 0.9
        out = evolve(psi, h, t)
        np.testing.assert_allclose(
            out.amplitudes, np.exp(-1j * omega * t) * psi.amplitudes, atol=1e-12)
        # relational states do not see the phase
        e = mode_partition_embedding(sp, ["a"])
        rho0 = relational_state(psi, e, "A")
        rho_t = relational_state(out, e, "A")
        np.testing.assert_allclose(rho_t.matrix, rho0.matrix, atol=1e-12)

    def test_rabi_oscillation_against_closed_form(self):
        # Oracle: H = g(sigma+ + sigma-) on a two-level mode, starting excited:
        # psi(t) = cos(g t)|1> - i sin(g t)|0>, population cos^2, return at pi/g.
        sp = build_fock_space([ModeSpec("q", "boson", 1)], "Q")
        g = 0.8
        h = build_hamiltonian(sp, [(g, (("create", "q"),))])
        psi0 = basis_state(sp, (1,))
        for t in np.linspace(0.0, 2 * np.pi / g, 17):
            out = evolve(psi0, h, t)
            expected = np.array([-1j * np.sin(g * t), np.cos(g * t)])
            np.testing.assert_allclose(out.amplitudes, expected, atol=1e-9)
        full_return = evolve(psi0, h, np.pi / g)
        assert abs(np.vdot(full_return.amplitudes, psi0.amplitudes)) == pytest.approx(1.0, abs=1e-9)

    def test_composition_property(self):
        sp = qudit_space(5, "a")
        h = build_hamiltonian(sp, [(0.4, (("create", "a"),)), (1.1, (("number", "a"),))])
        psi = random_state_vector(sp, 8)
        t1, t2 = 0.73, 1.21
        once = evolve(psi, h, t1 + t2)
        twice = evolve(evolve(psi, h, t1), h, t2)
        np.testing.assert_allclose(once.amplitudes, twice.amplitudes, atol=1e-9)

    def test_space_mismatch(self):
        h = build_hamiltonian(qudit_space(3, "a", "S1"), [])
        with pytest.raises(Exception, match="does not live"):
            evolve(random_state_vector(qudit_space(3, "z", "S2"), 1), h, 1.0)


class TestTrajectories:
    def test_norm_energy_charge_conservation(self):
        space, h, psi0, _ = pair_annihilation_model(g=0.6)
        h_norm = h.spectral_norm()
        times = np.linspace(0.0, 100.0 / h_norm, 101)
        traj = evolve_trajectory(psi0, h, times, charge_kinds=("electric", "lepton"))
        assert np.abs(traj.norms - 1.0).max() < 1e-9
        assert np.abs(traj.energies - traj.energies[0]).max() < 1e-9 * h_norm
        for kind in ("electric", "lepton"):
            q = charge_operator(space, kind)
            expect = traj.charge_expectations[kind]
            scale = max(1.0, np.abs(q.matrix).max())
            # the Hamiltonian commutes with both charges
            comm = h.matrix @ q.matrix - q.matrix @ h.matrix
            assert np.abs(comm).max() < 1e-12
            assert np.abs(expect - expect[0]).max() < 1e-9 * scale

    def test_no_coupling_keeps_deficit_zero(self):
        space, _, psi0, embedding = pair_annihilation_model()
        h_free = free_hamiltonian(space, {"e-": 1.0, "e+": 0.5, "photon": 2.0})
        traj = trace_deficit_trajectory(psi0, h_free, embedding,
                                        np.linspace(0.0, 5.0, 21))
        np.testing.assert_allclose(traj.deficits("subsystem"), 0.0, atol=1e-12)

    def test_deficit_curve_matches_projector_oracle(self):
        # Oracle: deficit(t) = 1 - <psi(t)| V V^dagger |psi(t)> with the dense
        # projector, plus the closed form sin^2(g t) for this model.
        g = 0.9
        space, h, psi0, embedding = pair_annihilation_model(g=g)
        times = np.linspace(0.0, np.pi / g, 25)
        traj = trace_deficit_trajectory(psi0, h, embedding, times)
        deficits = traj.deficits("subsystem")
        assert deficits[0] == pytest.approx(0.0, abs=1e-12)
        proj = embedding.isometry @ embedding.isometry.conj().T
        for i, t in enumerate(times):
            psi_t = traj.states[i]
            inside = float(np.vdot(psi_t.amplitudes, proj @ psi_t.amplitudes).real)
            assert deficits[i] == pytest.approx(1.0 - inside, abs=1e-9)
            assert deficits[i] == pytest.approx(np.sin(g * t) ** 2, abs=1e-9)

    def test_deficit_starts_positive_onset(self):
        space, h, psi0, embedding = pair_annihilation_model(g=1.0)
        traj = trace_deficit_trajectory(psi0, h, embedding, [0.0, 0.3, 0.6, 0.9])
        deficits = traj.deficits("subsystem")
        assert deficits[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.diff(deficits) > 0)

    def test_embedding_reference_must_match(self):
        space, h, psi0, _ = pair_annihilation_model()
        other = qudit_space(8, "w", "W")
        bad = mode_partition_embedding(other, ["w"])
        with pytest.raises(Exception, match="reference"):
            trace_deficit_trajectory(psi0, h, bad, [0.0, 1.0])
