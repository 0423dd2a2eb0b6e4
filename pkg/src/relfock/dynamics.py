"""Unitary evolution of closed-system states (hbar = 1).

Hamiltonians are assembled from products of ladder and number operators and
hermitized term by term; evolution is the exact matrix exponential through an
eigendecomposition, so norm and energy are conserved to solver precision.
A trilinear conversion family moves quanta out of an embedded product
subspace, which is how a relational trace dynamically drops below one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import SpaceMismatchError
from .hilbert import (
    Embedding,
    FockSpace,
    LinearOperator,
    StateVector,
    charge_operator,
    ladder_operator,
    number_operator,
)
from .tolerances import Tolerances, resolve

_FACTOR_KINDS = ("create", "annihilate", "number")


@dataclass(frozen=True)
class HamiltonianTerm:
    """coefficient times a product of mode operators; factors are (kind,
    mode_label) pairs applied right to left, like operator notation."""

    coefficient: float
    factors: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if isinstance(self.coefficient, complex):
            raise ValueError("term coefficients must be real")
        coeff = float(self.coefficient)
        factors = tuple((str(kind), str(label)) for kind, label in self.factors)
        for kind, _ in factors:
            if kind not in _FACTOR_KINDS:
                raise ValueError(f"unknown operator kind {kind!r}")
        object.__setattr__(self, "coefficient", coeff)
        object.__setattr__(self, "factors", factors)


@dataclass(frozen=True)
class HamiltonianSpec:
    """A Hermitian operator on a space plus the terms it was built from."""

    space: FockSpace
    terms: tuple[HamiltonianTerm, ...]
    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @property
    def space_id(self) -> str:
        return self.space.space_id

    @property
    def operator(self) -> LinearOperator:
        return LinearOperator(self.space_id, self.space_id, self.matrix, hermitian=True)

    def spectral_norm(self) -> float:
        return float(np.abs(np.linalg.eigvalsh(self.matrix)).max())


def build_hamiltonian(space: FockSpace,
                      terms: Sequence[HamiltonianTerm | tuple],
                      tol: Tolerances | None = None) -> HamiltonianSpec:
    """Assemble sum of terms, adding each term's adjoint unless it is already
    self-adjoint. An empty term list gives the zero operator."""
    tol = resolve(tol)
    parsed = tuple(
        t if isinstance(t, HamiltonianTerm) else HamiltonianTerm(t[0], tuple(t[1]))
        for t in terms
    )
    total = np.zeros((space.dimension, space.dimension), dtype=np.complex128)
    for term in parsed:
        mat = np.eye(space.dimension, dtype=np.complex128)
        for kind, label in term.factors:
            if kind == "number":
                op = number_operator(space, label).matrix
            else:
                op = ladder_operator(space, label, kind).matrix
            mat = mat @ op
        mat = term.coefficient * mat
        if float(np.abs(mat - mat.conj().T).max()) < tol.herm:
            total += mat
        else:
            total += mat + mat.conj().T
    dev = float(np.abs(total - total.conj().T).max())
    if dev >= tol.herm:
        raise ValueError(f"assembled Hamiltonian is not Hermitian: max dev {dev:g}")
    return HamiltonianSpec(space=space, terms=parsed, matrix=total)


def free_hamiltonian(space: FockSpace, frequencies: Mapping[str, float]) -> HamiltonianSpec:
    """sum_i omega_i n_i."""
    return build_hamiltonian(
        space, [(float(w), (("number", label),)) for label, w in frequencies.items()]
    )


def conversion_hamiltonian(space: FockSpace, coupling: float,
                           create_labels: Sequence[str],
                           annihilate_labels: Sequence[str]) -> HamiltonianSpec:
    """g(prod a^dagger prod a + h.c.): converts quanta between mode sets.
    With one created and two annihilated modes this is the trilinear family
    that empties an embedded pair into an outside mode."""
    factors = tuple(("create", l) for l in create_labels) + \
        tuple(("annihilate", l) for l in annihilate_labels)
    return build_hamiltonian(space, [(float(coupling), factors)])


def hopping_hamiltonian(space: FockSpace, coupling: float,
                        label_to: str, label_from: str) -> HamiltonianSpec:
    """g(a^dagger_to a_from + h.c.)."""
    return build_hamiltonian(
        space, [(float(coupling), (("create", label_to), ("annihilate", label_from)))]
    )


def _eigensystem(h: HamiltonianSpec) -> tuple[np.ndarray, np.ndarray]:
    return np.linalg.eigh(h.matrix)


def _propagate(w: np.ndarray, u: np.ndarray, amplitudes: np.ndarray, t: float) -> np.ndarray:
    return u @ (np.exp(-1j * w * t) * (u.conj().T @ amplitudes))


def evolve(psi0: StateVector, h: HamiltonianSpec, t: float,
           tol: Tolerances | None = None) -> StateVector:
    """psi(t) = exp(-i H t) psi0, exact through eigendecomposition."""
    tol = resolve(tol)
    psi0.require_space(h.space_id, h.space.dimension)
    if not psi0.is_normalized(tol):
        raise ValueError(f"initial state must be unit norm; |psi|^2 = {psi0.norm_sq!r}")
    w, u = _eigensystem(h)
    return StateVector(psi0.space_id, _propagate(w, u, psi0.amplitudes, float(t)))


@dataclass
class Trajectory:
    """Recorded evolution: states plus scalar monitors at each time."""

    times: np.ndarray
    states: list[StateVector]
    norms: np.ndarray
    energies: np.ndarray
    charge_expectations: dict[str, np.ndarray]
    relational_traces: dict[str, np.ndarray]

    def deficits(self, key: str) -> np.ndarray:
        """Trace deficit 1 - Tr rho for a monitored embedding."""
        return 1.0 - self.relational_traces[key]


def evolve_trajectory(psi0: StateVector, h: HamiltonianSpec, times: Sequence[float],
                      embeddings: Mapping[str, Embedding] | None = None,
                      charge_kinds: Sequence[str] = (),
                      tol: Tolerances | None = None) -> Trajectory:
    """Evolve and record norm, energy, charge expectations and relational
    traces for each registered embedding at every requested time."""
    tol = resolve(tol)
    psi0.require_space(h.space_id, h.space.dimension)
    if not psi0.is_normalized(tol):
        raise ValueError(f"initial state must be unit norm; |psi|^2 = {psi0.norm_sq!r}")
    embeddings = dict(embeddings or {})
    for key, emb in embeddings.items():
        if emb.reference_id != h.space_id:
            raise SpaceMismatchError(
                f"embedding {key!r} references {emb.reference_id!r}, expected {h.space_id!r}"
            )
    charge_mats = {kind: charge_operator(h.space, kind).matrix for kind in charge_kinds}

    w, u = _eigensystem(h)
    times_arr = np.asarray(list(times), dtype=np.float64)
    states: list[StateVector] = []
    norms = np.empty(len(times_arr))
    energies = np.empty(len(times_arr))
    charges = {kind: np.empty(len(times_arr)) for kind in charge_mats}
    traces = {key: np.empty(len(times_arr)) for key in embeddings}
    for i, t in enumerate(times_arr):
        amps = _propagate(w, u, psi0.amplitudes, float(t))
        states.append(StateVector(psi0.space_id, amps))
        norms[i] = float(np.vdot(amps, amps).real)
        energies[i] = float(np.vdot(amps, h.matrix @ amps).real)
        for kind, mat in charge_mats.items():
            charges[kind][i] = float(np.vdot(amps, mat @ amps).real)
        for key, emb in embeddings.items():
            comp = emb.isometry.conj().T @ amps
            traces[key][i] = float(np.vdot(comp, comp).real)
    drift = float(np.abs(norms - 1.0).max()) if len(times_arr) else 0.0
    if drift >= tol.evolve:
        raise ValueError(f"evolution lost unitarity: max norm drift {drift:g}")
    return Trajectory(times=times_arr, states=states, norms=norms, energies=energies,
                      charge_expectations=charges, relational_traces=traces)


def trace_deficit_trajectory(psi0: StateVector, h: HamiltonianSpec, e: Embedding,
                             times: Sequence[float],
                             charge_kinds: Sequence[str] = (),
                             tol: Tolerances | None = None) -> Trajectory:
    """Trajectory with the relational trace of one embedding monitored under
    the key 'subsystem'; deficits('subsystem') gives 1 - Tr rho_A(t)."""
    return evolve_trajectory(psi0, h, times, embeddings={"subsystem": e},
                             charge_kinds=charge_kinds, tol=tol)
