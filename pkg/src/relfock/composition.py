"""Schmidt decomposition with residual, composed embeddings, and joint
outcome distributions over several disjoint subsystems.

When the embedded product space is a proper subspace of the reference space,
a reference state splits into a Schmidt sum over the image plus a residual
orthogonal to every product basis state. Joint distributions over n factors
are computed from the reduced state of the full product factor; their
marginals reproduce the lower-order distributions down to the single-factor
eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import EmbeddingValidationError, SpaceMismatchError
from .hilbert import (
    Embedding,
    FockSpace,
    ModePartition,
    ModeSpec,
    StateVector,
    compose_space_id,
    validate_embedding,
)
from .relational import SpectralDecomposition, relational_state
from .tolerances import Tolerances, resolve


@dataclass(frozen=True)
class SchmidtDecomposition:
    """psi = sum_j c_j V(a_j (x) b_j) + residual, with the residual orthogonal
    to every product pair V(a_j (x) b_k).

    Canonical form: coefficients are real nonnegative in descending order
    (phases folded into the A-side vectors; each B-side vector has its first
    largest-modulus component real positive). Under degenerate coefficients
    the pairing is a deterministic convention, flagged via degeneracy_groups.
    """

    coefficients: tuple[float, ...]
    a_vectors: tuple[StateVector, ...]
    b_vectors: tuple[StateVector, ...]
    residual: StateVector
    residual_norm_sq: float
    degeneracy_groups: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    @property
    def degenerate(self) -> bool:
        return any(len(g) > 1 for g in self.degeneracy_groups)


def schmidt_decompose(psi_R: StateVector, e: Embedding,
                      tol: Tolerances | None = None) -> SchmidtDecomposition:
    """Singular value decomposition of the pulled-back state, plus the part of
    psi outside the image as an explicit residual vector."""
    tol = resolve(tol)
    psi_R.require_space(e.reference_id, e.reference.dimension)
    if not psi_R.is_normalized(tol):
        raise ValueError(f"state must be unit norm; |psi|^2 = {psi_R.norm_sq!r}")
    component = e.isometry.conj().T @ psi_R.amplitudes
    phi = component.reshape(e.subsystem.dimension, e.complementer.dimension)
    u, s, vh = np.linalg.svd(phi, full_matrices=False)
    keep = s >= tol.zero_eig
    u, s, vh = u[:, keep], s[keep], vh[keep, :]

    # Phase convention: make each B vector canonical, absorb the opposite
    # phase into the A vector so c_j (x)-products are unchanged.
    a_cols = []
    b_rows = []
    for j in range(len(s)):
        b = vh[j, :]
        idx = int(np.argmax(np.abs(b)))
        pivot = b[idx]
        phase = pivot.conj() / abs(pivot) if abs(pivot) > 0 else 1.0
        b_rows.append(b * phase)
        a_cols.append(u[:, j] * np.conj(phase))

    groups: list[list[int]] = []
    for j in range(len(s)):
        if groups and (s[groups[-1][-1]] - s[j]) < tol.degen:
            groups[-1].append(j)
        else:
            groups.append([j])
    # Within a degenerate group, order pairs by the first index of the
    # largest-modulus component of the A vector (stable for exact ties).
    order = list(range(len(s)))
    for g in groups:
        if len(g) > 1:
            g_sorted = sorted(g, key=lambda j: int(np.argmax(np.abs(a_cols[j]))))
            for pos, j in zip(g, g_sorted):
                order[pos] = j
    s = s[order]
    a_cols = [a_cols[j] for j in order]
    b_rows = [b_rows[j] for j in order]

    residual = psi_R.amplitudes - e.isometry @ component
    res_norm_sq = float(np.vdot(residual, residual).real)
    return SchmidtDecomposition(
        coefficients=tuple(float(x) for x in s),
        a_vectors=tuple(StateVector(e.subsystem_id, a) for a in a_cols),
        b_vectors=tuple(StateVector(e.complementer_id, b) for b in b_rows),
        residual=StateVector(e.reference_id, residual),
        residual_norm_sq=res_norm_sq,
        degeneracy_groups=tuple(tuple(g) for g in groups),
    )


def _joint_subsystem(parts: Sequence[Embedding]) -> FockSpace:
    """Product of the parts' subsystem spaces. Colliding mode labels (which
    only occur for overlapping, i.e. invalid, factorizations) are renamed so
    the defective map can still be materialized and then fail validation."""
    modes: list[ModeSpec] = []
    seen: set[str] = set()
    for i, part in enumerate(parts):
        for mode in part.subsystem.modes:
            label = mode.label
            if label in seen:
                label = f"{mode.label}#{i}"
            seen.add(label)
            modes.append(ModeSpec(label, mode.statistics, mode.max_occupation, mode.charges))
    space_id = reduce(compose_space_id, (p.subsystem_id for p in parts))
    return FockSpace(space_id, tuple(modes))


def compose_embeddings(parts: Sequence[Embedding], validate: bool = True,
                       tol: Tolerances | None = None) -> Embedding:
    """Chain mode-partition embeddings of one reference into a single
    embedding of A_1 (x) ... (x) A_n with the leftover modes as complementer.

    Overlapping factors produce a map that is not an isometry; with
    ``validate`` (the default) that raises EmbeddingValidationError carrying
    the report. Embeddings given by explicit isometries cannot be chained
    automatically; build the joint isometry directly instead.
    """
    tol = resolve(tol)
    if not parts:
        raise ValueError("need at least one embedding to compose")
    reference = parts[0].reference
    for p in parts:
        if p.reference_id != reference.space_id or p.reference.dimension != reference.dimension:
            raise SpaceMismatchError("all parts must embed into the same reference space")
        if p.partition is None:
            raise ValueError(
                "compose_embeddings requires mode-partition embeddings; for explicit"
                " isometries supply the joint isometry via embedding_from_isometry"
            )
    frozen: dict[str, int] = {}
    for p in parts:
        for label, occ in p.partition.frozen:
            if frozen.setdefault(label, occ) != occ:
                raise ValueError(
                    f"inconsistent frozen occupations for mode {label!r}:"
                    f" {frozen[label]} vs {occ}"
                )

    subsystem = _joint_subsystem(parts)
    claimed = [l for p in parts for l in p.partition.subsystem_labels]
    comp_labels = tuple(
        l for l in reference.mode_labels if l not in claimed and l not in frozen
    )
    if comp_labels:
        comp_modes = tuple(reference.modes[reference.mode_index(l)] for l in comp_labels)
        complementer = FockSpace(f"{reference.space_id}[{','.join(comp_labels)}]", comp_modes)
    else:
        complementer = FockSpace.trivial(f"{reference.space_id}[]")

    part_spaces = [p.subsystem for p in parts]
    part_positions = [
        [reference.mode_index(l) for l in p.partition.subsystem_labels] for p in parts
    ]
    comp_positions = [reference.mode_index(l) for l in comp_labels]
    max_occ = [m.max_occupation for m in reference.modes]

    dim_b = complementer.dimension
    matrix = np.zeros((reference.dimension, subsystem.dimension * dim_b), dtype=np.complex128)
    template = [frozen.get(l, 0) for l in reference.mode_labels]
    for a_idx in range(subsystem.dimension):
        joint_occ = subsystem.occupation_of(a_idx)
        occ_a = list(template)
        pos = 0
        overflow = False
        for space, positions in zip(part_spaces, part_positions):
            k = len(space.modes)
            for p, n in zip(positions, joint_occ[pos:pos + k]):
                occ_a[p] += n  # overlapping claims accumulate, possibly past the cutoff
                if occ_a[p] > max_occ[p]:
                    overflow = True
            pos += k
        if overflow:
            continue  # column stays zero: the map cannot be an isometry
        for b_idx in range(dim_b):
            occ = list(occ_a)
            for p, n in zip(comp_positions, complementer.occupation_of(b_idx)):
                occ[p] = n
            matrix[reference.index_of(occ), a_idx * dim_b + b_idx] = 1.0

    partition = ModePartition(tuple(claimed), comp_labels, tuple(sorted(frozen.items())))
    composed = Embedding(subsystem, complementer, reference, matrix, partition)
    if validate:
        report = validate_embedding(composed, tol)
        if not report.passed:
            raise EmbeddingValidationError(
                "composed map is not an isometry (overlapping or inconsistent"
                f" factors): max|V^dagger V - 1| = {report.max_deviation:g}",
                report=report,
            )
    return composed


def regroup_embedding(composed: Embedding, factors: Sequence[FockSpace],
                      keep: Sequence[int]) -> Embedding:
    """Derive from a joint embedding of factors A_1 ... A_n the embedding of
    the kept factors against everything else.

    The isometry is the same matrix with its column multi-index permuted, so
    relational states of the regrouped embedding are exactly consistent with
    the joint one.
    """
    factors = list(factors)
    keep = list(keep)
    dims = [f.dimension for f in factors]
    prod = 1
    for d in dims:
        prod *= d
    if prod != composed.subsystem.dimension:
        raise SpaceMismatchError(
            f"factor dimensions {dims} do not multiply to dim(A) ="
            f" {composed.subsystem.dimension}"
        )
    if len(set(keep)) != len(keep) or any(not 0 <= i < len(factors) for i in keep):
        raise ValueError(f"keep indices {keep} must be distinct positions into {len(factors)} factors")
    rest = [i for i in range(len(factors)) if i not in keep]

    full_dims = dims + [composed.complementer.dimension]
    w = composed.isometry.reshape([composed.reference.dimension] + full_dims)
    perm = [0] + [i + 1 for i in keep] + [i + 1 for i in rest] + [len(full_dims)]
    w = np.transpose(w, perm)

    new_sub = reduce(lambda a, b: _tensor_space(a, b), (factors[i] for i in keep))
    rest_spaces = [factors[i] for i in rest] + (
        [composed.complementer] if composed.complementer.dimension > 1
        or composed.complementer.modes else []
    )
    if rest_spaces:
        new_comp = reduce(lambda a, b: _tensor_space(a, b), rest_spaces)
    else:
        new_comp = composed.complementer
    matrix = w.reshape(composed.reference.dimension,
                       new_sub.dimension * new_comp.dimension)
    return Embedding(new_sub, new_comp, composed.reference, matrix)


def _tensor_space(a: FockSpace, b: FockSpace) -> FockSpace:
    return FockSpace(compose_space_id(a.space_id, b.space_id), a.modes + b.modes)


@dataclass(frozen=True)
class JointDistribution:
    """Probability tensor over the possible internal states of n disjoint
    subsystems. Entries can sum to less than one when the reference state has
    weight outside the joint image."""

    subsystem_ids: tuple[str, ...]
    index_ranges: tuple[int, ...]
    probabilities: np.ndarray
    total: float
    max_imag: float

    def __post_init__(self):
        probs = np.array(self.probabilities, dtype=np.float64)
        probs.flags.writeable = False
        object.__setattr__(self, "probabilities", probs)

    @property
    def party_count(self) -> int:
        return len(self.subsystem_ids)

    def clamped_probabilities(self) -> np.ndarray:
        """Entries clamped into [0, 1] for reporting."""
        return np.clip(self.probabilities, 0.0, 1.0)

    def marginalize(self, axis: int) -> "JointDistribution":
        """Sum out one subsystem."""
        probs = self.probabilities.sum(axis=axis)
        ids = tuple(s for i, s in enumerate(self.subsystem_ids) if i != axis)
        ranges = tuple(r for i, r in enumerate(self.index_ranges) if i != axis)
        return JointDistribution(ids, ranges, probs, total=float(probs.sum()),
                                 max_imag=self.max_imag)


def joint_distribution(psi_I: StateVector, composed: Embedding,
                       spectra: Sequence[SpectralDecomposition],
                       tol: Tolerances | None = None) -> JointDistribution:
    """P(j_1, ..., j_n): probability that each subsystem's realized internal
    state is the j_i-th possible one, simultaneously.

    Each entry is the expectation of the product projector in the reduced
    state of the joint factor. The spectra must come from the same reference
    state through regroupings of the same composed embedding; this is
    re-verified by checking that the single-axis marginals reproduce each
    spectrum's eigenvalues.
    """
    tol = resolve(tol)
    spectra = list(spectra)
    if not spectra:
        raise ValueError("need at least one spectrum")
    dims = [s.eigenvectors[0].dimension if s.eigenvectors else 0 for s in spectra]
    if any(d == 0 for d in dims):
        raise ValueError("every subsystem needs at least one possible internal state")
    prod = 1
    for d in dims:
        prod *= d
    if prod != composed.subsystem.dimension:
        raise SpaceMismatchError(
            f"spectra live on dimensions {dims}, inconsistent with dim(A) ="
            f" {composed.subsystem.dimension}"
        )

    rho = relational_state(psi_I, composed, "A", tol)
    basis = reduce(np.kron, [s.eigenvector_matrix() for s in spectra])
    raw = np.einsum("dm,dm->m", basis.conj(), rho.matrix @ basis)
    max_imag = float(np.abs(raw.imag).max())
    ranges = tuple(s.outcome_count for s in spectra)
    probs = raw.real.reshape(ranges)

    for axis, spectrum in enumerate(spectra):
        marg = probs.sum(axis=tuple(i for i in range(len(spectra)) if i != axis))
        expected = np.array(spectrum.eigenvalues)
        dev = float(np.abs(marg - expected).max())
        if dev > tol.marg:
            raise ValueError(
                f"spectrum for {spectrum.space_id!r} is inconsistent with the joint"
                f" state (marginal deviation {dev:g}); spectra must be computed from"
                " the same reference state and embedding regroupings"
            )

    return JointDistribution(
        subsystem_ids=tuple(s.space_id for s in spectra),
        index_ranges=ranges,
        probabilities=probs,
        total=float(probs.sum()),
        max_imag=max_imag,
    )
