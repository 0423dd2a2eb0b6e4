"""Truncated Fock spaces, states, operators, and subspace embeddings.

A physical system is a finite-dimensional Hilbert space spanned by occupation
number states of a fixed list of modes. Each mode carries statistics, an
occupation cutoff and integer charges per particle. Composite systems are
tensor products; a subsystem relation A (x) B <= R is represented explicitly
by an isometry from the product space into the reference space, so the image
may be a proper subspace of R.

Index conventions, used everywhere without exception:
  * basis states are occupation tuples enumerated lexicographically, first
    mode most significant;
  * tensor products and embedding columns are A-major: the flat index of
    (a, b) is a * dim_B + b.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import EmbeddingValidationError, SpaceMismatchError
from .tolerances import Tolerances, resolve

CHARGE_KINDS = ("electric", "baryon", "lepton")

Statistics = Literal["boson", "fermion"]


@dataclass(frozen=True)
class ModeSpec:
    """One mode: a label, statistics, an occupation cutoff and its charges.

    Fermion modes always have max_occupation 1; anything else is rejected
    rather than clamped. Charges are integers per particle, keyed by one of
    CHARGE_KINDS; omitted kinds count as zero.
    """

    label: str
    statistics: Statistics = "boson"
    max_occupation: int = 1
    charges: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if not self.label:
            raise ValueError("mode label must be a nonempty string")
        if self.statistics not in ("boson", "fermion"):
            raise ValueError(f"unknown statistics {self.statistics!r}")
        if not isinstance(self.max_occupation, int) or self.max_occupation < 0:
            raise ValueError(f"mode {self.label!r}: max_occupation must be a nonnegative integer")
        if self.statistics == "fermion" and self.max_occupation != 1:
            raise ValueError(
                f"fermion mode {self.label!r} must have max_occupation 1, got {self.max_occupation}"
            )
        charges = self.charges
        if isinstance(charges, Mapping):
            charges = tuple(sorted(charges.items()))
        else:
            charges = tuple(sorted((str(k), v) for k, v in charges))
        for kind, value in charges:
            if kind not in CHARGE_KINDS:
                raise ValueError(f"mode {self.label!r}: unknown charge kind {kind!r}")
            if not isinstance(value, int):
                raise ValueError(f"mode {self.label!r}: charge {kind!r} must be an integer")
        object.__setattr__(self, "charges", charges)

    @property
    def local_dimension(self) -> int:
        return self.max_occupation + 1

    def charge(self, kind: str) -> int:
        if kind not in CHARGE_KINDS:
            raise ValueError(f"unknown charge kind {kind!r}")
        return dict(self.charges).get(kind, 0)


@dataclass(frozen=True)
class FockSpace:
    """A labeled occupation-number space over an ordered list of modes.

    dimension = prod(max_occupation + 1); the basis enumeration is the
    lexicographic order of occupation tuples and is a bijection onto
    [0, dimension).
    """

    space_id: str
    modes: tuple[ModeSpec, ...]
    dimension: int = field(init=False, compare=False, repr=False)
    _strides: tuple[int, ...] = field(init=False, compare=False, repr=False)
    _occupations: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mode labels in space {self.space_id!r}: {labels}")
        dims = [m.local_dimension for m in self.modes]
        dimension = 1
        for d in dims:
            dimension *= d
        strides = []
        acc = 1
        for d in reversed(dims):
            strides.append(acc)
            acc *= d
        strides.reverse()
        occ = np.array(list(itertools.product(*[range(d) for d in dims])), dtype=np.int64)
        occ = occ.reshape(dimension, len(self.modes))
        occ.flags.writeable = False
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "_strides", tuple(strides))
        object.__setattr__(self, "_occupations", occ)

    @classmethod
    def trivial(cls, space_id: str) -> "FockSpace":
        """The one-dimensional space with no modes (empty complementers)."""
        return cls(space_id=space_id, modes=())

    @property
    def mode_labels(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    @property
    def basis_occupations(self) -> np.ndarray:
        """All occupation tuples as a read-only (dimension, n_modes) array."""
        return self._occupations

    def mode_index(self, label: str) -> int:
        for i, m in enumerate(self.modes):
            if m.label == label:
                return i
        raise ValueError(f"space {self.space_id!r} has no mode {label!r}")

    def index_of(self, occupations: Sequence[int]) -> int:
        if len(occupations) != len(self.modes):
            raise ValueError(
                f"expected {len(self.modes)} occupation numbers, got {len(occupations)}"
            )
        index = 0
        for occ, mode, stride in zip(occupations, self.modes, self._strides):
            if not 0 <= occ <= mode.max_occupation:
                raise ValueError(
                    f"occupation {occ} out of range for mode {mode.label!r}"
                    f" (max {mode.max_occupation})"
                )
            index += occ * stride
        return index

    def occupation_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dimension:
            raise ValueError(f"basis index {index} out of range for dimension {self.dimension}")
        return tuple(int(n) for n in self._occupations[index])


def build_fock_space(modes: Iterable[ModeSpec], space_id: str | None = None) -> FockSpace:
    """Construct a truncated Fock space from a nonempty list of mode specs."""
    modes = tuple(modes)
    if not modes:
        raise ValueError("a Fock space needs at least one mode")
    if space_id is None:
        space_id = "fock(" + ",".join(m.label for m in modes) + ")"
    return FockSpace(space_id=space_id, modes=modes)


@dataclass(frozen=True)
class StateVector:
    """A vector in a named space. Not necessarily normalized: residuals and
    projected components are stored as StateVectors too; operations that
    require unit norm check it explicitly."""

    space_id: str
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a one-dimensional vector")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol: Tolerances | None = None) -> bool:
        return abs(self.norm_sq - 1.0) < resolve(tol).norm

    def require_space(self, space_id: str, dimension: int) -> None:
        if self.space_id != space_id or self.dimension != dimension:
            raise SpaceMismatchError(
                f"state in {self.space_id!r} (dim {self.dimension}) does not live in"
                f" {space_id!r} (dim {dimension})"
            )


def basis_state(space: FockSpace, occupations: Sequence[int] | int) -> StateVector:
    """The basis vector for an occupation tuple (or a flat basis index)."""
    index = occupations if isinstance(occupations, int) else space.index_of(occupations)
    if isinstance(occupations, int) and not 0 <= index < space.dimension:
        raise ValueError(f"basis index {index} out of range")
    amps = np.zeros(space.dimension, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(space.space_id, amps)


def state_from_amplitudes(space: FockSpace, amplitudes: Sequence[complex]) -> StateVector:
    amps = np.asarray(amplitudes, dtype=np.complex128)
    if amps.shape != (space.dimension,):
        raise SpaceMismatchError(
            f"expected {space.dimension} amplitudes for space {space.space_id!r},"
            f" got {amps.shape}"
        )
    return StateVector(space.space_id, amps)


def bell_state(
    space: FockSpace,
    pair: tuple[Sequence[int], Sequence[int]] | None = None,
) -> StateVector:
    """Equal superposition of two basis states, (|x> + |y>)/sqrt(2).

    By default x is the vacuum and y has one quantum in every mode, which on
    a pair of two-level modes gives the usual maximally entangled state.
    """
    if pair is None:
        lo = (0,) * len(space.modes)
        hi = (1,) * len(space.modes)
    else:
        lo, hi = pair
    i, j = space.index_of(lo), space.index_of(hi)
    if i == j:
        raise ValueError("the two basis states must differ")
    amps = np.zeros(space.dimension, dtype=np.complex128)
    amps[i] = amps[j] = 1.0 / np.sqrt(2.0)
    return StateVector(space.space_id, amps)


def ghz_state(space: FockSpace) -> StateVector:
    """(|vacuum> + |one quantum in every mode>)/sqrt(2)."""
    return bell_state(space)


def random_state_vector(space: FockSpace, seed: int) -> StateVector:
    """A Haar-ish random unit vector: normalized complex Gaussian amplitudes."""
    rng = np.random.Generator(np.random.PCG64(seed))
    amps = rng.standard_normal(space.dimension) + 1j * rng.standard_normal(space.dimension)
    amps /= np.linalg.norm(amps)
    return StateVector(space.space_id, amps)


@dataclass(frozen=True)
class LinearOperator:
    """A dense matrix between named spaces.

    If hermitian is asserted it is verified at construction against the
    active Hermiticity tolerance.
    """

    domain_space_id: str
    codomain_space_id: str
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.ndim != 2:
            raise ValueError("operator matrix must be two-dimensional")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)
        if self.hermitian:
            if self.domain_space_id != self.codomain_space_id or mat.shape[0] != mat.shape[1]:
                raise ValueError("a Hermitian operator must map a space to itself")
            dev = float(np.abs(mat - mat.conj().T).max()) if mat.size else 0.0
            if dev >= resolve(None).herm:
                raise ValueError(f"operator asserted Hermitian but max|M - M^dagger| = {dev:g}")

    def apply(self, state: StateVector) -> StateVector:
        state.require_space(self.domain_space_id, self.matrix.shape[1])
        return StateVector(self.codomain_space_id, self.matrix @ state.amplitudes)

    def dagger(self) -> "LinearOperator":
        return LinearOperator(
            self.codomain_space_id, self.domain_space_id, self.matrix.conj().T, self.hermitian
        )

    def expectation(self, state: StateVector) -> complex:
        state.require_space(self.domain_space_id, self.matrix.shape[1])
        return complex(np.vdot(state.amplitudes, self.matrix @ state.amplitudes))

    def __matmul__(self, other: "LinearOperator") -> "LinearOperator":
        if not isinstance(other, LinearOperator):
            return NotImplemented
        if other.codomain_space_id != self.domain_space_id:
            raise SpaceMismatchError(
                f"cannot compose: {other.codomain_space_id!r} != {self.domain_space_id!r}"
            )
        return LinearOperator(other.domain_space_id, self.codomain_space_id,
                              self.matrix @ other.matrix)


def identity_operator(space: FockSpace) -> LinearOperator:
    return LinearOperator(space.space_id, space.space_id,
                          np.eye(space.dimension, dtype=np.complex128), hermitian=True)


def _local_annihilator(dim: int) -> np.ndarray:
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for n in range(1, dim):
        mat[n - 1, n] = np.sqrt(n)
    return mat


def _kron_chain(factors: Sequence[np.ndarray]) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def ladder_operator(space: FockSpace, mode_label: str, kind: str) -> LinearOperator:
    """Creation or annihilation operator for one mode of the space.

    Bosonic annihilation maps |n> -> sqrt(n)|n-1>; creation is its adjoint, so
    the top state |n_max> is annihilated by creation (truncation convention,
    no wraparound). Fermionic operators carry a Jordan-Wigner sign string over
    the fermionic modes that precede the target in mode order.
    """
    if kind not in ("create", "annihilate"):
        raise ValueError(f"kind must be 'create' or 'annihilate', got {kind!r}")
    target = space.mode_index(mode_label)
    factors = []
    for i, mode in enumerate(space.modes):
        d = mode.local_dimension
        if i == target:
            local = _local_annihilator(d)
            if kind == "create":
                local = local.conj().T
            factors.append(local)
        elif i < target and space.modes[target].statistics == "fermion" and mode.statistics == "fermion":
            # Jordan-Wigner string: (-1)^n on fermionic modes before the target.
            factors.append(np.diag([(-1.0 + 0j) ** n for n in range(d)]))
        else:
            factors.append(np.eye(d, dtype=np.complex128))
    return LinearOperator(space.space_id, space.space_id, _kron_chain(factors))


def number_operator(space: FockSpace, mode_label: str) -> LinearOperator:
    """Occupation number of one mode; diagonal in the occupation basis."""
    i = space.mode_index(mode_label)
    diag = space.basis_occupations[:, i].astype(np.complex128)
    return LinearOperator(space.space_id, space.space_id, np.diag(diag), hermitian=True)


def charge_values(space: FockSpace, kind: str) -> np.ndarray:
    """Total charge of each basis state as exact integers: sum over modes of
    occupation times per-particle charge."""
    if kind not in CHARGE_KINDS:
        raise ValueError(f"unknown charge kind {kind!r}")
    per_mode = np.array([m.charge(kind) for m in space.modes], dtype=np.int64)
    if len(space.modes) == 0:
        return np.zeros(1, dtype=np.int64)
    return space.basis_occupations @ per_mode


def charge_operator(space: FockSpace, kind: str) -> LinearOperator:
    """Additive charge operator, diagonal in the occupation basis."""
    diag = charge_values(space, kind).astype(np.complex128)
    return LinearOperator(space.space_id, space.space_id, np.diag(diag), hermitian=True)


def compose_space_id(a: str, b: str) -> str:
    return f"{a}(x){b}"


def tensor_product(a, b):
    """Kronecker composition of two spaces, states, or operators (A-major).

    Both arguments must be of the same kind; mode labels of composed spaces
    must stay unique.
    """
    if isinstance(a, FockSpace) and isinstance(b, FockSpace):
        return FockSpace(compose_space_id(a.space_id, b.space_id), a.modes + b.modes)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(compose_space_id(a.space_id, b.space_id),
                           np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, LinearOperator) and isinstance(b, LinearOperator):
        return LinearOperator(
            compose_space_id(a.domain_space_id, b.domain_space_id),
            compose_space_id(a.codomain_space_id, b.codomain_space_id),
            np.kron(a.matrix, b.matrix),
            hermitian=a.hermitian and b.hermitian,
        )
    raise TypeError(
        f"cannot tensor {type(a).__name__} with {type(b).__name__}: kinds must match"
    )


@dataclass(frozen=True)
class ModePartition:
    """Bookkeeping for embeddings built by splitting a space's modes: which
    labels form the subsystem, which the complementer, and which are frozen
    at a fixed occupation (and therefore excluded from both factors)."""

    subsystem_labels: tuple[str, ...]
    complementer_labels: tuple[str, ...]
    frozen: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class Embedding:
    """An isometry V realizing subsystem (x) complementer <= reference.

    V has shape dim(R) x (dim(A) * dim(B)); column a * dim_B + b is the image
    of basis state |a> (x) |b>. The image may be a proper subspace of R.
    """

    subsystem: FockSpace
    complementer: FockSpace
    reference: FockSpace
    isometry: np.ndarray
    partition: ModePartition | None = None

    def __post_init__(self):
        mat = np.array(self.isometry, dtype=np.complex128)
        expected = (self.reference.dimension, self.image_dimension)
        if mat.shape != expected:
            raise SpaceMismatchError(
                f"isometry shape {mat.shape} does not match dim(R) x dim(A)*dim(B)"
                f" = {expected}"
            )
        # dim(A)*dim(B) > dim(R) is not rejected here: such a map exists but can
        # never be an isometry, so validate_embedding reports the failure.
        mat.flags.writeable = False
        object.__setattr__(self, "isometry", mat)

    @property
    def image_dimension(self) -> int:
        return self.subsystem.dimension * self.complementer.dimension

    @property
    def subsystem_id(self) -> str:
        return self.subsystem.space_id

    @property
    def complementer_id(self) -> str:
        return self.complementer.space_id

    @property
    def reference_id(self) -> str:
        return self.reference.space_id


@dataclass(frozen=True)
class EmbeddingValidation:
    passed: bool
    max_deviation: float
    tolerance: float


def validate_embedding(e: Embedding, tol: Tolerances | None = None) -> EmbeddingValidation:
    """Check V^dagger V = identity on A (x) B; report the max deviation."""
    tol = resolve(tol)
    gram = e.isometry.conj().T @ e.isometry
    dev = float(np.abs(gram - np.eye(e.image_dimension)).max())
    return EmbeddingValidation(passed=dev < tol.herm, max_deviation=dev, tolerance=tol.herm)


class ImageProjection(NamedTuple):
    component: np.ndarray  # V^dagger psi, in A (x) B coordinates
    deficiency: float      # |psi|^2 - |V^dagger psi|^2, clamped at zero


def project_onto_image(psi_R: StateVector, e: Embedding,
                       tol: Tolerances | None = None) -> ImageProjection:
    """Split a reference-space vector into its A (x) B component and the weight
    lying outside the image."""
    tol = resolve(tol)
    psi_R.require_space(e.reference_id, e.reference.dimension)
    component = e.isometry.conj().T @ psi_R.amplitudes
    deficiency = psi_R.norm_sq - float(np.vdot(component, component).real)
    if deficiency < -tol.norm:
        raise ValueError(
            f"projection gained weight ({deficiency:g}); the embedding is not an isometry"
        )
    return ImageProjection(component=component, deficiency=max(0.0, deficiency))


def identity_embedding(space_a: FockSpace, space_b: FockSpace,
                       reference: FockSpace | None = None) -> Embedding:
    """Embed A (x) B as all of R. If no reference is given, R is the literal
    product space and the partition bookkeeping is filled in."""
    partition = None
    if reference is None:
        reference = tensor_product(space_a, space_b)
        partition = ModePartition(space_a.mode_labels, space_b.mode_labels)
    dim = space_a.dimension * space_b.dimension
    if reference.dimension != dim:
        raise SpaceMismatchError(
            f"identity embedding needs dim(R) = dim(A)*dim(B); got {reference.dimension} != {dim}"
        )
    return Embedding(space_a, space_b, reference, np.eye(dim, dtype=np.complex128), partition)


def mode_partition_embedding(
    reference: FockSpace,
    subsystem_labels: Sequence[str],
    complementer_labels: Sequence[str] | None = None,
    frozen: Mapping[str, int] | None = None,
    subsystem_id: str | None = None,
    complementer_id: str | None = None,
) -> Embedding:
    """Embed a subset of modes (and the leftover modes) into the reference.

    Modes listed in ``frozen`` are pinned at a fixed occupation and belong to
    neither factor, so the image is a proper subspace of R whenever frozen is
    nonempty. Every reference mode must be claimed exactly once.
    """
    frozen = dict(frozen or {})
    sub = tuple(subsystem_labels)
    all_labels = reference.mode_labels
    for label in list(sub) + list(frozen):
        if label not in all_labels:
            raise ValueError(f"space {reference.space_id!r} has no mode {label!r}")
    if complementer_labels is None:
        comp = tuple(l for l in all_labels if l not in sub and l not in frozen)
    else:
        comp = tuple(complementer_labels)
    claimed = list(sub) + list(comp) + list(frozen)
    if sorted(claimed) != sorted(all_labels):
        raise ValueError(
            f"subsystem {sub}, complementer {comp} and frozen {tuple(frozen)} must"
            f" partition the modes {all_labels} of {reference.space_id!r}"
        )
    for label, occ in frozen.items():
        mode = reference.modes[reference.mode_index(label)]
        if not 0 <= occ <= mode.max_occupation:
            raise ValueError(f"frozen occupation {occ} out of range for mode {label!r}")

    def _sub_space(labels: tuple[str, ...], default_id: str) -> FockSpace:
        if not labels:
            return FockSpace.trivial(default_id)
        specs = [reference.modes[reference.mode_index(l)] for l in labels]
        return FockSpace(default_id, tuple(specs))

    space_a = _sub_space(sub, subsystem_id or f"{reference.space_id}[{','.join(sub)}]")
    space_b = _sub_space(comp, complementer_id or f"{reference.space_id}[{','.join(comp)}]")

    matrix = np.zeros((reference.dimension, space_a.dimension * space_b.dimension),
                      dtype=np.complex128)
    occ_template = [frozen.get(l, 0) for l in all_labels]
    positions_a = [reference.mode_index(l) for l in sub]
    positions_b = [reference.mode_index(l) for l in comp]
    for a_idx in range(space_a.dimension):
        occ_a = space_a.occupation_of(a_idx) if sub else ()
        for b_idx in range(space_b.dimension):
            occ_b = space_b.occupation_of(b_idx) if comp else ()
            occ = list(occ_template)
            for pos, n in zip(positions_a, occ_a):
                occ[pos] = n
            for pos, n in zip(positions_b, occ_b):
                occ[pos] = n
            matrix[reference.index_of(occ), a_idx * space_b.dimension + b_idx] = 1.0
    return Embedding(space_a, space_b, reference, matrix,
                     ModePartition(sub, comp, tuple(sorted(frozen.items()))))


def embedding_from_isometry(
    space_a: FockSpace,
    space_b: FockSpace,
    reference: FockSpace,
    matrix: np.ndarray,
    validate: bool = True,
    tol: Tolerances | None = None,
) -> Embedding:
    """Wrap an explicit isometry as an Embedding, validating it by default."""
    e = Embedding(space_a, space_b, reference, matrix)
    if validate:
        report = validate_embedding(e, tol)
        if not report.passed:
            raise EmbeddingValidationError(
                f"matrix is not an isometry: max|V^dagger V - 1| = {report.max_deviation:g}",
                report=report,
            )
    return e


def random_isometry_embedding(space_a: FockSpace, space_b: FockSpace,
                              reference: FockSpace, seed: int) -> Embedding:
    """A random embedding: orthonormalized Gaussian columns (QR)."""
    dim_img = space_a.dimension * space_b.dimension
    if reference.dimension < dim_img:
        raise SpaceMismatchError(
            f"dim(R) = {reference.dimension} too small for image dimension {dim_img}"
        )
    rng = np.random.Generator(np.random.PCG64(seed))
    mat = rng.standard_normal((reference.dimension, dim_img)) \
        + 1j * rng.standard_normal((reference.dimension, dim_img))
    q, _ = np.linalg.qr(mat)
    return Embedding(space_a, space_b, reference, q)
