"""Scenario files: the declarative input format of the command line front end.

A scenario is a JSON document with schema tag "relfock.scenario/1":

    {
      "schema": "relfock.scenario/1",
      "spaces": [
        {"id": "R",
         "modes": [{"label": "e-", "statistics": "fermion", "max_occupation": 1,
                    "charges": {"electric": -1, "lepton": 1}}, ...]}
      ],
      "states": [
        {"name": "psi", "space": "R", "kind": "basis", "occupations": [1, 0]},
        {"name": "phi", "space": "R", "kind": "bell"},              // also: "ghz"
        {"name": "rnd", "space": "R", "kind": "random", "seed": 7},
        {"name": "amp", "space": "R", "kind": "amplitudes",
         "amplitudes": [[re, im], ...]}                             // unit norm
      ],
      "embeddings": [
        {"name": "AB", "kind": "mode_partition", "reference": "R",
         "subsystem_modes": ["e-"], "frozen": {"photon": 0}},       // frozen optional
        {"name": "V", "kind": "isometry", "reference": "R",
         "subsystem": "A", "complementer": "B", "matrix": [[[re, im], ...], ...]}
      ],
      "hamiltonians": [
        {"name": "H", "space": "R",
         "terms": [{"coefficient": 0.5,
                    "factors": [["create", "photon"], ["annihilate", "e-"],
                                ["annihilate", "e+"]]}]}
      ],
      "tasks": [ {"command": "reduce", "name": "rho", ...params...}, ... ]
    }

Complex numbers are [re, im] pairs (bare reals are accepted on input). All
name references are resolved at load time; dangling references, non-isometric
explicit embeddings, non-Hermitian Hamiltonians and non-normalized states are
load errors. Task commands and their parameters are documented in runner.py.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .dynamics import HamiltonianSpec, build_hamiltonian
from .errors import EmbeddingValidationError, ScenarioError
from .hilbert import (
    Embedding,
    FockSpace,
    ModeSpec,
    StateVector,
    basis_state,
    bell_state,
    build_fock_space,
    embedding_from_isometry,
    ghz_state,
    mode_partition_embedding,
    random_state_vector,
    state_from_amplitudes,
)
from .tolerances import Tolerances, resolve

SCENARIO_SCHEMA = "relfock.scenario/1"


@dataclass(frozen=True)
class Task:
    name: str
    command: str
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    """A fully validated scenario: named objects plus an ordered task list."""

    spaces: Mapping[str, FockSpace]
    states: Mapping[str, StateVector]
    embeddings: Mapping[str, Embedding]
    hamiltonians: Mapping[str, HamiltonianSpec]
    tasks: tuple[Task, ...]
    digest: str


def parse_complex(value: Any, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 \
            and all(isinstance(x, (int, float)) for x in value):
        return complex(value[0], value[1])
    raise ScenarioError(f"{where}: expected a number or [re, im] pair, got {value!r}")


def _complex_vector(values: Any, where: str) -> np.ndarray:
    if not isinstance(values, list):
        raise ScenarioError(f"{where}: expected a list of complex numbers")
    return np.array([parse_complex(v, f"{where}[{i}]") for i, v in enumerate(values)])


def _complex_matrix(values: Any, where: str) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise ScenarioError(f"{where}: expected a nonempty list of rows")
    return np.stack([_complex_vector(row, f"{where}[{i}]") for i, row in enumerate(values)])


def _require(mapping: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in mapping:
        raise ScenarioError(f"{where}: missing required field {key!r}")
    return mapping[key]


def _named_entries(doc: Mapping[str, Any], section: str, name_key: str = "name") -> list:
    entries = doc.get(section, [])
    if not isinstance(entries, list):
        raise ScenarioError(f"{section}: expected a list")
    seen = set()
    for i, entry in enumerate(entries):
        if not isinstance(entry, Mapping):
            raise ScenarioError(f"{section}[{i}]: expected an object")
        name = _require(entry, name_key, f"{section}[{i}]")
        if name in seen:
            raise ScenarioError(f"{section}: duplicate name {name!r}")
        seen.add(name)
    return entries


def _build_space(entry: Mapping[str, Any], where: str) -> FockSpace:
    modes = []
    raw_modes = _require(entry, "modes", where)
    if not isinstance(raw_modes, list) or not raw_modes:
        raise ScenarioError(f"{where}: modes must be a nonempty list")
    for i, m in enumerate(raw_modes):
        mwhere = f"{where}.modes[{i}]"
        try:
            modes.append(ModeSpec(
                label=_require(m, "label", mwhere),
                statistics=m.get("statistics", "boson"),
                max_occupation=m.get("max_occupation", 1),
                charges=tuple(sorted((m.get("charges") or {}).items())),
            ))
        except ValueError as exc:
            raise ScenarioError(f"{mwhere}: {exc}") from exc
    try:
        return build_fock_space(modes, space_id=entry["id"])
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _build_state(entry: Mapping[str, Any], spaces: Mapping[str, FockSpace],
                 tol: Tolerances, where: str) -> StateVector:
    space_name = _require(entry, "space", where)
    if space_name not in spaces:
        raise ScenarioError(f"{where}: unknown space {space_name!r}")
    space = spaces[space_name]
    kind = entry.get("kind", "amplitudes")
    try:
        if kind == "basis":
            if "occupations" in entry:
                return basis_state(space, [int(n) for n in entry["occupations"]])
            return basis_state(space, int(_require(entry, "index", where)))
        if kind == "bell":
            pair = entry.get("pair")
            if pair is not None:
                pair = (tuple(int(n) for n in pair[0]), tuple(int(n) for n in pair[1]))
            return bell_state(space, pair)
        if kind == "ghz":
            return ghz_state(space)
        if kind == "random":
            return random_state_vector(space, int(_require(entry, "seed", where)))
        if kind == "amplitudes":
            amps = _complex_vector(_require(entry, "amplitudes", where), f"{where}.amplitudes")
            state = state_from_amplitudes(space, amps)
            if not state.is_normalized(tol):
                raise ScenarioError(
                    f"{where}: state is not normalized (|psi|^2 = {state.norm_sq!r})"
                )
            return state
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc
    raise ScenarioError(f"{where}: unknown state kind {kind!r}")


def _build_embedding(entry: Mapping[str, Any], spaces: Mapping[str, FockSpace],
                     tol: Tolerances, where: str) -> Embedding:
    ref_name = _require(entry, "reference", where)
    if ref_name not in spaces:
        raise ScenarioError(f"{where}: unknown space {ref_name!r}")
    reference = spaces[ref_name]
    kind = entry.get("kind", "mode_partition")
    try:
        if kind == "mode_partition":
            frozen = entry.get("frozen") or {}
            return mode_partition_embedding(
                reference,
                subsystem_labels=_require(entry, "subsystem_modes", where),
                complementer_labels=entry.get("complementer_modes"),
                frozen={str(k): int(v) for k, v in frozen.items()},
                subsystem_id=entry.get("subsystem_id"),
                complementer_id=entry.get("complementer_id"),
            )
        if kind == "isometry":
            for key in ("subsystem", "complementer"):
                if _require(entry, key, where) not in spaces:
                    raise ScenarioError(f"{where}: unknown space {entry[key]!r}")
            matrix = _complex_matrix(_require(entry, "matrix", where), f"{where}.matrix")
            return embedding_from_isometry(
                spaces[entry["subsystem"]], spaces[entry["complementer"]],
                reference, matrix, tol=tol,
            )
    except ScenarioError:
        raise
    except (ValueError, EmbeddingValidationError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc
    raise ScenarioError(f"{where}: unknown embedding kind {kind!r}")


def _build_hamiltonian(entry: Mapping[str, Any], spaces: Mapping[str, FockSpace],
                       tol: Tolerances, where: str) -> HamiltonianSpec:
    space_name = _require(entry, "space", where)
    if space_name not in spaces:
        raise ScenarioError(f"{where}: unknown space {space_name!r}")
    terms = []
    for i, term in enumerate(entry.get("terms", [])):
        twhere = f"{where}.terms[{i}]"
        coeff = _require(term, "coefficient", twhere)
        if not isinstance(coeff, (int, float)):
            raise ScenarioError(f"{twhere}: coefficient must be a real number")
        factors = term.get("factors", [])
        terms.append((float(coeff), tuple((str(k), str(l)) for k, l in factors)))
    try:
        return build_hamiltonian(spaces[space_name], terms, tol)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def load_scenario(path: str | Path, tol: Tolerances | None = None) -> Scenario:
    """Parse and fully validate a scenario file."""
    tol = resolve(tol)
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, Mapping):
        raise ScenarioError(f"{path}: top level must be an object")
    schema = doc.get("schema")
    if schema != SCENARIO_SCHEMA:
        raise ScenarioError(
            f"{path}: unsupported schema {schema!r}; expected {SCENARIO_SCHEMA!r}"
        )

    spaces: dict[str, FockSpace] = {}
    for i, entry in enumerate(_named_entries(doc, "spaces", name_key="id")):
        spaces[entry["id"]] = _build_space(entry, f"spaces[{i}] ({entry['id']!r})")

    states: dict[str, StateVector] = {}
    for i, entry in enumerate(_named_entries(doc, "states")):
        states[entry["name"]] = _build_state(
            entry, spaces, tol, f"states[{i}] ({entry['name']!r})")

    embeddings: dict[str, Embedding] = {}
    for i, entry in enumerate(_named_entries(doc, "embeddings")):
        embeddings[entry["name"]] = _build_embedding(
            entry, spaces, tol, f"embeddings[{i}] ({entry['name']!r})")

    hamiltonians: dict[str, HamiltonianSpec] = {}
    for i, entry in enumerate(_named_entries(doc, "hamiltonians")):
        hamiltonians[entry["name"]] = _build_hamiltonian(
            entry, spaces, tol, f"hamiltonians[{i}] ({entry['name']!r})")

    tasks: list[Task] = []
    raw_tasks = doc.get("tasks", [])
    if not isinstance(raw_tasks, list):
        raise ScenarioError("tasks: expected a list")
    names = set()
    for i, entry in enumerate(raw_tasks):
        where = f"tasks[{i}]"
        if not isinstance(entry, Mapping):
            raise ScenarioError(f"{where}: expected an object")
        command = _require(entry, "command", where)
        name = entry.get("name", f"{command}-{i}")
        if name in names:
            raise ScenarioError(f"{where}: duplicate task name {name!r}")
        names.add(name)
        params = {k: v for k, v in entry.items() if k not in ("command", "name")}
        tasks.append(Task(name=name, command=command, params=params))

    _check_task_references(tasks, states, embeddings, hamiltonians)

    digest = "sha256:" + hashlib.sha256(raw).hexdigest()
    return Scenario(spaces=spaces, states=states, embeddings=embeddings,
                    hamiltonians=hamiltonians, tasks=tuple(tasks), digest=digest)


_TASK_REFS = {
    "state": "states",
    "embedding": "embeddings",
    "hamiltonian": "hamiltonians",
}


def _check_task_references(tasks: Sequence[Task], states, embeddings, hamiltonians) -> None:
    pools = {"states": states, "embeddings": embeddings, "hamiltonians": hamiltonians}
    for task in tasks:
        for key, pool_name in _TASK_REFS.items():
            value = task.params.get(key)
            if value is not None and value not in pools[pool_name]:
                raise ScenarioError(
                    f"task {task.name!r}: unknown {key} reference {value!r}"
                )
        for value in task.params.get("embeddings", []):
            if value not in embeddings:
                raise ScenarioError(
                    f"task {task.name!r}: unknown embedding reference {value!r}"
                )
