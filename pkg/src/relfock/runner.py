"""Task execution for scenario files.

Commands and their parameters (all object references are names declared in
the scenario):

  reduce            state, embedding, factor ("A"|"B", default "A")
  spectrum          state, embedding, factor
  schmidt           state, embedding
  joint             state, embeddings (list of mode-partition embeddings)
  evolve            state, hamiltonian, t
  trace-trajectory  state, hamiltonian, embedding,
                    times (list, or {"start","stop","num"}), charge_kinds?
  check-ssr         state, embedding, kind
  sample            state, embedding, factor, count (default 100), seed
                    (falls back to the run-level seed)

Tasks run in order; a failing task is recorded in the report and execution
continues. Library invariant violations become structured task errors, never
a crash of the run.
"""
from __future__ import annotations

from typing import Any, Callable, Mapping

import numpy as np

from . import __version__
from .composition import compose_embeddings, joint_distribution, regroup_embedding, \
    schmidt_decompose
from .dynamics import evolve, trace_deficit_trajectory
from .relational import possible_internal_states, relational_state, sample_internal_states
from .report import Report, TaskResult, complex_matrix, complex_vector
from .scenario import Scenario
from .superselection import check_superselection
from .tolerances import Tolerances, resolve


def _times_from(params: Mapping[str, Any]) -> np.ndarray:
    times = params.get("times")
    if isinstance(times, Mapping):
        return np.linspace(float(times["start"]), float(times["stop"]), int(times["num"]))
    if isinstance(times, list):
        return np.asarray([float(t) for t in times])
    raise ValueError("times must be a list of numbers or {start, stop, num}")


def _spectrum_payload(dec) -> dict:
    return {
        "space": dec.space_id,
        "eigenvalues": list(dec.eigenvalues),
        "annihilation_probability": dec.annihilation_probability,
        "degeneracy_groups": [list(g) for g in dec.degeneracy_groups],
        "dropped": dec.dropped_count,
        "eigenvectors": [complex_vector(v.amplitudes) for v in dec.eigenvectors],
    }


def _run_reduce(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    rho = relational_state(scenario.states[params["state"]],
                           scenario.embeddings[params["embedding"]],
                           params.get("factor", "A"), tol)
    return {
        "space": rho.space_id,
        "matrix": complex_matrix(rho.matrix),
        "trace": rho.trace,
        "trace_deficit": rho.trace_deficit,
    }


def _run_spectrum(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    rho = relational_state(scenario.states[params["state"]],
                           scenario.embeddings[params["embedding"]],
                           params.get("factor", "A"), tol)
    return _spectrum_payload(possible_internal_states(rho, tol))


def _run_schmidt(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    dec = schmidt_decompose(scenario.states[params["state"]],
                            scenario.embeddings[params["embedding"]], tol)
    return {
        "coefficients": list(dec.coefficients),
        "residual_norm_sq": dec.residual_norm_sq,
        "degeneracy_groups": [list(g) for g in dec.degeneracy_groups],
        "a_vectors": [complex_vector(v.amplitudes) for v in dec.a_vectors],
        "b_vectors": [complex_vector(v.amplitudes) for v in dec.b_vectors],
        "residual": complex_vector(dec.residual.amplitudes),
    }


def _run_joint(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    names = params["embeddings"]
    if not isinstance(names, list) or not names:
        raise ValueError("joint needs a nonempty list of embedding names")
    parts = [scenario.embeddings[n] for n in names]
    psi = scenario.states[params["state"]]
    composed = compose_embeddings(parts, tol=tol)
    factors = [p.subsystem for p in parts]
    spectra = []
    for i in range(len(parts)):
        e_i = regroup_embedding(composed, factors, [i])
        spectra.append(possible_internal_states(relational_state(psi, e_i, "A", tol), tol))
    dist = joint_distribution(psi, composed, spectra, tol)
    return {
        "subsystems": list(dist.subsystem_ids),
        "index_ranges": list(dist.index_ranges),
        "probabilities": dist.clamped_probabilities().tolist(),
        "total": dist.total,
        "max_imag": dist.max_imag,
        "spectra": [_spectrum_payload(s) for s in spectra],
    }


def _run_evolve(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    h = scenario.hamiltonians[params["hamiltonian"]]
    t = float(params["t"])
    psi_t = evolve(scenario.states[params["state"]], h, t, tol)
    energy = float(np.vdot(psi_t.amplitudes, h.matrix @ psi_t.amplitudes).real)
    return {
        "t": t,
        "space": psi_t.space_id,
        "amplitudes": complex_vector(psi_t.amplitudes),
        "norm_sq": psi_t.norm_sq,
        "energy": energy,
    }


def _run_trace_trajectory(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    traj = trace_deficit_trajectory(
        scenario.states[params["state"]],
        scenario.hamiltonians[params["hamiltonian"]],
        scenario.embeddings[params["embedding"]],
        _times_from(params),
        charge_kinds=tuple(params.get("charge_kinds", ())),
        tol=tol,
    )
    traces = traj.relational_traces["subsystem"]
    return {
        "times": traj.times.tolist(),
        "traces": traces.tolist(),
        "deficits": (1.0 - traces).tolist(),
        "norms": traj.norms.tolist(),
        "energies": traj.energies.tolist(),
        "charge_expectations": {k: v.tolist() for k, v in traj.charge_expectations.items()},
    }


def _run_check_ssr(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    report = check_superselection(scenario.states[params["state"]],
                                  scenario.embeddings[params["embedding"]],
                                  params["kind"], tol)
    return {
        "charge_kind": report.charge_kind,
        "reference_charge": report.reference_charge,
        "applicable": report.applicable,
        "off_block_max": report.off_block_max,
        "passed": report.passed,
        "tolerance": report.tolerance,
    }


def _run_sample(scenario: Scenario, params, tol: Tolerances, seed) -> dict:
    task_seed = params.get("seed", seed)
    if task_seed is None:
        raise ValueError("sample needs a seed (task parameter or --seed)")
    count = int(params.get("count", 100))
    rho = relational_state(scenario.states[params["state"]],
                           scenario.embeddings[params["embedding"]],
                           params.get("factor", "A"), tol)
    dec = possible_internal_states(rho, tol)
    outcomes = sample_internal_states(dec, count, int(task_seed))
    annihilated_index = dec.outcome_count
    counts = {str(j): int(np.sum(outcomes == j)) for j in range(dec.outcome_count)}
    counts["annihilated"] = int(np.sum(outcomes == annihilated_index))
    return {
        "seed": int(task_seed),
        "count": count,
        "generator": "PCG64",
        "eigenvalues": list(dec.eigenvalues),
        "annihilation_probability": dec.annihilation_probability,
        "annihilated_index": annihilated_index,
        "outcomes": outcomes.tolist(),
        "counts": counts,
    }


_HANDLERS: dict[str, Callable] = {
    "reduce": _run_reduce,
    "spectrum": _run_spectrum,
    "schmidt": _run_schmidt,
    "joint": _run_joint,
    "evolve": _run_evolve,
    "trace-trajectory": _run_trace_trajectory,
    "check-ssr": _run_check_ssr,
    "sample": _run_sample,
}

COMMANDS = tuple(sorted(_HANDLERS))


def run_scenario(scenario: Scenario, tol: Tolerances | None = None,
                 seed: int | None = None) -> Report:
    """Execute every task in order and collect a report."""
    tol = resolve(tol)
    report = Report(library_version=__version__, scenario_digest=scenario.digest,
                    tolerances=tol)
    for task in scenario.tasks:
        handler = _HANDLERS.get(task.command)
        if handler is None:
            report.tasks.append(TaskResult(
                name=task.name, command=task.command, status="error",
                error={"type": "UnknownCommand",
                       "message": f"unknown command {task.command!r};"
                                  f" expected one of {', '.join(COMMANDS)}"},
            ))
            continue
        try:
            result = handler(scenario, task.params, tol, seed)
        except Exception as exc:  # noqa: BLE001 - task errors must not kill the run
            report.tasks.append(TaskResult(
                name=task.name, command=task.command, status="error",
                error={"type": type(exc).__name__, "message": str(exc)},
            ))
            continue
        report.tasks.append(TaskResult(
            name=task.name, command=task.command, status="ok", result=result))
    return report
