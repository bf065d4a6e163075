"""Scenario execution, invariant checking, CSV output, and verification suites."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .darkstates import (
    atomic_dark_basis,
    black_state,
    dark_dimension,
    singlet_product_basis,
    two_level_register,
)
from .dynamics import (
    LindbladChannel,
    TimeGrid,
    Trajectory,
    evolve_lindblad,
    evolve_lindblad_action,
    evolve_lindblad_exact,
    evolve_unitary,
    pure_density,
    stationarity_residual,
)
from .errors import ModelError, ScenarioError
from .observables import rabi_reference
from .operators import CavityGraph, SparseOperator, collective_lowering, number_op, photon_op
from .scenarios import Scenario, bottleneck_sweep, scenario_bottleneck
from .statespace import AtomSpec, BasisState, ModeSpec, build_space

__all__ = [
    "CheckResult",
    "RunReport",
    "run_scenario",
    "run_sweep",
    "write_csv",
    "verify",
]

TRACE_TOL = 1e-6
POSITIVITY_TOL = 1e-6
HERMITICITY_DRIFT_TOL = 1e-6
DARK_RESIDUAL_TOL = 1e-8


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    comparison: str = "<="

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"  [{status}] {self.name}: {self.value:.3e} {self.comparison} {self.threshold:.3e}"


@dataclass
class RunReport:
    scenario_id: str
    params: dict
    wall_time: float
    final_observables: dict
    checks: list = field(default_factory=list)
    integrator: str = ""
    samples: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def text(self) -> str:
        lines = [f"scenario: {self.scenario_id}"]
        lines.append(f"integrator: {self.integrator}, samples: {self.samples}, wall time: {self.wall_time:.2f}s")
        if self.params:
            lines.append("parameters: " + ", ".join(f"{k}={v}" for k, v in self.params.items()))
        lines.append("final observables:")
        for name, value in self.final_observables.items():
            lines.append(f"  {name} = {value:.6g}")
        lines.append("invariant checks:")
        for c in self.checks:
            lines.append(c.line())
        lines.append("result: " + ("ok" if self.passed else "INVARIANT FAILURE"))
        return "\n".join(lines)


_EVOLVERS = {
    "rk4": evolve_lindblad,
    "exact": evolve_lindblad_exact,
    "expm": evolve_lindblad_action,
}


def run_scenario(
    scenario: Scenario,
    t_final: float | None = None,
    samples: int | None = None,
    dt: float | None = None,
    integrator: str | None = None,
    initial_state: np.ndarray | None = None,
) -> tuple[Trajectory, RunReport]:
    """Execute a scenario and evaluate its invariant checks."""
    cfg = scenario.config
    grid = TimeGrid(
        t_final=t_final if t_final is not None else cfg.t_final,
        samples=samples if samples is not None else cfg.samples,
    )
    method = integrator or cfg.integrator
    start = time.perf_counter()
    if scenario.custom_run is not None:
        trajectory = scenario.custom_run(grid, dt=dt, integrator=method)
    else:
        h = scenario.integration_hamiltonian or scenario.hamiltonian
        psi0 = initial_state if initial_state is not None else scenario.initial_state
        rho0 = pure_density(psi0) if psi0.ndim == 1 else np.asarray(psi0, dtype=complex)
        if method not in _EVOLVERS:
            raise ScenarioError(f"unknown integrator {method!r}; choose from {sorted(_EVOLVERS)}")
        kwargs = {"observables": scenario.observables}
        if method == "rk4":
            kwargs["dt"] = dt if dt is not None else cfg.dt
        trajectory = _EVOLVERS[method](h, scenario.channels, rho0, grid, **kwargs)
    wall = time.perf_counter() - start

    checks = [
        CheckResult("trace preservation", trajectory.diagnostics.get("trace_drift", 0.0) <= TRACE_TOL,
                    trajectory.diagnostics.get("trace_drift", 0.0), TRACE_TOL),
        CheckResult("hermiticity drift", trajectory.diagnostics.get("hermiticity_drift", 0.0) <= HERMITICITY_DRIFT_TOL,
                    trajectory.diagnostics.get("hermiticity_drift", 0.0), HERMITICITY_DRIFT_TOL),
    ]
    min_eig = trajectory.diagnostics.get("min_eigenvalue")
    if min_eig is not None:
        checks.append(CheckResult("positivity", min_eig >= -POSITIVITY_TOL, min_eig, -POSITIVITY_TOL, ">="))
    for k, dark in enumerate(scenario.metadata.get("dark_states", [])):
        res = stationarity_residual(scenario.hamiltonian, scenario.channels, pure_density(dark))
        checks.append(CheckResult(f"dark state {k + 1} stationarity", res <= DARK_RESIDUAL_TOL, res, DARK_RESIDUAL_TOL))

    report = RunReport(
        scenario_id=cfg.scenario_id,
        params=cfg.params,
        wall_time=wall,
        final_observables={k: float(v[-1]) for k, v in trajectory.observables.items()},
        checks=checks,
        integrator=trajectory.diagnostics.get("integrator", method),
        samples=grid.samples,
    )
    return trajectory, report


def run_sweep(overrides: dict | None = None) -> tuple[Trajectory, RunReport]:
    """Transformation-probability sweep over gamma_out/gamma_ex."""
    p = bottleneck_sweep(overrides)
    ratios = np.linspace(0.0, p["ratio_max"], int(p["points"]))
    probs = np.zeros(len(ratios))
    start = time.perf_counter()
    worst_trace = 0.0
    for i, r in enumerate(ratios):
        scen = scenario_bottleneck(
            {"gamma_out": r * p["gamma_ex"], "gamma_ex": p["gamma_ex"], "omega": p["omega"], "g": p["g"]}
        )
        traj = evolve_lindblad_exact(
            scen.hamiltonian, scen.channels, pure_density(scen.initial_state),
            TimeGrid(p["t_final"], 40), observables={"sink": scen.observables["sink"]},
        )
        probs[i] = traj.observables["sink"][-1]
        worst_trace = max(worst_trace, traj.diagnostics["trace_drift"])
    wall = time.perf_counter() - start
    trajectory = Trajectory(
        times=ratios,
        observables={"p_transform": probs},
        diagnostics={"trace_drift": worst_trace, "integrator": "expm-dense", "axis": "ratio"},
    )
    checks = [CheckResult("trace preservation", worst_trace <= TRACE_TOL, worst_trace, TRACE_TOL)]
    report = RunReport(
        scenario_id="bottleneck-sweep",
        params=p,
        wall_time=wall,
        final_observables={"p_transform_last": float(probs[-1]), "p_transform_min": float(probs.min())},
        checks=checks,
        integrator="expm-dense",
        samples=len(ratios),
    )
    return trajectory, report


def write_csv(trajectory: Trajectory, path: str) -> None:
    """First column is the grid axis (time, or sweep ratio), one column per
    recorded observable, full double precision."""
    axis = trajectory.diagnostics.get("axis", "t")
    names = list(trajectory.observables)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis] + names)
        for i, t in enumerate(trajectory.times):
            writer.writerow([f"{t:.17g}"] + [f"{trajectory.observables[n][i]:.17g}" for n in names])


# ------------------------------------------------------------- verification


def verify(suite: str = "all") -> RunReport:
    """Run the property suites: 'darkstates', 'dynamics', or 'all'."""
    start = time.perf_counter()
    checks = []
    if suite not in ("darkstates", "dynamics", "all"):
        raise ScenarioError("suite must be 'darkstates', 'dynamics' or 'all'")
    if suite in ("darkstates", "all"):
        checks += _verify_darkstates()
    if suite in ("dynamics", "all"):
        checks += _verify_dynamics()
    return RunReport(
        scenario_id=f"verify-{suite}",
        params={},
        wall_time=time.perf_counter() - start,
        final_observables={},
        checks=checks,
        integrator="-",
        samples=0,
    )


def _verify_darkstates() -> list:
    checks = []
    for n in (2, 4, 6):
        dim = atomic_dark_basis(n).dimension
        expected = dark_dimension(n)
        checks.append(CheckResult(f"kernel dimension n={n}", dim == expected, dim, expected, "=="))

    basis = atomic_dark_basis(4)
    span = np.column_stack(basis.vectors)
    proj = span @ span.conj().T
    residual = max(
        float(np.linalg.norm(v - proj @ v)) for v in singlet_product_basis(4)
    )
    checks.append(CheckResult("singlet products span the n=4 kernel", residual <= 1e-10, residual, 1e-10))

    two = black_state(CavityGraph(cavities=(1, 2), atom_bridges=((1, 2, 1.0),)))
    order = (1, 2, 4, 3, 5, 6)
    edges = tuple((order[i], order[(i + 1) % 6], 1.0) for i in range(6))
    six = black_state(CavityGraph(cavities=(1, 2, 3, 4, 5, 6), atom_bridges=edges))
    for label, bs in (("two-cavity", two), ("six-cycle", six)):
        res = max(bs.hop_residual, bs.emission_residual)
        checks.append(CheckResult(f"black state residual ({label})", res <= 1e-10, res, 1e-10))
    try:
        black_state(CavityGraph(cavities=(1, 2, 3), atom_bridges=((1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0))))
        refused = False
    except ModelError:
        refused = True
    checks.append(CheckResult("odd graph refused", refused, float(refused), 1.0, "=="))
    return checks


def _verify_dynamics() -> list:
    checks = []
    # damped cavity against the closed-form photon decay
    space = build_space(modes=[ModeSpec("c", 1.0, 3)])
    h = SparseOperator(number_op(space, "c").mat)
    chans = [LindbladChannel(photon_op(space, "c", "annihilate"), 1.0, "leak")]
    rho0 = pure_density(space.vector(BasisState(photons=(1,))))
    traj = evolve_lindblad(h, chans, rho0, TimeGrid(5.0, 100), observables={"n": number_op(space, "c")})
    err = float(np.max(np.abs(traj.observables["n"] - np.exp(-traj.times))))
    checks.append(CheckResult("damped cavity vs exp(-t)", err <= 1e-5, err, 1e-5))
    checks.append(CheckResult("damped cavity trace drift", traj.diagnostics["trace_drift"] <= TRACE_TOL,
                              traj.diagnostics["trace_drift"], TRACE_TOL))

    # one-excitation exchange against the closed form
    omega, g = 1.3, 0.25
    jc = build_space(modes=[ModeSpec("m", omega, 1)], atoms=[AtomSpec("at", coupling=g)])
    from .operators import build_tc

    hjc = build_tc(jc, "m", rwa=True)
    psi0 = jc.vector(BasisState(photons=(0,), atoms=((1, 0),)))
    traju = evolve_unitary(hjc, psi0, TimeGrid(3 * 2 * np.pi / g, 100))
    i_dark = jc.index_of(BasisState(photons=(0,), atoms=((1, 0),)))
    i_bright = jc.index_of(BasisState(photons=(1,), atoms=((0, 0),)))
    err = 0.0
    for t, psi in zip(traju.times, traju.snapshots):
        ad, ab = rabi_reference(omega, g, t)
        err = max(err, abs(psi[i_dark] - ad), abs(psi[i_bright] - ab))
    checks.append(CheckResult("Rabi closed form", err <= 1e-8, err, 1e-8))

    # zero-rate master equation reduces to the unitary flow
    trajl = evolve_lindblad(hjc, [], pure_density(psi0), TimeGrid(5.0, 50), keep_snapshots=True)
    traju2 = evolve_unitary(hjc, psi0, TimeGrid(5.0, 50))
    diff = max(
        float(np.max(np.abs(r - pure_density(p))))
        for r, p in zip(trajl.snapshots, traju2.snapshots)
    )
    checks.append(CheckResult("unitary reduction", diff <= 1e-8, diff, 1e-8))
    return checks
