"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with the measured value and its pinned tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see every line.
"""

import time

import numpy as np
import pytest

from cavitychem.darkstates import (
    atomic_dark_basis,
    black_state,
    dark_dimension,
    singlet_product_basis,
)
from cavitychem.dynamics import (
    LindbladChannel,
    TimeGrid,
    evolve_lindblad,
    evolve_lindblad_action,
    evolve_lindblad_exact,
    evolve_unitary,
    pure_density,
    stationarity_residual,
)
from cavitychem.errors import ModelError
from cavitychem.observables import rabi_reference
from cavitychem.operators import CavityGraph, SparseOperator, build_tc, number_op, photon_op
from cavitychem.runner import run_sweep
from cavitychem.scenarios import (
    scenario_assoc_dissoc,
    scenario_electron_explicit,
    scenario_hybrid,
    scenario_lambda,
    scenario_optical_interpretation,
)
from cavitychem.statespace import AtomSpec, BasisState, ModeSpec, build_space


def report(num, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"{status} criterion {num}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_dark_dimensions():
    start = time.perf_counter()
    dims = {n: atomic_dark_basis(n).dimension for n in (2, 4, 6)}
    elapsed = time.perf_counter() - start
    expected = {n: dark_dimension(n) for n in (2, 4, 6)}
    ok = dims == expected == {2: 1, 4: 2, 6: 5} and elapsed < 10.0
    report(1, ok, f"kernel dims {dims} == {expected}, runtime {elapsed:.2f}s < 10s")


def test_criterion_02_singlet_span():
    basis = atomic_dark_basis(4)
    products = singlet_product_basis(4)
    span = np.linalg.qr(np.column_stack(products))[0]
    proj = span @ span.conj().T
    residual = max(float(np.linalg.norm(v - proj @ v)) for v in basis.vectors)
    ok = residual <= 1e-10 and len(basis.vectors) == 2
    report(2, ok, f"kernel-onto-products projection residual {residual:.2e} <= 1e-10")


def test_criterion_03_unequal_couplings():
    dim = atomic_dark_basis(2, couplings=[1.0, 1.1]).dimension
    report(3, dim == 0, f"kernel dimension {dim} == 0 for g = (1.0, 1.1)")


def test_criterion_04_black_states():
    two = black_state(CavityGraph(cavities=(1, 2), atom_bridges=((1, 2, 1.0),)))
    order = (1, 2, 4, 3, 5, 6)
    edges = tuple((order[i], order[(i + 1) % 6], 1.0) for i in range(6))
    six = black_state(CavityGraph(cavities=(1, 2, 3, 4, 5, 6), atom_bridges=edges))
    worst = max(two.hop_residual, two.emission_residual, six.hop_residual, six.emission_residual)
    try:
        black_state(CavityGraph(cavities=(1, 2, 3), atom_bridges=((1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0))))
        refused = False
    except ModelError:
        refused = True
    signs = [six.signs[c] for c in (1, 2, 3, 4, 5, 6)]
    ok = worst <= 1e-10 and refused and signs == [1, -1, -1, 1, 1, -1]
    report(4, ok, f"residuals {worst:.2e} <= 1e-10, six-cycle signs {signs}, triangle refused: {refused}")


def test_criterion_05_rabi_agreement():
    omega, g = 1.3, 0.25
    space = build_space(modes=[ModeSpec("m", omega, 1)], atoms=[AtomSpec("at", coupling=g)])
    h = build_tc(space, "m", rwa=True)
    psi0 = space.vector(BasisState(photons=(0,), atoms=((1, 0),)))
    grid = TimeGrid(3 * 2 * np.pi / g, 100)
    traj = evolve_unitary(h, psi0, grid)
    i_dark = space.index_of(BasisState(photons=(0,), atoms=((1, 0),)))
    i_bright = space.index_of(BasisState(photons=(1,), atoms=((0, 0),)))
    err = 0.0
    for t, psi in zip(traj.times, traj.snapshots):
        ad, ab = rabi_reference(omega, g, t)
        err = max(err, abs(psi[i_dark] - ad), abs(psi[i_bright] - ab))
    report(5, err <= 1e-8, f"amplitude error {err:.2e} <= 1e-8 over 100 times, 3 periods")


def test_criterion_06_damped_cavity():
    space = build_space(modes=[ModeSpec("c", 1.0, 3)])
    h = SparseOperator(number_op(space, "c").mat)
    chans = [LindbladChannel(photon_op(space, "c", "annihilate"), 1.0, "leak")]
    rho0 = pure_density(space.vector(BasisState(photons=(1,))))
    traj = evolve_lindblad(h, chans, rho0, TimeGrid(5.0, 100), observables={"n": number_op(space, "c")})
    err = float(np.max(np.abs(traj.observables["n"] - np.exp(-traj.times))))
    drift = traj.diagnostics["trace_drift"]
    ok = err <= 1e-5 and drift <= 1e-6
    report(6, ok, f"<n> error {err:.2e} <= 1e-5, trace drift {drift:.2e} <= 1e-6")


def test_criterion_07_explicit_electron_dark_state():
    s = scenario_electron_explicit()
    dark = s.metadata["dark_states"][0]
    residual = stationarity_residual(s.hamiltonian, s.channels, pure_density(dark))
    traj = evolve_lindblad_action(
        s.integration_hamiltonian, s.channels, pure_density(dark),
        TimeGrid(s.config.t_final, 100), observables={"p": s.observables["pop_dark_state"]},
    )
    p_min = float(np.min(traj.observables["p"]))
    ok = residual <= 1e-10 and p_min >= 0.999
    report(7, ok, f"stationarity residual {residual:.2e} <= 1e-10, min population {p_min:.6f} >= 0.999")


def test_criterion_08_association_dissociation():
    assoc = scenario_assoc_dissoc("association")
    dissoc = scenario_assoc_dissoc("dissociation")
    same_h = (assoc.hamiltonian.mat != dissoc.hamiltonian.mat).nnz == 0
    grid = assoc.config.grid()
    a_final = evolve_lindblad_exact(
        assoc.hamiltonian, assoc.channels, pure_density(assoc.initial_state), grid,
        observables={"a": assoc.observables["a"]},
    ).observables["a"][-1]
    d_final = evolve_lindblad_exact(
        dissoc.hamiltonian, dissoc.channels, pure_density(dissoc.initial_state), grid,
        observables={"a": dissoc.observables["a"]},
    ).observables["a"][-1]
    ok = same_h and a_final >= 0.9 and d_final <= 0.1
    report(8, ok, f"association {a_final:.4f} >= 0.9, dissociation {d_final:.4f} <= 0.1, shared H: {same_h}")


def test_criterion_09_hybrid_experiments():
    finals = {}
    for exp in ("I", "II"):
        s = scenario_hybrid(exp)  # printed parameter set
        traj = s.custom_run(s.config.grid())
        finals[exp] = float(traj.observables["a"][-1])
    gap = finals["I"] - finals["II"]
    report(9, gap >= 0.2, f"a_I {finals['I']:.4f} - a_II {finals['II']:.4f} = {gap:.4f} >= 0.2")


def test_criterion_10_bottleneck_sweep():
    traj, rep = run_sweep({"points": 41, "ratio_max": 10.0})
    probs = traj.observables["p_transform"]
    decreasing = np.diff(probs) < -1e-9
    longest, run = 0, 0
    for d in decreasing:
        run = run + 1 if d else 0
        longest = max(longest, run)
    # a strictly decreasing interval of >= 3 points means >= 2 decreasing steps
    ok = len(probs) >= 40 and longest >= 2 and rep.passed
    report(10, ok, f"{len(probs)} points, longest decreasing run {longest + 1} points >= 3")


def test_criterion_11_lambda_sinks_and_dark_states():
    s = scenario_lambda()
    worst = max(
        stationarity_residual(s.hamiltonian, s.channels, pure_density(d))
        for d in s.metadata["dark_states"]
    )
    traj = evolve_lindblad_action(
        s.integration_hamiltonian, s.channels, pure_density(s.initial_state),
        s.config.grid(),
        observables={k: s.observables[k] for k in ("sink_Omega", "sink_omega")},
    )
    total = float(traj.observables["sink_Omega"][-1] + traj.observables["sink_omega"][-1])
    ok = total <= 0.95 and worst <= 1e-8
    report(11, ok, f"sink sum {total:.4f} <= 0.95, dark residuals {worst:.2e} <= 1e-8")


def test_criterion_12_integrator_order():
    from cavitychem.dynamics import stability_dt

    s = scenario_assoc_dissoc("association")
    grid = TimeGrid(2.0, 8)
    rho0 = pure_density(s.initial_state)
    obs = {"a": s.observables["a"]}
    ref = evolve_lindblad_exact(s.hamiltonian, s.channels, rho0, grid, observables=obs).observables["a"]
    dt0 = stability_dt(s.hamiltonian, s.channels)
    errs = []
    for dt in (dt0, dt0 / 2):
        t = evolve_lindblad(s.hamiltonian, s.channels, rho0, grid, dt=dt, observables=obs)
        errs.append(float(np.max(np.abs(t.observables["a"] - ref))))
    ratio = errs[0] / errs[1]
    report(12, ratio >= 12.0, f"halving the step cut the error by {ratio:.1f}x >= 12x")


def test_criterion_13_optical_interpretation():
    s = scenario_optical_interpretation()
    traj = evolve_lindblad_action(
        s.integration_hamiltonian, s.channels, pure_density(s.initial_state),
        s.config.grid(), observables=s.observables,
    )
    window = max(2, len(traj.times) // 10)
    worst_change = max(
        float(series[-window:].max() - series[-window:].min())
        for series in traj.observables.values()
    )
    dark_final = float(traj.observables["dark_weight"][-1])
    ok = worst_change <= 1e-3 and dark_final >= 0.9
    report(13, ok, f"last-10% drift {worst_change:.2e} <= 1e-3, dark weight {dark_final:.4f} >= 0.9")
