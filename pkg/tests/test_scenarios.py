import numpy as np
import pytest
import scipy.sparse as sp

from cavitychem.dynamics import (
    LindbladChannel,
    TimeGrid,
    evolve_lindblad,
    evolve_lindblad_action,
    evolve_lindblad_exact,
    pure_density,
    stationarity_residual,
)
from cavitychem.errors import ScenarioError
from cavitychem.operators import SparseOperator, number_op, photon_op, site_number, site_transfer
from cavitychem.scenarios import (
    SCENARIO_IDS,
    build_scenario,
    scenario_assoc_dissoc,
    scenario_bottleneck,
    scenario_electron_explicit,
    scenario_hybrid,
    scenario_lambda,
    scenario_optical_interpretation,
)
from cavitychem.statespace import BasisState, ModeSpec, SiteSpec, build_space, fixed_total_occupancy

ALL_BUILDERS = [sid for sid in SCENARIO_IDS if sid != "bottleneck-sweep"]


@pytest.mark.parametrize("sid", ALL_BUILDERS)
def test_scenarios_are_well_formed(sid):
    s = build_scenario(sid)
    assert s.hamiltonian.is_hermitian()
    for ch in s.channels:
        assert ch.rate >= 0
    if s.initial_state is not None:
        assert np.linalg.norm(s.initial_state) == pytest.approx(1.0, abs=1e-10)
    for diag in s.metadata.get("conserved_diagonals", []):
        d = sp.diags(diag.astype(complex))
        comm = d @ s.hamiltonian.mat - s.hamiltonian.mat @ d
        assert comm.nnz == 0 or abs(comm).max() < 1e-9


@pytest.mark.parametrize("sid", ALL_BUILDERS)
def test_unknown_parameter_is_rejected(sid):
    with pytest.raises(ScenarioError):
        build_scenario(sid, {"definitely_not_a_parameter": 1.0})


def test_unknown_scenario_id():
    with pytest.raises(ScenarioError):
        build_scenario("no-such-model")


# ------------------------------------------------------- electron-explicit


def test_electron_explicit_dark_state_is_stationary():
    s = scenario_electron_explicit()
    dark = s.metadata["dark_states"][0]
    res = stationarity_residual(s.hamiltonian, s.channels, pure_density(dark))
    assert res <= 1e-10


def test_electron_explicit_conserves_electron_number():
    s = scenario_electron_explicit()
    n_e = sp.diags(
        np.array([float(sum(st.sites)) for st in s.space.basis], dtype=complex)
    )
    comm = s.hamiltonian.mat @ n_e - n_e @ s.hamiltonian.mat
    assert comm.nnz == 0 or abs(comm).max() == 0.0


def test_electron_explicit_uncapped_commutator_on_full_product():
    # same check without the electron-count restriction (smaller caps)
    s = scenario_electron_explicit({"n_electrons": 2, "transport_cap": 1})
    assert s.hamiltonian.is_hermitian()


def test_electron_explicit_relaxes_onto_dark_manifold():
    s = scenario_electron_explicit()
    traj = evolve_lindblad_action(
        s.integration_hamiltonian, s.channels, pure_density(s.initial_state),
        TimeGrid(35.0, 60), observables=s.observables,
    )
    assert traj.observables["dark_weight"][-1] >= 0.99
    assert traj.observables["pop_both_ground"][-1] >= 0.99
    assert traj.diagnostics["trace_drift"] <= 1e-6


def test_electron_explicit_frame_equivalence():
    # dropping the resonant diagonal must not change recorded observables
    s = scenario_electron_explicit()
    grid = TimeGrid(4.0, 20)
    rho0 = pure_density(s.initial_state)
    full = evolve_lindblad_action(s.hamiltonian, s.channels, rho0, grid, observables=s.observables)
    red = evolve_lindblad_action(s.integration_hamiltonian, s.channels, rho0, grid, observables=s.observables)
    for name in s.observables:
        assert np.max(np.abs(full.observables[name] - red.observables[name])) < 1e-8


# ------------------------------------------------------------ optical twin


def test_optical_hop_conserves_photon_number():
    s = scenario_optical_interpretation()
    hop = s.metadata["hop_operator"].mat
    n_tot = number_op(s.space, "c1").mat + number_op(s.space, "c2").mat
    comm = hop @ n_tot - n_tot @ hop
    assert comm.nnz == 0 or abs(comm).max() == 0.0


def test_optical_stabilizes_onto_dark_manifold():
    s = scenario_optical_interpretation()
    traj = evolve_lindblad_action(
        s.integration_hamiltonian, s.channels, pure_density(s.initial_state),
        TimeGrid(45.0, 60), observables=s.observables,
    )
    dark = traj.observables["dark_weight"]
    assert dark[-1] >= 0.9
    tail = dark[-6:]
    assert tail.max() - tail.min() <= 1e-3


# ------------------------------------------------------------------ hybrid


def test_hybrid_spin_hamiltonian_conserves_inner_excitation():
    s = scenario_hybrid("I")
    diag = s.metadata["conserved_diagonals"][0]
    d = sp.diags(diag.astype(complex))
    comm = d @ s.hamiltonian.mat - s.hamiltonian.mat @ d
    assert comm.nnz == 0 or abs(comm).max() < 1e-6 * s.hamiltonian.max_abs()


def test_hybrid_initial_association_is_one():
    for exp in ("I", "II"):
        s = scenario_hybrid(exp)
        traj = s.custom_run(TimeGrid(1e-9, 2))
        assert traj.observables["a"][0] == pytest.approx(1.0, abs=1e-12)


def _joint_hybrid(params):
    """Direct two-spin build used to validate the factored fast path."""
    caps = {"Omega": params["cap_Omega"], "omega": params["cap_omega"]}
    modes = []
    for spin in ("up", "dn"):
        modes += [
            ModeSpec(f"Omega_{spin}", params["W"], caps["Omega"]),
            ModeSpec(f"omega_{spin}", params["w"], caps["omega"]),
        ]
    sites = [SiteSpec(f"{spin}_{orb}", 1) for spin in ("up", "dn") for orb in ("o1a1", "o1a2", "o2a1", "o2a2")]
    up_idx = [0, 1, 2, 3]
    dn_idx = [4, 5, 6, 7]
    space = build_space(
        modes=modes,
        sites=sites,
        constraints=[
            fixed_total_occupancy(1, up_idx),
            fixed_total_occupancy(1, dn_idx),
        ],
    )
    h = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    channels = []
    for spin in ("up", "dn"):
        n_O = number_op(space, f"Omega_{spin}").mat
        n_w = number_op(space, f"omega_{spin}").mat
        aO = photon_op(space, f"Omega_{spin}", "annihilate").mat
        aw = photon_op(space, f"omega_{spin}", "annihilate").mat
        p21 = site_number(space, f"{spin}_o2a1").mat
        p22 = site_number(space, f"{spin}_o2a2").mat
        t12 = site_transfer(space, f"{spin}_o2a2", f"{spin}_o2a1").mat
        t21 = site_transfer(space, f"{spin}_o2a1", f"{spin}_o2a2").mat
        sig1 = site_transfer(space, f"{spin}_o2a1", f"{spin}_o1a1").mat
        sig2 = site_transfer(space, f"{spin}_o2a2", f"{spin}_o1a2").mat
        sbar = params["g"] * (sig1 + sig2)
        sigma_tun = 0.5 * (p21 - t12 + t21 - p22)
        p_phi1 = 0.5 * (p21 + p22 - t12 - t21)
        h = h + params["W"] * (n_O + p21 + p22) + params["w"] * (n_w + p_phi1)
        h = h + aO.conjugate().transpose() @ sbar + aO @ sbar.conjugate().transpose()
        h = h + params["g_tun"] * (
            aw.conjugate().transpose() @ sigma_tun + aw @ sigma_tun.conjugate().transpose()
        )
        channels.append(LindbladChannel(SparseOperator(aO), params["gamma_Omega"], f"leak_Omega_{spin}"))
        channels.append(LindbladChannel(SparseOperator(aw), params["gamma_omega"], f"leak_omega_{spin}"))
    return space, SparseOperator(h), channels


def _joint_initial(space, experiment):
    if experiment == "I":
        photons = (1, 1, 1, 1)
        orb = "o1"
    else:
        photons = (0, 0, 0, 0)
        orb = "o2"
    vecs = []
    for atom in ("a1", "a2"):
        occ = []
        for spin in ("up", "dn"):
            for name in ("o1a1", "o1a2", "o2a1", "o2a2"):
                occ.append(1 if name == f"{orb}{atom}" else 0)
        vecs.append(space.vector(BasisState(photons=photons, sites=tuple(occ))))
    return (vecs[0] - vecs[1]) / np.sqrt(2)


def _joint_classifier(space):
    def same_atom(st: BasisState):
        def atom_of(idx0):
            occ = st.sites[idx0 : idx0 + 4]
            pos = occ.index(1)
            return pos % 2  # a1 or a2

        return atom_of(0) == atom_of(4)

    return np.array([1.0 if same_atom(s) else 0.0 for s in space.basis])


@pytest.mark.parametrize("experiment", ["I", "II"])
def test_hybrid_factored_run_matches_joint_model(experiment):
    # mild parameters so a direct joint evolution is feasible
    params = {
        "W": 3.0, "w": 2.0, "g": 0.5, "g_tun": 0.8,
        "gamma_Omega": 0.4, "gamma_omega": 0.2,
        "cap_Omega": 1, "cap_omega": 1,
    }
    grid = TimeGrid(8.0, 16)
    s = scenario_hybrid(experiment, params)
    fast = s.custom_run(grid)

    space, h, channels = _joint_hybrid(params)
    psi0 = _joint_initial(space, experiment)
    weights = _joint_classifier(space)
    traj = evolve_lindblad_action(
        h, channels, pure_density(psi0), grid,
        observables={"a": lambda rho: float(np.dot(weights, np.real(np.diagonal(rho))))},
    )
    assert np.max(np.abs(fast.observables["a"] - traj.observables["a"])) < 1e-8


def test_hybrid_omega_cap_truncation_is_converged():
    base = scenario_hybrid("I")
    bigger = scenario_hybrid("I", {"cap_omega": 3})
    grid = TimeGrid(1e-5, 50)
    a2 = base.custom_run(grid).observables["a"]
    a3 = bigger.custom_run(grid).observables["a"]
    assert np.max(np.abs(a2 - a3)) < 1e-6


# ----------------------------------------------------------- assoc / dissoc


def test_assoc_dissoc_share_the_hamiltonian():
    a = scenario_assoc_dissoc("association")
    d = scenario_assoc_dissoc("dissociation")
    assert (a.hamiltonian.mat != d.hamiltonian.mat).nnz == 0
    assert {ch.label for ch in a.channels} != {ch.label for ch in d.channels}


def test_assoc_basis_states_are_hadamard_pair():
    s = scenario_assoc_dissoc("dissociation")
    space = s.space
    phi1 = s.initial_state
    phi0 = (
        space.vector(BasisState(photons=(0,), sites=(0, 0)))
        + space.vector(BasisState(photons=(0,), sites=(1, 0)))
    ) / np.sqrt(2)
    assert abs(np.vdot(phi0, phi1)) < 1e-12
    assert np.linalg.norm(phi0) == pytest.approx(1.0)
    assert np.linalg.norm(phi1) == pytest.approx(1.0)


def test_association_concentrates_on_molecule():
    s = scenario_assoc_dissoc("association")
    traj = evolve_lindblad_exact(
        s.hamiltonian, s.channels, pure_density(s.initial_state),
        s.config.grid(), observables=s.observables,
    )
    assert traj.observables["a"][-1] >= 0.9
    # final state concentrates on the relaxed-electron molecule
    assert traj.observables["p_excited"][-1] <= 0.01


def test_dissociation_concentrates_on_separated_nuclei():
    s = scenario_assoc_dissoc("dissociation")
    traj = evolve_lindblad_exact(
        s.hamiltonian, s.channels, pure_density(s.initial_state),
        s.config.grid(), observables=s.observables,
    )
    assert traj.observables["a"][-1] <= 0.1


# --------------------------------------------------------------- bottleneck


def test_bottleneck_channel_off_gives_zero():
    s = scenario_bottleneck({"gamma_ex": 0.0})
    traj = evolve_lindblad_exact(
        s.hamiltonian, s.channels, pure_density(s.initial_state),
        TimeGrid(8.0, 40), observables=s.observables,
    )
    assert np.max(traj.observables["sink"]) <= 1e-12


def test_bottleneck_pure_transformation_saturates():
    s = scenario_bottleneck({"gamma_out": 0.0})
    traj = evolve_lindblad_exact(
        s.hamiltonian, s.channels, pure_density(s.initial_state),
        TimeGrid(40.0, 40), observables=s.observables,
    )
    assert traj.observables["sink"][-1] >= 0.99


# ------------------------------------------------------------------- lambda


def test_lambda_space_dimension():
    s = scenario_lambda()
    assert s.space.dimension == 324


def test_lambda_dark_states_are_stationary():
    s = scenario_lambda()
    for dark in s.metadata["dark_states"]:
        res = stationarity_residual(s.hamiltonian, s.channels, pure_density(dark))
        assert res <= 1e-8


def test_lambda_initial_state_is_active():
    # the doubly excited start must not itself be stationary
    s = scenario_lambda()
    res = stationarity_residual(s.hamiltonian, s.channels, pure_density(s.initial_state))
    assert res > 0.1


def test_lambda_rk4_agrees_with_exponential_action():
    s = scenario_lambda()
    grid = TimeGrid(1.5, 6)
    rho0 = pure_density(s.initial_state)
    obs = {k: s.observables[k] for k in ("sink_Omega", "sink_omega", "dark_3")}
    t1 = evolve_lindblad(s.integration_hamiltonian, s.channels, rho0, grid, observables=obs)
    t2 = evolve_lindblad_action(s.integration_hamiltonian, s.channels, rho0, grid, observables=obs)
    for name in obs:
        assert np.max(np.abs(t1.observables[name] - t2.observables[name])) < 1e-6
