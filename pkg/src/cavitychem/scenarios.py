"""Catalog of ready-made experiment scenarios.

Each builder assembles a Scenario: state space, Hamiltonian, Lindblad
channels, initial state, observables and metadata (declared dark states,
conserved charges). Scenario ids, parameter names and observable names are
the stable contract used by the CLI.

Where every diagonal energy is resonant, the commuting diagonal part is
subtracted before integration (the channels transform covariantly, and all
recorded observables commute with it, both verified numerically at build
time); reported Hamiltonians and stationarity checks always use the full
operator.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .dynamics import (
    LindbladChannel,
    TimeGrid,
    Trajectory,
    liouvillian,
    pure_density,
)
from .errors import BasisError, ModelError, ScenarioError
from .observables import AssociationClassifier, stationary_dark_projector
from .operators import (
    CavityGraph,
    SparseOperator,
    atom_level_projector,
    atom_sigma,
    diagonal_operator,
    number_op,
    operator_from_action,
    photon_op,
    site_number,
    site_op,
    site_transfer,
)
from .statespace import (
    AtomSpec,
    BasisState,
    ModeSpec,
    SiteSpec,
    StateSpace,
    build_space,
    fixed_total_occupancy,
)

__all__ = [
    "ScenarioConfig",
    "Scenario",
    "SCENARIO_IDS",
    "scenario_ids",
    "describe_scenarios",
    "build_scenario",
    "scenario_electron_explicit",
    "scenario_optical_interpretation",
    "scenario_hybrid",
    "scenario_assoc_dissoc",
    "scenario_bottleneck",
    "scenario_lambda",
    "bottleneck_sweep",
    "parse_state_literal",
]


@dataclass
class ScenarioConfig:
    """Declarative description of a model instance."""

    scenario_id: str
    params: dict
    t_final: float
    samples: int
    dt: float | None = None
    integrator: str = "rk4"
    description: str = ""

    def grid(self) -> TimeGrid:
        return TimeGrid(t_final=self.t_final, samples=self.samples)


@dataclass
class Scenario:
    """Materialized model: operators, channels, initial state, observables."""

    config: ScenarioConfig
    space: StateSpace | None
    hamiltonian: SparseOperator | None
    channels: list
    initial_state: np.ndarray | None
    observables: dict
    integration_hamiltonian: SparseOperator | None = None
    classifier: AssociationClassifier | None = None
    metadata: dict = field(default_factory=dict)
    custom_run: Callable | None = None

    @property
    def scenario_id(self) -> str:
        return self.config.scenario_id


def _merge(defaults: dict, overrides: dict | None) -> dict:
    params = dict(defaults)
    for key, val in (overrides or {}).items():
        if key not in defaults:
            raise ScenarioError(
                f"unknown parameter {key!r}; valid: {sorted(defaults)}"
            )
        params[key] = val
    return params


def _frame_reduced(h_full: SparseOperator, diag: np.ndarray, channels, observables, tol=1e-10):
    """Subtract a commuting resonant diagonal for integration, if exactly valid.

    Valid when [diag, H] = 0, every channel operator picks up only a global
    phase under the diagonal frame (entries of D A - A D proportional to A
    with one constant), and every recorded matrix observable commutes with
    the diagonal. Returns None when any condition fails.
    """
    d = sp.diags(diag.astype(complex), format="csr")
    h = h_full.mat
    scale = max(h_full.max_abs(), 1.0)
    comm = d @ h - h @ d
    if comm.nnz and abs(comm).max() > tol * scale:
        return None
    for ch in channels:
        a = ch.operator.mat.tocoo()
        if a.nnz == 0:
            continue
        deltas = diag[a.row] - diag[a.col]
        if np.max(np.abs(deltas - deltas[0])) > tol * max(1.0, np.max(np.abs(diag))):
            return None
    for ob in observables.values():
        if callable(ob):
            return None
        mat = ob.mat.tocoo() if isinstance(ob, SparseOperator) else sp.coo_matrix(ob)
        if mat.nnz and np.max(np.abs(diag[mat.row] - diag[mat.col])) > tol * max(1.0, np.max(np.abs(diag))):
            return None
    return SparseOperator(h - d)


def _projector(space: StateSpace, predicate) -> SparseOperator:
    return diagonal_operator(space, lambda s: 1.0 if predicate(s) else 0.0)


def _rank_one(vec: np.ndarray) -> SparseOperator:
    return SparseOperator(sp.csr_matrix(np.outer(vec, vec.conj())))


# =====================================================================
# Two artificial atoms with explicit electrons and a transport level
# =====================================================================

ELECTRON_EXPLICIT_DEFAULTS = {
    "eps0": -1.5,  # lower orbit energy (bound states below the transport level)
    "eps1": -1.0,  # upper orbit energy
    "u_pair": 0.0,  # on-atom energy shift when both orbits are filled
    "g01": 0.4,  # transport <-> upper orbit capture coupling
    "g12": 0.4,  # upper <-> lower orbit optical coupling
    "g23": 0.4,  # transport capture into the doubly occupied configuration
    "gamma_leak": 0.5,  # photon leakage rate, all three modes
    "gamma_in": 0.0,  # photon influx rate (creation channels), all modes
    "n_electrons": 2,
    "transport_cap": 2,
    "initial": "both-excited",  # or "dark-singlet"
}


def _atom_config_bits(state: BasisState, base: int) -> tuple:
    # site order per atom: (ob0, ob1); atomic states 0..3 = (0,0),(0,1),(1,0),(1,1)
    return (state.sites[base], state.sites[base + 1])


_ATOM_STATE_BITS = {0: (0, 0), 1: (0, 1), 2: (1, 0), 3: (1, 1)}


def scenario_electron_explicit(overrides: dict | None = None) -> Scenario:
    """Two 4-configuration atoms (two orbits each), a shared transport level,
    and three photon modes; photon leakage drives relaxation onto dark states.

    The default run starts with both electrons in their upper orbits and
    relaxes by collective emission; the antisymmetric two-atom combination
    with one upper and one lower electron is the declared stationary dark
    state.
    """
    p = _merge(ELECTRON_EXPLICIT_DEFAULTS, overrides)
    eps0, eps1, u = p["eps0"], p["eps1"], p["u_pair"]
    w01 = -eps1  # transport (energy 0) -> upper orbit release
    w12 = eps1 - eps0  # upper -> lower orbit release
    w23 = -eps1 - u  # capture into the doubly occupied atom

    modes = [
        ModeSpec("m01", w01, 1),
        ModeSpec("m12", w12, 2),
        ModeSpec("m23", w23, 1),
    ]
    sites = [
        SiteSpec("at0_ob0", 1),
        SiteSpec("at0_ob1", 1),
        SiteSpec("at1_ob0", 1),
        SiteSpec("at1_ob1", 1),
        SiteSpec("tp", p["transport_cap"]),
    ]
    space = build_space(
        modes=modes,
        sites=sites,
        constraints=[fixed_total_occupancy(p["n_electrons"])],
    )
    i01, i12, i23 = 0, 1, 2
    caps = {0: 1, 1: 2, 2: 1}
    itp = space.site_index("tp")
    bases = {0: space.site_index("at0_ob0"), 1: space.site_index("at1_ob0")}

    def transfer_terms(atom_base, g, kind):
        """Composite transfer operators; each term is Hermitian by design."""
        ob0, ob1 = atom_base, atom_base + 1

        def action(state: BasisState):
            st = list(state.sites)
            ph = list(state.photons)
            if kind == "T01":
                # capture a transport electron into the empty atom, emit m01
                if st[ob0] == 0 and st[ob1] == 0 and st[itp] > 0 and ph[i01] < caps[i01]:
                    t, q = list(st), list(ph)
                    t[ob1], t[itp], q[i01] = 1, st[itp] - 1, ph[i01] + 1
                    yield BasisState(tuple(q), state.atoms, tuple(t)), g * np.sqrt(ph[i01] + 1)
                # reverse: absorb m01, release the upper electron to transport
                if st[ob0] == 0 and st[ob1] == 1 and st[itp] < p["transport_cap"] and ph[i01] > 0:
                    t, q = list(st), list(ph)
                    t[ob1], t[itp], q[i01] = 0, st[itp] + 1, ph[i01] - 1
                    yield BasisState(tuple(q), state.atoms, tuple(t)), g * np.sqrt(ph[i01])
            elif kind == "T12":
                # upper orbit electron falls to the empty lower orbit, emit m12
                if st[ob1] == 1 and st[ob0] == 0 and ph[i12] < caps[i12]:
                    t, q = list(st), list(ph)
                    t[ob1], t[ob0], q[i12] = 0, 1, ph[i12] + 1
                    yield BasisState(tuple(q), state.atoms, tuple(t)), g * np.sqrt(ph[i12] + 1)
                if st[ob1] == 0 and st[ob0] == 1 and ph[i12] > 0:
                    t, q = list(st), list(ph)
                    t[ob1], t[ob0], q[i12] = 1, 0, ph[i12] - 1
                    yield BasisState(tuple(q), state.atoms, tuple(t)), g * np.sqrt(ph[i12])
            elif kind == "T23":
                # capture a second electron next to a filled lower orbit, emit m23
                if st[ob0] == 1 and st[ob1] == 0 and st[itp] > 0 and ph[i23] < caps[i23]:
                    t, q = list(st), list(ph)
                    t[ob1], t[itp], q[i23] = 1, st[itp] - 1, ph[i23] + 1
                    yield BasisState(tuple(q), state.atoms, tuple(t)), g * np.sqrt(ph[i23] + 1)
                if st[ob0] == 1 and st[ob1] == 1 and st[itp] < p["transport_cap"] and ph[i23] > 0:
                    t, q = list(st), list(ph)
                    t[ob1], t[itp], q[i23] = 0, st[itp] + 1, ph[i23] - 1
                    yield BasisState(tuple(q), state.atoms, tuple(t)), g * np.sqrt(ph[i23])

        return operator_from_action(space, action)

    def site_energy(state: BasisState) -> float:
        e = 0.0
        for base in bases.values():
            b0, b1 = state.sites[base], state.sites[base + 1]
            e += eps0 * b0 + eps1 * b1 + u * b0 * b1
        return e  # transport level carries zero energy

    diag_vec = np.array(
        [
            site_energy(s) + w01 * s.photons[i01] + w12 * s.photons[i12] + w23 * s.photons[i23]
            for s in space.basis
        ]
    )
    h = sp.diags(diag_vec.astype(complex), format="csr")
    for base in bases.values():
        h = h + transfer_terms(base, p["g01"], "T01").mat
        h = h + transfer_terms(base, p["g12"], "T12").mat
        h = h + transfer_terms(base, p["g23"], "T23").mat
    hamiltonian = SparseOperator(h).require_hermitian("electron-explicit Hamiltonian")

    channels = []
    for label in ("m01", "m12", "m23"):
        channels.append(
            LindbladChannel(photon_op(space, label, "annihilate"), p["gamma_leak"], f"leak_{label}")
        )
        if p["gamma_in"] > 0:
            channels.append(
                LindbladChannel(photon_op(space, label, "create"), p["gamma_in"], f"influx_{label}")
            )

    def atomic_state(at0: int, at1: int) -> BasisState:
        b00, b01 = _ATOM_STATE_BITS[at0]
        b10, b11 = _ATOM_STATE_BITS[at1]
        return BasisState(photons=(0, 0, 0), sites=(b00, b01, b10, b11, 0))

    dark_vec = (space.vector(atomic_state(1, 2)) - space.vector(atomic_state(2, 1))) / np.sqrt(2)
    psi0 = dark_vec if p["initial"] == "dark-singlet" else space.vector(atomic_state(1, 1))

    def config_projector(pairs):
        members = {tuple(_ATOM_STATE_BITS[a] + _ATOM_STATE_BITS[b]) for a, b in pairs}

        def pred(s: BasisState):
            bits = (s.sites[0], s.sites[1], s.sites[2], s.sites[3])
            return bits in members

        return _projector(space, pred)

    n_ph_total = SparseOperator(
        number_op(space, "m01").mat + number_op(space, "m12").mat + number_op(space, "m23").mat
    )
    observables = {
        "pop_both_excited": config_projector([(1, 1)]),
        "pop_one_excited": config_projector([(1, 2), (2, 1)]),
        "pop_both_ground": config_projector([(2, 2)]),
        "pop_dark_state": _rank_one(dark_vec),
        "n_photons": n_ph_total,
    }
    dark_proj = stationary_dark_projector(hamiltonian, channels)
    observables["dark_weight"] = SparseOperator(sp.csr_matrix(dark_proj))

    h_int = _frame_reduced(hamiltonian, diag_vec, channels, observables)
    config = ScenarioConfig(
        scenario_id="electron-explicit",
        params=p,
        t_final=35.0,
        samples=150,
        integrator="expm",
        description="two explicit-electron atoms with a transport level; relaxation onto dark states",
    )
    return Scenario(
        config=config,
        space=space,
        hamiltonian=hamiltonian,
        channels=channels,
        initial_state=psi0,
        observables=observables,
        integration_hamiltonian=h_int,
        metadata={
            "dark_states": [dark_vec],
            "conserved_diagonals": [np.array([sum(s.sites) for s in space.basis], dtype=float)],
            "mode_frequencies": {"m01": w01, "m12": w12, "m23": w23},
        },
    )


# =====================================================================
# Optical interpretation: electron motion replaced by photon transfer
# =====================================================================

OPTICAL_DEFAULTS = {
    "omega": 1.0,  # cavity and fall-transition frequency
    "upper_gap": 1.0,  # extra energy of the inert upper chemical level
    "g": 0.4,  # fall-to-anode coupling, per atom
    "mu": 0.3,  # photon hopping between the two cavities
    "gamma_leak": 0.5,
    "gamma_in": 0.0,
    "photon_cap": 2,
}


def scenario_optical_interpretation(overrides: dict | None = None) -> Scenario:
    """Two three-level atoms (anode, zero, one) in separate cavities joined by
    a waveguide; electrons never move, charge transfer is represented by a
    photon hop after a fall to the anode level.

    Observable names match the electron-explicit scenario so the two
    population curves can be compared directly.
    """
    p = _merge(OPTICAL_DEFAULTS, overrides)
    w, cap = p["omega"], p["photon_cap"]
    modes = [ModeSpec("c1", w, cap), ModeSpec("c2", w, cap)]
    atoms = [
        AtomSpec("opt0", num_levels=3, positions=(1,), coupling=p["g"]),
        AtomSpec("opt1", num_levels=3, positions=(2,), coupling=p["g"]),
    ]
    space = build_space(modes=modes, atoms=atoms)

    # levels: 0 anode (energy 0), 1 zero level (energy w), 2 upper chemical level
    lvl_energy = {0: 0.0, 1: w, 2: w + p["upper_gap"]}
    diag_vec = np.array(
        [
            w * (s.photons[0] + s.photons[1])
            + lvl_energy[s.atoms[0][0]]
            + lvl_energy[s.atoms[1][0]]
            for s in space.basis
        ]
    )
    h = sp.diags(diag_vec.astype(complex), format="csr")
    hop = None
    for mode, atom in (("c1", "opt0"), ("c2", "opt1")):
        adag = photon_op(space, mode, "create").mat
        fall = atom_sigma(space, atom, (1, 0), "lower").mat  # zero -> anode
        h = h + p["g"] * (adag @ fall + fall.conjugate().transpose() @ adag.conjugate().transpose())
    a1 = photon_op(space, "c1", "annihilate").mat
    a2 = photon_op(space, "c2", "annihilate").mat
    hop = p["mu"] * (a1.conjugate().transpose() @ a2 + a2.conjugate().transpose() @ a1)
    h = h + hop
    hamiltonian = SparseOperator(h).require_hermitian("optical-interpretation Hamiltonian")

    channels = []
    for mode in ("c1", "c2"):
        channels.append(
            LindbladChannel(photon_op(space, mode, "annihilate"), p["gamma_leak"], f"leak_{mode}")
        )
        if p["gamma_in"] > 0:
            channels.append(
                LindbladChannel(photon_op(space, mode, "create"), p["gamma_in"], f"influx_{mode}")
            )

    def atomic(l0, l1):
        return BasisState(photons=(0, 0), atoms=((l0, 1), (l1, 2)))

    psi0 = space.vector(atomic(1, 1))
    singlet = (space.vector(atomic(1, 0)) - space.vector(atomic(0, 1))) / np.sqrt(2)

    def level_proj(levels):
        return _projector(space, lambda s: (s.atoms[0][0], s.atoms[1][0]) in levels)

    observables = {
        "pop_both_excited": level_proj({(1, 1)}),
        "pop_one_excited": level_proj({(1, 0), (0, 1)}),
        "pop_both_ground": level_proj({(0, 0)}),
        "pop_dark_state": _rank_one(singlet),
        "n_photons": SparseOperator(number_op(space, "c1").mat + number_op(space, "c2").mat),
    }
    dark_proj = stationary_dark_projector(hamiltonian, channels)
    observables["dark_weight"] = SparseOperator(sp.csr_matrix(dark_proj))

    h_int = _frame_reduced(hamiltonian, diag_vec, channels, observables)
    config = ScenarioConfig(
        scenario_id="optical-interp",
        params=p,
        t_final=55.0,
        samples=150,
        integrator="expm",
        description="three-level atoms with an anode level; charge motion represented by photon hops",
    )
    return Scenario(
        config=config,
        space=space,
        hamiltonian=hamiltonian,
        channels=channels,
        initial_state=psi0,
        observables=observables,
        integration_hamiltonian=h_int,
        metadata={
            "dark_states": [],
            "hop_operator": SparseOperator(hop),
            "conserved_diagonals": [
                np.array(
                    [
                        s.photons[0] + s.photons[1]
                        + (1 if s.atoms[0][0] == 1 else 0) + (2 if s.atoms[0][0] == 2 else 0)
                        + (1 if s.atoms[1][0] == 1 else 0) + (2 if s.atoms[1][0] == 2 else 0)
                        for s in space.basis
                    ],
                    dtype=float,
                )
            ],
        },
    )


# =====================================================================
# Hybrid-orbital two-atom molecule with spin-resolved modes
# =====================================================================

HYBRID_DEFAULTS = {
    "W": 1.0e10,  # inner-orbit transition frequency (Omega)
    "w": 1.0e9,  # hybrid tunneling frequency (omega)
    "g": 1.0e7,  # field coupling inside the collective relaxation operator
    "g_tun": 1.0e8,  # tunneling coupling
    "gamma_Omega": 1.0e8,
    "gamma_omega": 1.0e6,
    "cap_Omega": 1,
    "cap_omega": 2,
}

_HYBRID_SITES = ("o1a1", "o1a2", "o2a1", "o2a2")


def _hybrid_spin_model(p: dict):
    """Single-spin factor: two photon modes and one electron over four orbitals."""
    space = build_space(
        modes=[ModeSpec("Omega", p["W"], p["cap_Omega"]), ModeSpec("omega", p["w"], p["cap_omega"])],
        sites=[SiteSpec(s, 1) for s in _HYBRID_SITES],
        constraints=[fixed_total_occupancy(1)],
    )
    n_O = number_op(space, "Omega").mat
    n_w = number_op(space, "omega").mat
    aO = photon_op(space, "Omega", "annihilate").mat
    aw = photon_op(space, "omega", "annihilate").mat
    p21 = site_number(space, "o2a1").mat
    p22 = site_number(space, "o2a2").mat
    t12 = site_transfer(space, "o2a2", "o2a1").mat  # |o2a1><o2a2|
    t21 = site_transfer(space, "o2a1", "o2a2").mat

    sigma1 = site_transfer(space, "o2a1", "o1a1").mat  # outer -> inner, atom 1
    sigma2 = site_transfer(space, "o2a2", "o1a2").mat
    sbar = p["g"] * (sigma1 + sigma2)
    sigma_tun = 0.5 * (p21 - t12 + t21 - p22)  # |Phi0><Phi1| on the outer orbit
    p_phi1 = 0.5 * (p21 + p22 - t12 - t21)

    h_Omega = p["W"] * (n_O + p21 + p22)
    h_omega = p["w"] * (n_w + p_phi1)
    h_exc = aO.conjugate().transpose() @ sbar + aO @ sbar.conjugate().transpose()
    h_tun = p["g_tun"] * (
        aw.conjugate().transpose() @ sigma_tun + aw @ sigma_tun.conjugate().transpose()
    )
    h = SparseOperator(h_Omega + h_omega + h_exc + h_tun).require_hermitian("hybrid spin Hamiltonian")
    channels = [
        LindbladChannel(SparseOperator(aO), p["gamma_Omega"], "leak_Omega"),
        LindbladChannel(SparseOperator(aw), p["gamma_omega"], "leak_omega"),
    ]
    # projector onto "electron at atom a", either orbit
    p_atom = {
        1: site_number(space, "o1a1").mat + p21,
        2: site_number(space, "o1a2").mat + p22,
    }
    return space, h, channels, p_atom


def _hybrid_branches(space: StateSpace, experiment: str):
    if experiment == "I":
        photons = (1, 1)
        orbit = "o1"
    elif experiment == "II":
        photons = (0, 0)
        orbit = "o2"
    else:
        raise ScenarioError(f"experiment must be 'I' or 'II', got {experiment!r}")
    vecs = []
    for atom in ("a1", "a2"):
        sites = tuple(1 if s == f"{orbit}{atom}" else 0 for s in _HYBRID_SITES)
        vecs.append(space.vector(BasisState(photons=photons, sites=sites)))
    return vecs, np.array([1.0, -1.0]) / np.sqrt(2)


def scenario_hybrid(experiment: str = "I", overrides: dict | None = None) -> Scenario:
    """Two-atom hybrid-orbital molecule, spin-resolved modes, with tunneling.

    The Hamiltonian and channels split exactly by electron spin, and the two
    spin factors are identical, so the run evolves the four spin-branch pair
    matrices with the exact dense-Liouvillian exponential and reassembles the
    association degree a(t) = P(both electrons on one atom). This stays exact
    at the published rate scales, which span four orders of magnitude.
    """
    p = _merge(HYBRID_DEFAULTS, overrides)
    space, h_spin, channels, p_atom = _hybrid_spin_model(p)
    branches, coeffs = _hybrid_branches(space, experiment)
    d = space.dimension

    def run(grid: TimeGrid, dt=None, integrator=None) -> Trajectory:
        L = liouvillian(h_spin, channels, dense=True)
        step = scipy.linalg.expm(L * grid.dt_sample)
        pair_vecs = {
            (i, k): np.outer(branches[i], branches[k].conj()).flatten(order="F")
            for i in range(2)
            for k in range(2)
        }
        times = grid.times
        assoc = np.zeros(len(times))
        traces = np.zeros(len(times))
        for idx in range(len(times)):
            if idx > 0:
                for key in pair_vecs:
                    pair_vecs[key] = step @ pair_vecs[key]
            a_val = 0.0
            tr_val = 0.0
            for (i, k), vec in pair_vecs.items():
                x = vec.reshape((d, d), order="F")
                w = coeffs[i] * np.conj(coeffs[k])
                tr_x = np.trace(x)
                tr_val += np.real(w * tr_x * tr_x)
                for proj in p_atom.values():
                    z = np.trace(proj @ x)
                    a_val += np.real(w * z * z)
            assoc[idx] = a_val
            traces[idx] = tr_val
        return Trajectory(
            times=times,
            observables={"a": assoc},
            diagnostics={
                "trace_drift": float(np.max(np.abs(traces - 1.0))),
                "hermiticity_drift": 0.0,
                "min_eigenvalue": None,
                "dt": grid.dt_sample,
                "steps": grid.samples,
                "integrator": "expm-dense-factored",
            },
        )

    config = ScenarioConfig(
        scenario_id=f"hybrid-{experiment}",
        params=p,
        t_final=1.0e-5,
        samples=200,
        integrator="factored",
        description="hybrid-orbital molecule, association degree from entangled vs separable start",
    )
    return Scenario(
        config=config,
        space=space,
        hamiltonian=h_spin,
        channels=channels,
        initial_state=None,
        observables={"a": None},
        metadata={
            "experiment": experiment,
            "branches": branches,
            "branch_coefficients": coeffs,
            "p_atom": p_atom,
            "conserved_diagonals": [
                np.array(
                    [s.photons[0] + s.sites[2] + s.sites[3] for s in space.basis],
                    dtype=float,
                )
            ],
        },
        custom_run=run,
    )


# =====================================================================
# Association / dissociation of two nuclei and one shared electron
# =====================================================================

ASSOC_DEFAULTS = {
    "omega": 8.0,  # photon frequency
    "omega_e": 8.0,  # electron excitation energy (resonant by default)
    "g": 0.7,  # field coupling
    "n_tunnel": 1.0,  # nuclear tunneling amplitude while the electron is excited
    "gamma": 1.2,  # decoherence rate of the active channel set
    # cap 2 closes the excitation-2 sector reached by the association start
    # (photon present plus excited electron); with cap 1 that component can
    # neither emit nor leak and a quarter of the probability stays trapped.
    "photon_cap": 2,
    "strict_printed_channels": False,
}


def _assoc_model(p: dict):
    space = build_space(
        modes=[ModeSpec("cav", p["omega"], p["photon_cap"])],
        sites=[SiteSpec("e_pos", 1), SiteSpec("n_rel", 1)],
    )
    a = photon_op(space, "cav", "annihilate").mat
    adag = photon_op(space, "cav", "create").mat
    pe0 = _projector(space, lambda s: s.sites[0] == 0).mat
    pe1 = _projector(space, lambda s: s.sites[0] == 1).mat
    e_up = site_op(space, "e_pos", "create").mat
    e_dn = site_op(space, "e_pos", "annihilate").mat
    # electron basis states phi0/phi1 are the +/- superpositions of positions
    sigma_e = 0.5 * (pe0 + e_up - e_dn - pe1)  # |phi0><phi1|
    p_phi1 = sigma_e.conjugate().transpose() @ sigma_e
    p_phi0 = sigma_e @ sigma_e.conjugate().transpose()
    n_flip = site_op(space, "n_rel", "create").mat + site_op(space, "n_rel", "annihilate").mat
    pn1 = _projector(space, lambda s: s.sites[1] == 1).mat
    pn0 = _projector(space, lambda s: s.sites[1] == 0).mat

    h = (
        p["n_tunnel"] * (p_phi1 @ n_flip)
        + p["omega"] * number_op(space, "cav").mat
        + p["omega_e"] * p_phi1
        + p["g"] * (adag @ sigma_e + a @ sigma_e.conjugate().transpose())
    )
    hamiltonian = SparseOperator(h).require_hermitian("association-dissociation Hamiltonian")
    ops = {
        "a": a, "p_phi0": p_phi0, "p_phi1": p_phi1,
        "pn0": pn0, "pn1": pn1, "pe0": pe0, "pe1": pe1,
    }
    return space, hamiltonian, ops


def scenario_assoc_dissoc(kind: str = "association", overrides: dict | None = None) -> Scenario:
    """Two nuclei, one electron, one photon mode; the association and the
    dissociation runs solve the same master equation and differ only in the
    initial state and the active decoherence channels.

    The association channel leaks the photon once the electron has relaxed
    and the nuclei sit in one cavity, freezing the molecule; the dissociation
    channels measure the electron position while the nuclei are apart.
    """
    if kind not in ("association", "dissociation"):
        raise ScenarioError(f"kind must be 'association' or 'dissociation', got {kind!r}")
    p = _merge(ASSOC_DEFAULTS, overrides)
    space, hamiltonian, ops = _assoc_model(p)

    if kind == "association":
        op = ops["p_phi0"] @ ops["a"]
        if not p["strict_printed_channels"]:
            op = op @ ops["pn0"]
        channels = [LindbladChannel(SparseOperator(op), p["gamma"], "A_ass")]
        psi0 = space.vector(BasisState(photons=(1,), sites=(0, 1)))
    else:
        channels = [
            LindbladChannel(SparseOperator(ops["a"] @ ops["pn1"] @ ops["pe0"]), p["gamma"], "A_diss1"),
            LindbladChannel(SparseOperator(ops["a"] @ ops["pn1"] @ ops["pe1"]), p["gamma"], "A_diss2"),
        ]
        phi1 = (space.vector(BasisState(photons=(0,), sites=(0, 0)))
                - space.vector(BasisState(photons=(0,), sites=(1, 0)))) / np.sqrt(2)
        psi0 = phi1

    xi = AssociationClassifier.from_predicate(space, lambda s: s.sites[1] == 0)
    observables = {
        "a": xi,
        "p_excited": SparseOperator(ops["p_phi1"]),
        "n_photons": number_op(space, "cav"),
    }
    config = ScenarioConfig(
        scenario_id="assoc" if kind == "association" else "dissoc",
        params=p,
        t_final=60.0,
        samples=240,
        integrator="exact",
        description=f"{kind} of an artificial diatomic molecule (shared Hamiltonian, distinct channels)",
    )
    return Scenario(
        config=config,
        space=space,
        hamiltonian=hamiltonian,
        channels=channels,
        initial_state=psi0,
        observables=observables,
        classifier=xi,
        metadata={"kind": kind},
    )


# =====================================================================
# Two-level atom with leakage and transformation (bottleneck)
# =====================================================================

BOTTLENECK_DEFAULTS = {
    "omega": 5.0,
    "g": 1.0,
    "gamma_out": 1.0,  # photon leakage
    "gamma_ex": 1.0,  # transformation from the excited level into the sink
    "gamma_in": 0.0,
}


def scenario_bottleneck(overrides: dict | None = None) -> Scenario:
    """Two-level atom in a cavity with photon leakage (gamma_out) and an
    absorbing transformation level fed from the excited state (gamma_ex).

    The transformation probability is the sink population at the final time.
    """
    p = _merge(BOTTLENECK_DEFAULTS, overrides)
    # atom levels: 0 ground, 1 excited, 2 transformed sink (decoupled from light)
    space = build_space(
        modes=[ModeSpec("cav", p["omega"], 1)],
        atoms=[AtomSpec("atom", num_levels=3, coupling=p["g"])],
    )
    a = photon_op(space, "cav", "annihilate").mat
    adag = photon_op(space, "cav", "create").mat
    sig = atom_sigma(space, "atom", (1, 0), "lower").mat
    p1 = atom_level_projector(space, "atom", 1).mat
    h = (
        p["omega"] * number_op(space, "cav").mat
        + p["omega"] * p1
        + p["g"] * (adag @ sig + a @ sig.conjugate().transpose())
    )
    hamiltonian = SparseOperator(h).require_hermitian("bottleneck Hamiltonian")
    transform = atom_sigma(space, "atom", (2, 1), "lower").mat.conjugate().transpose()  # |2><1|
    channels = [
        LindbladChannel(SparseOperator(a), p["gamma_out"], "leak"),
        LindbladChannel(SparseOperator(transform), p["gamma_ex"], "transform"),
    ]
    if p["gamma_in"] > 0:
        channels.append(LindbladChannel(SparseOperator(adag), p["gamma_in"], "influx"))
    psi0 = space.vector(BasisState(photons=(0,), atoms=((1, 0),)))
    observables = {
        "sink": atom_level_projector(space, "atom", 2),
        "p_excited": atom_level_projector(space, "atom", 1),
        "n_photons": number_op(space, "cav"),
    }
    config = ScenarioConfig(
        scenario_id="bottleneck",
        params=p,
        t_final=12.0,
        samples=120,
        integrator="exact",
        description="competition between photon escape and atomic transformation",
    )
    return Scenario(
        config=config,
        space=space,
        hamiltonian=hamiltonian,
        channels=channels,
        initial_state=psi0,
        observables=observables,
        metadata={"sink_observable": "sink"},
    )


def bottleneck_sweep(overrides: dict | None = None) -> dict:
    """Sweep gamma_out/gamma_ex and record the final transformation probability."""
    defaults = {"ratio_max": 10.0, "points": 41, "t_final": 12.0, "gamma_ex": 1.0,
                "omega": BOTTLENECK_DEFAULTS["omega"], "g": BOTTLENECK_DEFAULTS["g"]}
    p = _merge(defaults, overrides)
    return p


# =====================================================================
# Two lambda-spectrum atoms with a transport layer and sink counters
# =====================================================================

LAMBDA_DEFAULTS = {
    "Omega": 20.0,  # 0<->2 transition frequency
    "omega": 11.0,  # 1<->2 transition frequency
    "g_Omega": 2.0,
    "g_omega": 1.0,
    "g_tun": 1.0,
    "gamma_Omega": 1.0,
    "gamma_omega": 1.0,
    "photon_cap": 2,
    "sink_cap": 2,
}

_LAMBDA_SPINS = ("up", "dn")
_LAMBDA_ORBITS = (0, 1, 2)
_LAMBDA_ATOMS = (1, 2)


def _lambda_site(spin, orbit, atom) -> str:
    return f"{spin}_o{orbit}_a{atom}"


def scenario_lambda(overrides: dict | None = None) -> Scenario:
    """Two three-level atoms with a lambda spectrum (transitions 0<->2 and
    1<->2 share the upper level 2), two opposite-spin electrons, a transport
    layer for outer-orbit tunneling, and two leaky modes with sink counters.

    The optical couplings are occupancy-conditioned: a transition fires only
    when the partner electron sits in the matching lower orbit, or in the
    outer orbit of the other atom; tunneling requires the partner in the
    outer orbit. These selection rules make the three antisymmetric final
    states exact stationary dark states while the doubly excited initial
    state still relaxes through both modes.
    """
    p = _merge(LAMBDA_DEFAULTS, overrides)
    sites = [SiteSpec(_lambda_site(s, o, a), 1) for s in _LAMBDA_SPINS for o in _LAMBDA_ORBITS for a in _LAMBDA_ATOMS]
    sites += [SiteSpec("sink_Omega", p["sink_cap"]), SiteSpec("sink_omega", p["sink_cap"])]
    modes = [ModeSpec("Omega", p["Omega"], p["photon_cap"]), ModeSpec("omega", p["omega"], p["photon_cap"])]

    order = [(s, o, a) for s in _LAMBDA_SPINS for o in _LAMBDA_ORBITS for a in _LAMBDA_ATOMS]
    idx_of = {soa: k for k, soa in enumerate(order)}
    i_sink = {"Omega": len(order), "omega": len(order) + 1}

    def spin_occupation(state: BasisState, spin) -> int:
        return sum(state.sites[idx_of[(spin, o, a)]] for o in _LAMBDA_ORBITS for a in _LAMBDA_ATOMS)

    def excitation(state: BasisState) -> int:
        outer = sum(state.sites[idx_of[(s, 2, a)]] for s in _LAMBDA_SPINS for a in _LAMBDA_ATOMS)
        return outer + sum(state.photons) + state.sites[i_sink["Omega"]] + state.sites[i_sink["omega"]]

    # The run starts in the excitation-2 sector and the generator conserves
    # the grading (leaks move quanta into sink counters), but the listed
    # stationary dark states live in lower sectors once their photons have
    # leaked, so the space covers every sector up to 2.
    space = build_space(
        modes=modes,
        sites=sites,
        constraints=[
            lambda s: spin_occupation(s, "up") == 1,
            lambda s: spin_occupation(s, "dn") == 1,
            lambda s: excitation(s) <= 2,
        ],
    )

    def electron_at(state: BasisState, spin):
        for o in _LAMBDA_ORBITS:
            for a in _LAMBDA_ATOMS:
                if state.sites[idx_of[(spin, o, a)]]:
                    return o, a
        raise ModelError("spin register lost its electron")

    def other(spin):
        return "dn" if spin == "up" else "up"

    def optical_gate(state: BasisState, spin, atom, lower_orbit) -> bool:
        po, pa = electron_at(state, other(spin))
        return po == lower_orbit or (po == 2 and pa != atom)

    mode_idx = {"Omega": 0, "omega": 1}
    lower_of = {"Omega": 0, "omega": 1}

    def emission_terms(mode: str, g: float) -> SparseOperator:
        m = mode_idx[mode]
        lower = lower_of[mode]

        def action(state: BasisState):
            ph = state.photons
            for spin in _LAMBDA_SPINS:
                for atom in _LAMBDA_ATOMS:
                    src = idx_of[(spin, 2, atom)]
                    dst = idx_of[(spin, lower, atom)]
                    # emit: electron 2 -> lower, photon m +1
                    if state.sites[src] and not state.sites[dst] and ph[m] < p["photon_cap"]:
                        if optical_gate(state, spin, atom, lower):
                            st = list(state.sites)
                            st[src], st[dst] = 0, 1
                            q = list(ph)
                            q[m] += 1
                            yield BasisState(tuple(q), state.atoms, tuple(st)), g * np.sqrt(ph[m] + 1)
                    # absorb: electron lower -> 2, photon m -1
                    if state.sites[dst] and not state.sites[src] and ph[m] > 0:
                        if optical_gate(state, spin, atom, lower):
                            st = list(state.sites)
                            st[dst], st[src] = 0, 1
                            q = list(ph)
                            q[m] -= 1
                            yield BasisState(tuple(q), state.atoms, tuple(st)), g * np.sqrt(ph[m])

        return operator_from_action(space, action)

    def tunneling_term() -> SparseOperator:
        def action(state: BasisState):
            for spin in _LAMBDA_SPINS:
                po, _pa = electron_at(state, other(spin))
                if po != 2:
                    continue
                for src_atom, dst_atom in ((1, 2), (2, 1)):
                    src = idx_of[(spin, 2, src_atom)]
                    dst = idx_of[(spin, 2, dst_atom)]
                    if state.sites[src] and not state.sites[dst]:
                        st = list(state.sites)
                        st[src], st[dst] = 0, 1
                        yield BasisState(state.photons, state.atoms, tuple(st)), p["g_tun"]

        return operator_from_action(space, action)

    orbit_energy = {0: -p["Omega"], 1: -p["omega"], 2: 0.0}
    diag_vec = np.array(
        [
            sum(orbit_energy[o] * s.sites[idx_of[(sp, o, a)]] for sp in _LAMBDA_SPINS for o in _LAMBDA_ORBITS for a in _LAMBDA_ATOMS)
            + p["Omega"] * s.photons[0]
            + p["omega"] * s.photons[1]
            for s in space.basis
        ]
    )
    h = sp.diags(diag_vec.astype(complex), format="csr")
    h = h + emission_terms("Omega", p["g_Omega"]).mat
    h = h + emission_terms("omega", p["g_omega"]).mat
    h = h + tunneling_term().mat
    hamiltonian = SparseOperator(h).require_hermitian("lambda-model Hamiltonian")

    def counting_leak(mode: str) -> SparseOperator:
        m = mode_idx[mode]
        isink = i_sink[mode]

        def action(state: BasisState):
            n = state.photons[m]
            if n > 0 and state.sites[isink] < p["sink_cap"]:
                q = list(state.photons)
                q[m] -= 1
                st = list(state.sites)
                st[isink] += 1
                yield BasisState(tuple(q), state.atoms, tuple(st)), np.sqrt(n)

        return operator_from_action(space, action)

    channels = [
        LindbladChannel(counting_leak("Omega"), p["gamma_Omega"], "leak_Omega"),
        LindbladChannel(counting_leak("omega"), p["gamma_omega"], "leak_omega"),
    ]

    def config_state(up_orbit, up_atom, dn_orbit, dn_atom) -> BasisState:
        st = [0] * len(sites)
        st[idx_of[("up", up_orbit, up_atom)]] = 1
        st[idx_of[("dn", dn_orbit, dn_atom)]] = 1
        return BasisState(photons=(0, 0), sites=tuple(st))

    psi0 = space.vector(config_state(2, 1, 2, 1))
    dark_configs = [
        (((0, 1), (2, 2)), ((2, 1), (0, 2))),
        (((1, 1), (2, 2)), ((2, 1), (1, 2))),
        (((2, 1), (2, 1)), ((2, 2), (2, 2))),
    ]
    dark = [
        (space.vector(config_state(*ca[0], *ca[1])) - space.vector(config_state(*cb[0], *cb[1])))
        / np.sqrt(2)
        for ca, cb in dark_configs
    ]

    def atomic_projector(ca, cb) -> SparseOperator:
        """Projector onto the antisymmetric atomic pair, any photon/sink content."""
        decorations = sorted(
            {(s.photons, s.sites[i_sink["Omega"]], s.sites[i_sink["omega"]]) for s in space.basis}
        )
        total = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
        for ph, s_o, s_w in decorations:
            try:
                va = _decorated(space, config_state(*ca[0], *ca[1]), ph, s_o, s_w, i_sink)
                vb = _decorated(space, config_state(*cb[0], *cb[1]), ph, s_o, s_w, i_sink)
            except BasisError:
                continue  # decoration pushes this pair outside the sector cap
            vec = (va - vb) / np.sqrt(2)
            total = total + sp.csr_matrix(np.outer(vec, vec.conj()))
        return SparseOperator(total)

    observables = {
        "sink_Omega": _projector(space, lambda s: s.sites[i_sink["Omega"]] >= 1),
        "sink_omega": _projector(space, lambda s: s.sites[i_sink["omega"]] >= 1),
        "leaked_Omega": SparseOperator(site_number(space, "sink_Omega").mat),
        "leaked_omega": SparseOperator(site_number(space, "sink_omega").mat),
        "dark_1": atomic_projector(*dark_configs[0]),
        "dark_2": atomic_projector(*dark_configs[1]),
        "dark_3": atomic_projector(*dark_configs[2]),
    }
    h_int = _frame_reduced(hamiltonian, diag_vec, channels, observables)
    config = ScenarioConfig(
        scenario_id="lambda",
        params=p,
        t_final=25.0,
        samples=100,
        integrator="expm",
        description="two lambda-spectrum atoms with transport layer; sink deficit reveals dark states",
    )
    return Scenario(
        config=config,
        space=space,
        hamiltonian=hamiltonian,
        channels=channels,
        initial_state=psi0,
        observables=observables,
        integration_hamiltonian=h_int,
        metadata={
            "dark_states": dark,
            "sink_observables": ("sink_Omega", "sink_omega"),
            "conserved_diagonals": [
                np.array([excitation(s) for s in space.basis], dtype=float)
            ],
        },
    )


# =====================================================================
# Registry
# =====================================================================

SCENARIO_IDS = (
    "assoc",
    "dissoc",
    "hybrid-I",
    "hybrid-II",
    "bottleneck",
    "bottleneck-sweep",
    "lambda",
    "electron-explicit",
    "optical-interp",
)

_DESCRIPTIONS = {
    "assoc": "association of two artificial atoms into a molecule (one electron, two nuclei, one mode)",
    "dissoc": "dissociation of the artificial molecule; same Hamiltonian, different channels",
    "hybrid-I": "hybrid-orbital molecule, entangled ionic start; association degree a(t)",
    "hybrid-II": "hybrid-orbital molecule, outer-orbit start; association degree a(t)",
    "bottleneck": "two-level atom: photon escape vs transformation into an absorbing level",
    "bottleneck-sweep": "transformation probability swept over gamma_out/gamma_ex",
    "lambda": "two lambda-spectrum atoms with transport layer and photon sink counters",
    "electron-explicit": "two explicit-electron atoms, transport level, three leaky modes",
    "optical-interp": "optical representation of charge transfer via photon hopping",
}


def scenario_ids() -> tuple:
    return SCENARIO_IDS


def build_scenario(scenario_id: str, overrides: dict | None = None) -> Scenario:
    if scenario_id == "assoc":
        return scenario_assoc_dissoc("association", overrides)
    if scenario_id == "dissoc":
        return scenario_assoc_dissoc("dissociation", overrides)
    if scenario_id == "hybrid-I":
        return scenario_hybrid("I", overrides)
    if scenario_id == "hybrid-II":
        return scenario_hybrid("II", overrides)
    if scenario_id == "bottleneck":
        return scenario_bottleneck(overrides)
    if scenario_id == "lambda":
        return scenario_lambda(overrides)
    if scenario_id == "electron-explicit":
        return scenario_electron_explicit(overrides)
    if scenario_id == "optical-interp":
        return scenario_optical_interpretation(overrides)
    if scenario_id == "bottleneck-sweep":
        raise ScenarioError("bottleneck-sweep is driven by the runner; use run_sweep()")
    raise ScenarioError(f"unknown scenario {scenario_id!r}; known: {', '.join(SCENARIO_IDS)}")


def describe_scenarios() -> str:
    lines = ["built-in scenarios:"]
    for sid in SCENARIO_IDS:
        lines.append(f"  {sid:18s} {_DESCRIPTIONS[sid]}")
        defaults = _defaults_for(sid)
        if defaults:
            rendered = ", ".join(f"{k}={v:g}" if isinstance(v, (int, float)) and not isinstance(v, bool) else f"{k}={v}" for k, v in defaults.items())
            lines.append(f"  {'':18s}   defaults: {rendered}")
    return "\n".join(lines)


def _defaults_for(sid: str) -> dict:
    return {
        "assoc": ASSOC_DEFAULTS,
        "dissoc": ASSOC_DEFAULTS,
        "hybrid-I": HYBRID_DEFAULTS,
        "hybrid-II": HYBRID_DEFAULTS,
        "bottleneck": BOTTLENECK_DEFAULTS,
        "bottleneck-sweep": {"ratio_max": 10.0, "points": 41, "t_final": 12.0, "gamma_ex": 1.0},
        "lambda": LAMBDA_DEFAULTS,
        "electron-explicit": ELECTRON_EXPLICIT_DEFAULTS,
        "optical-interp": OPTICAL_DEFAULTS,
    }.get(sid, {})


def _decorated(space, base_state: BasisState, photons, sink_o, sink_w, i_sink):
    st = list(base_state.sites)
    st[i_sink["Omega"]] = sink_o
    st[i_sink["omega"]] = sink_w
    return space.vector(BasisState(photons=photons, atoms=base_state.atoms, sites=tuple(st)))


def parse_state_literal(space: StateSpace, literal) -> np.ndarray:
    """Build a state vector from an occupancy literal.

    Accepts {"photons": [...], "atoms": [[level, position], ...],
    "sites": [...]} for one basis configuration, or
    {"superposition": [{"amplitude": x or [re, im], ...state...}, ...]}
    which is normalized after assembly.
    """
    if "superposition" in literal:
        vec = np.zeros(space.dimension, dtype=complex)
        for term in literal["superposition"]:
            amp = term.get("amplitude", 1.0)
            if isinstance(amp, (list, tuple)):
                amp = complex(amp[0], amp[1])
            vec += amp * parse_state_literal(space, term)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise ScenarioError("superposition literal sums to zero")
        return vec / norm
    state = BasisState(
        photons=tuple(literal.get("photons", ())),
        atoms=tuple((int(l), pos) for l, pos in literal.get("atoms", ())),
        sites=tuple(literal.get("sites", ())),
    )
    return space.vector(state)
