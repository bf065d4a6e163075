from fractions import Fraction

import numpy as np
import pytest

from cavitychem.dynamics import LindbladChannel, TimeGrid, Trajectory, evolve_lindblad_exact, pure_density
from cavitychem.errors import ModelError
from cavitychem.observables import (
    AssociationClassifier,
    association_degree,
    jump_commensurability,
    population,
    rabi_reference,
    stationary_dark_projector,
    transformation_probability,
)
from cavitychem.operators import SparseOperator, atom_level_projector, atom_sigma, build_tc, number_op, photon_op
from cavitychem.statespace import AtomSpec, BasisState, ModeSpec, SiteSpec, build_space


def two_bit_space():
    return build_space(sites=[SiteSpec("e", 1), SiteSpec("n", 1)])


def test_association_pure_state_and_mixture():
    space = two_bit_space()
    xi = AssociationClassifier.from_predicate(space, lambda s: s.sites[1] == 0)
    v1 = space.vector(BasisState(sites=(0, 0)))  # associated
    v0 = space.vector(BasisState(sites=(0, 1)))  # apart
    assert association_degree(pure_density(v1), xi) == pytest.approx(1.0)
    mix = 0.5 * pure_density(v1) + 0.5 * pure_density(v0)
    assert association_degree(mix, xi) == pytest.approx(0.5)


def test_association_of_dissociation_final_state():
    # equal superposition over electron positions with separated nuclei
    space = two_bit_space()
    xi = AssociationClassifier.from_predicate(space, lambda s: s.sites[1] == 0)
    v = (
        space.vector(BasisState(sites=(0, 1))) + space.vector(BasisState(sites=(1, 1)))
    ) / np.sqrt(2)
    # oracle: apply xi to each component by hand; both have nuclei apart
    assert association_degree(pure_density(v), xi) == pytest.approx(0.0)


def test_association_is_linear_and_label_invariant():
    space = two_bit_space()
    xi = AssociationClassifier.from_predicate(space, lambda s: s.sites[1] == 0)
    rng = np.random.default_rng(5)

    def random_density(d):
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = x @ x.conj().T
        return rho / np.trace(rho).real

    r1, r2 = random_density(4), random_density(4)
    lam = 0.3
    mix = lam * r1 + (1 - lam) * r2
    assert association_degree(mix, xi) == pytest.approx(
        lam * association_degree(r1, xi) + (1 - lam) * association_degree(r2, xi)
    )
    # permuting basis states with equal classifier value leaves a unchanged
    perm = [2, 3, 0, 1]  # swaps electron positions, nuclear bit untouched
    assert [xi.weights[i] for i in perm] == list(xi.weights)
    p_mat = np.eye(4)[perm]
    rho_p = p_mat @ r1 @ p_mat.T
    assert association_degree(rho_p, xi) == pytest.approx(association_degree(r1, xi))


def test_population_identity_complement_resolution():
    space = build_space(atoms=[AtomSpec("a", num_levels=3)])
    rho = pure_density(space.vector(BasisState(atoms=((1, 0),))))
    eye = np.eye(3)
    assert population(rho, eye) == pytest.approx(1.0)
    p0 = atom_level_projector(space, "a", 0)
    p1 = atom_level_projector(space, "a", 1)
    p2 = atom_level_projector(space, "a", 2)
    assert population(rho, p0) == pytest.approx(0.0)
    total = sum(population(rho, p) for p in (p0, p1, p2))
    assert total == pytest.approx(1.0)


def test_population_rejects_non_projector():
    rho = np.eye(2) / 2
    with pytest.raises(ModelError):
        population(rho, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_rabi_reference_values():
    amp_dark, amp_bright = rabi_reference(1.3, 0.25, 0.0)
    assert amp_dark == pytest.approx(1.0)
    assert amp_bright == pytest.approx(0.0)
    omega, g = 0.9, 0.2
    t = np.pi / (2 * g)
    amp_dark, amp_bright = rabi_reference(omega, g, t)
    assert abs(amp_dark) < 1e-12
    assert amp_bright == pytest.approx(-1j * np.exp(-1j * omega * t))
    for t in np.linspace(0, 20, 50):
        ad, ab = rabi_reference(omega, g, t)
        assert abs(ad) ** 2 + abs(ab) ** 2 == pytest.approx(1.0)


# --------------------------------------------------------- commensurability


def enumerate_exact_ratios(lmax=200, mmax=200):
    """Oracle: the set of (1+2l)/(2m) and 2l/(1+2m) enumerated directly."""
    out = set()
    for l in range(lmax + 1):
        for m in range(1, mmax + 1):
            out.add(Fraction(1 + 2 * l, 2 * m))
    for l in range(1, lmax + 1):
        for m in range(mmax + 1):
            out.add(Fraction(2 * l, 1 + 2 * m))
    return out


def test_jump_commensurability_examples():
    r = jump_commensurability(Fraction(1, 2))
    assert r.kind == "exact" and r.witness == (0, 1)
    r = jump_commensurability(Fraction(2, 3))
    assert r.kind == "exact" and r.witness == (1, 1)
    assert jump_commensurability(Fraction(1, 1)).kind == "approximate"
    assert jump_commensurability(np.pi).kind == "approximate"
    with pytest.raises(ModelError):
        jump_commensurability(Fraction(-1, 2))


def test_jump_commensurability_matches_brute_force():
    # l, m <= 200 covers every reduced p/q with p, q <= 50
    table = enumerate_exact_ratios(200, 200)
    for p in range(1, 51):
        for q in range(1, 51):
            frac = Fraction(p, q)
            got = jump_commensurability(frac).kind == "exact"
            assert got == (frac in table), f"mismatch at {p}/{q}"


def test_jump_witnesses_reproduce_the_ratio():
    for p in range(1, 21):
        for q in range(1, 21):
            res = jump_commensurability(Fraction(p, q))
            if res.kind != "exact":
                continue
            l, m = res.witness
            forms = {Fraction(1 + 2 * l, 2 * m) if m >= 1 else None,
                     Fraction(2 * l, 1 + 2 * m) if l >= 1 else None}
            assert Fraction(p, q) in forms


# --------------------------------------------------- transformation probability


def decay_model(gamma_ex, g=0.0):
    space = build_space(
        modes=[ModeSpec("cav", 1.0, 1)],
        atoms=[AtomSpec("atom", num_levels=3, coupling=g)],
    )
    a = photon_op(space, "cav", "annihilate").mat
    sig = atom_sigma(space, "atom", (1, 0), "lower").mat
    h = SparseOperator(
        number_op(space, "cav").mat
        + atom_level_projector(space, "atom", 1).mat
        + g * (a.conjugate().transpose() @ sig + sig.conjugate().transpose() @ a)
    )
    transform = atom_sigma(space, "atom", (2, 1), "lower").mat.conjugate().transpose()
    chans = [LindbladChannel(SparseOperator(transform), gamma_ex, "transform")]
    psi0 = space.vector(BasisState(photons=(0,), atoms=((1, 0),)))
    sink = atom_level_projector(space, "atom", 2)
    return space, h, chans, psi0, sink


def test_transformation_probability_channel_off():
    space, h, chans, psi0, sink = decay_model(gamma_ex=0.0)
    traj = evolve_lindblad_exact(h, chans, pure_density(psi0), TimeGrid(5.0, 50), observables={"sink": sink})
    assert transformation_probability(traj) == pytest.approx(0.0, abs=1e-12)


def test_transformation_probability_pure_decay_oracle():
    # decoupled atom (g = 0): closed form P(t) = 1 - exp(-gamma t)
    gamma = 0.8
    space, h, chans, psi0, sink = decay_model(gamma_ex=gamma, g=0.0)
    traj = evolve_lindblad_exact(h, chans, pure_density(psi0), TimeGrid(6.0, 60), observables={"sink": sink})
    expected = 1.0 - np.exp(-gamma * traj.times)
    assert np.max(np.abs(traj.observables["sink"] - expected)) < 1e-10
    assert transformation_probability(traj) == pytest.approx(1.0 - np.exp(-gamma * 6.0), abs=1e-10)
    # monotone by construction; a decreasing series is rejected
    bad = Trajectory(times=traj.times, observables={"sink": traj.observables["sink"][::-1]})
    with pytest.raises(ModelError):
        transformation_probability(bad)


def test_transformation_probability_requires_sink():
    traj = Trajectory(times=np.array([0.0, 1.0]), observables={})
    with pytest.raises(ModelError):
        transformation_probability(traj)


def test_stationary_dark_projector_on_damped_cavity():
    space = build_space(modes=[ModeSpec("c", 1.0, 2)])
    h = SparseOperator(number_op(space, "c").mat)
    chans = [LindbladChannel(photon_op(space, "c", "annihilate"), 1.0)]
    proj = stationary_dark_projector(h, chans)
    vac = space.vector(BasisState(photons=(0,)))
    # only the vacuum survives photon leakage
    assert np.allclose(proj, np.outer(vac, vac.conj()))
