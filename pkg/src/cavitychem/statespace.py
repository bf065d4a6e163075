"""Composite Hilbert space enumeration for photons, positioned atoms and electrons.

The basis is the Cartesian product of three register families, enumerated in a
fixed order so that two identical builds produce identical index maps:

* photon modes, each a capped occupancy counter,
* atoms, each carrying an internal level and a cavity position,
* electron sites (orbits, transport levels, sink counters), each a capped
  occupancy counter.

Tensor-factor order is photons (x) atoms (x) sites, each family in declaration
order; the last declared register varies fastest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import BasisError

__all__ = [
    "ModeSpec",
    "AtomSpec",
    "SiteSpec",
    "BasisState",
    "StateSpace",
    "build_space",
    "fixed_total_occupancy",
    "fixed_weighted_sum",
    "excitation_number",
    "excitation_sector",
]


@dataclass(frozen=True)
class ModeSpec:
    """A photon mode: angular frequency (hbar = 1) and occupancy cap."""

    label: str
    frequency: float = 1.0
    max_occupancy: int = 1

    def __post_init__(self):
        if self.max_occupancy < 0:
            raise BasisError(f"mode {self.label!r}: max_occupancy must be >= 0")


@dataclass(frozen=True)
class AtomSpec:
    """An atom with `num_levels` internal levels and a set of allowed cavities.

    `coupling` is the default field-coupling strength used by Hamiltonian
    builders when no explicit value is given.
    """

    label: str
    num_levels: int = 2
    positions: tuple = (0,)
    coupling: float = 1.0

    def __post_init__(self):
        if self.num_levels < 2:
            raise BasisError(f"atom {self.label!r}: num_levels must be >= 2")
        if len(self.positions) == 0:
            raise BasisError(f"atom {self.label!r}: needs at least one position")


@dataclass(frozen=True)
class SiteSpec:
    """An electron register (orbit, transport level or counter) with a capacity."""

    label: str
    capacity: int = 1

    def __post_init__(self):
        if self.capacity < 0:
            raise BasisError(f"site {self.label!r}: capacity must be >= 0")


@dataclass(frozen=True)
class BasisState:
    """One configuration: photon occupancies, (level, position) per atom, site bits."""

    photons: tuple = ()
    atoms: tuple = ()  # ((level, position), ...)
    sites: tuple = ()

    def key(self):
        return (self.photons, self.atoms, self.sites)


@dataclass
class StateSpace:
    """Ordered basis of BasisState with a bijective index map."""

    modes: tuple
    atoms: tuple
    sites: tuple
    basis: list = field(default_factory=list)
    _index: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def index_of(self, state: BasisState) -> int:
        """Return i with basis[i] == state; raise if the state is not enumerated."""
        try:
            return self._index[state.key()]
        except KeyError:
            raise BasisError(f"state not in basis: {state}") from None

    def state(self, index: int) -> BasisState:
        return self.basis[index]

    def vector(self, state: BasisState) -> np.ndarray:
        """Unit vector for a basis configuration."""
        v = np.zeros(self.dimension, dtype=complex)
        v[self.index_of(state)] = 1.0
        return v

    def mode_index(self, label: str) -> int:
        for i, m in enumerate(self.modes):
            if m.label == label:
                return i
        raise BasisError(f"unknown mode {label!r}")

    def atom_index(self, label: str) -> int:
        for i, a in enumerate(self.atoms):
            if a.label == label:
                return i
        raise BasisError(f"unknown atom {label!r}")

    def site_index(self, label: str) -> int:
        for i, s in enumerate(self.sites):
            if s.label == label:
                return i
        raise BasisError(f"unknown site {label!r}")

    def __repr__(self):
        return (
            f"StateSpace(D={self.dimension}, modes={len(self.modes)}, "
            f"atoms={len(self.atoms)}, sites={len(self.sites)})"
        )


def build_space(
    modes: Sequence[ModeSpec] = (),
    atoms: Sequence[AtomSpec] = (),
    sites: Sequence[SiteSpec] = (),
    constraints: Iterable[Callable[[BasisState], bool]] = (),
) -> StateSpace:
    """Enumerate every product configuration passing all constraints.

    The order is lexicographic over (photons, atoms, sites) in declaration
    order, which makes basis indices reproducible across builds.
    """
    modes = tuple(modes)
    atoms = tuple(atoms)
    sites = tuple(sites)
    if not (modes or atoms or sites):
        raise BasisError("at least one register must be declared")
    _check_unique_labels(modes, atoms, sites)

    photon_ranges = [range(m.max_occupancy + 1) for m in modes]
    atom_ranges = [
        [(lvl, pos) for lvl in range(a.num_levels) for pos in a.positions]
        for a in atoms
    ]
    site_ranges = [range(s.capacity + 1) for s in sites]

    constraints = tuple(constraints)
    space = StateSpace(modes=modes, atoms=atoms, sites=sites)
    for ph in itertools.product(*photon_ranges) if photon_ranges else [()]:
        for at in itertools.product(*atom_ranges) if atom_ranges else [()]:
            for st in itertools.product(*site_ranges) if site_ranges else [()]:
                state = BasisState(photons=tuple(ph), atoms=tuple(at), sites=tuple(st))
                if all(c(state) for c in constraints):
                    space._index[state.key()] = len(space.basis)
                    space.basis.append(state)
    if space.dimension == 0:
        raise BasisError("constraints admit no basis state (empty product)")
    return space


def _check_unique_labels(modes, atoms, sites):
    for family, name in ((modes, "mode"), (atoms, "atom"), (sites, "site")):
        labels = [x.label for x in family]
        if len(set(labels)) != len(labels):
            raise BasisError(f"duplicate {name} labels: {labels}")


def fixed_total_occupancy(total: int, site_indices=None):
    """Constraint factory: the selected sites (default all, by declaration
    index) hold exactly `total` electrons."""

    def constraint(state: BasisState):
        occ = state.sites if site_indices is None else [
            state.sites[i] for i in site_indices
        ]
        return sum(occ) == total

    return constraint


def fixed_weighted_sum(weight: Callable[[BasisState], float], value: float):
    """Constraint factory: weight(state) == value."""

    def constraint(state: BasisState):
        return weight(state) == value

    return constraint


def excitation_number(state: BasisState, site_weights=None) -> int:
    """Default excitation grading: photon total plus atomic level indices.

    Site registers contribute with the given per-site weights (default 0).
    """
    n = sum(state.photons) + sum(lvl for (lvl, _pos) in state.atoms)
    if site_weights is not None:
        n += sum(w * occ for w, occ in zip(site_weights, state.sites))
    return n


def excitation_sector(space: StateSpace, n: int, site_weights=None) -> list:
    """Indices of all basis states with total excitation n.

    The sectors over all n partition the basis; an empty sector is a valid
    result.
    """
    return [
        i
        for i, s in enumerate(space.basis)
        if excitation_number(s, site_weights) == n
    ]
