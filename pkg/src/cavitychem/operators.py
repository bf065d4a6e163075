"""Sparse operators over a StateSpace: ladder operators, atomic transitions,
collective emission, and the standard cavity-array Hamiltonians.

All builders return SparseOperator (CSR storage, duplicate triplets summed).
Conventions: hbar = 1, couplings and frequencies are angular frequencies,
photon ladder operators carry the usual sqrt(n) matrix elements truncated at
the mode cap, and electron-site transfer operators carry unit amplitude (they
move countable particles, not bosons).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BasisError, ModelError
from .statespace import AtomSpec, BasisState, StateSpace

__all__ = [
    "SparseOperator",
    "CavityGraph",
    "operator_from_action",
    "diagonal_operator",
    "identity",
    "photon_op",
    "number_op",
    "site_op",
    "site_number",
    "site_transfer",
    "atom_sigma",
    "atom_level_projector",
    "atom_position_projector",
    "atom_position_transfer",
    "collective_lowering",
    "collective_emission_at",
    "build_tc",
    "build_tch",
    "atom_hopping",
]

HERMITICITY_TOL = 1e-12


class SparseOperator:
    """Complex sparse matrix over a StateSpace basis.

    Thin wrapper around scipy CSR: keeps the dimension, canonicalizes
    duplicate entries, and can verify a Hermiticity claim.
    """

    def __init__(self, matrix, dimension: int | None = None):
        mat = sp.csr_matrix(matrix, dtype=complex)
        if mat.shape[0] != mat.shape[1]:
            raise ModelError(f"operator must be square, got {mat.shape}")
        if dimension is not None and mat.shape[0] != dimension:
            raise ModelError(f"dimension mismatch: {mat.shape[0]} != {dimension}")
        mat.sum_duplicates()
        mat.sort_indices()
        self.mat = mat

    @classmethod
    def from_triplets(cls, dimension: int, rows, cols, vals) -> "SparseOperator":
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        if len(rows) and (rows.max() >= dimension or cols.max() >= dimension):
            raise ModelError("triplet index out of range")
        coo = sp.coo_matrix(
            (np.asarray(vals, dtype=complex), (rows, cols)),
            shape=(dimension, dimension),
        )
        return cls(coo)

    @property
    def dimension(self) -> int:
        return self.mat.shape[0]

    def dag(self) -> "SparseOperator":
        return SparseOperator(self.mat.conjugate().transpose().tocsr())

    def to_dense(self) -> np.ndarray:
        return self.mat.toarray()

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.mat @ vec

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        diff = self.mat - self.mat.conjugate().transpose()
        return diff.nnz == 0 or abs(diff).max() <= tol

    def require_hermitian(self, what: str = "operator") -> "SparseOperator":
        if not self.is_hermitian():
            raise ModelError(f"{what} is not Hermitian")
        return self

    def max_abs(self) -> float:
        return 0.0 if self.mat.nnz == 0 else abs(self.mat).max()

    def max_row_sum(self) -> float:
        """Max over rows of sum |entries|; used by the integrator step bound."""
        if self.mat.nnz == 0:
            return 0.0
        return float(abs(self.mat).sum(axis=1).max())

    # Light algebra; anything heavier goes through .mat directly.
    def __add__(self, other):
        return SparseOperator(self.mat + other.mat)

    def __sub__(self, other):
        return SparseOperator(self.mat - other.mat)

    def __mul__(self, scalar):
        return SparseOperator(self.mat * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return SparseOperator(self.mat @ other.mat)
        return self.mat @ other

    def __repr__(self):
        return f"SparseOperator(D={self.dimension}, nnz={self.mat.nnz})"


@dataclass(frozen=True)
class CavityGraph:
    """Cavity connectivity: photon waveguides and atom transition bridges.

    photon_edges: (cavity_i, cavity_j, hopping amplitude mu_ij)
    atom_bridges: (cavity_j, cavity_q, hopping amplitude r_jq), applied to
    every atom whose allowed positions include both endpoints.
    """

    cavities: tuple
    photon_edges: tuple = ()
    atom_bridges: tuple = ()

    def __post_init__(self):
        known = set(self.cavities)
        for i, j, _amp in tuple(self.photon_edges) + tuple(self.atom_bridges):
            if i == j:
                raise ModelError(f"self-loop on cavity {i!r}")
            if i not in known or j not in known:
                raise ModelError(f"edge ({i!r}, {j!r}) references unknown cavity")

    def adjacency(self) -> dict:
        adj = {c: set() for c in self.cavities}
        for i, j, _amp in tuple(self.photon_edges) + tuple(self.atom_bridges):
            adj[i].add(j)
            adj[j].add(i)
        return adj


def operator_from_action(
    space: StateSpace,
    action: Callable[[BasisState], Iterable[tuple[BasisState, complex]]],
) -> SparseOperator:
    """Build an operator column by column from its action on basis states.

    `action(state)` yields (target_state, amplitude) pairs. A target outside
    the enumerated basis is an error: cap truncation must be handled inside
    the action, and a sector-restricted space must only see operators that
    preserve its sector.
    """
    rows, cols, vals = [], [], []
    for col, state in enumerate(space.basis):
        for target, amp in action(state):
            if amp == 0:
                continue
            rows.append(space.index_of(target))
            cols.append(col)
            vals.append(amp)
    return SparseOperator.from_triplets(space.dimension, rows, cols, vals)


def diagonal_operator(space: StateSpace, value: Callable[[BasisState], float]) -> SparseOperator:
    vals = np.array([value(s) for s in space.basis], dtype=complex)
    return SparseOperator(sp.diags(vals, format="csr"))


def identity(space: StateSpace) -> SparseOperator:
    return SparseOperator(sp.identity(space.dimension, dtype=complex, format="csr"))


# ------------------------------------------------------------------ photons


def photon_op(space: StateSpace, mode: str, kind: str) -> SparseOperator:
    """Ladder operator for one mode: kind 'annihilate' (a) or 'create' (a+).

    Matrix elements sqrt(n) / sqrt(n+1), truncated at the mode cap; a and a+
    are exact mutual adjoints on the truncated space.
    """
    m = space.mode_index(mode)
    cap = space.modes[m].max_occupancy
    if kind not in ("annihilate", "create"):
        raise ModelError(f"kind must be 'annihilate' or 'create', got {kind!r}")

    def action(state: BasisState):
        n = state.photons[m]
        if kind == "annihilate":
            if n > 0:
                yield _with_photon(state, m, n - 1), np.sqrt(n)
        else:
            if n < cap:
                yield _with_photon(state, m, n + 1), np.sqrt(n + 1)

    return operator_from_action(space, action)


def number_op(space: StateSpace, mode: str) -> SparseOperator:
    m = space.mode_index(mode)
    return diagonal_operator(space, lambda s: s.photons[m])


def _with_photon(state: BasisState, m: int, n: int) -> BasisState:
    ph = list(state.photons)
    ph[m] = n
    return BasisState(tuple(ph), state.atoms, state.sites)


# ------------------------------------------------------------------ sites


def site_op(space: StateSpace, site: str, kind: str) -> SparseOperator:
    """Unit-amplitude raise/lower on an electron site register.

    Electron registers count particles, so transfers carry amplitude 1
    rather than the bosonic sqrt(n).
    """
    j = space.site_index(site)
    cap = space.sites[j].capacity
    if kind not in ("annihilate", "create"):
        raise ModelError(f"kind must be 'annihilate' or 'create', got {kind!r}")

    def action(state: BasisState):
        n = state.sites[j]
        if kind == "annihilate":
            if n > 0:
                yield _with_site(state, j, n - 1), 1.0
        else:
            if n < cap:
                yield _with_site(state, j, n + 1), 1.0

    return operator_from_action(space, action)


def site_number(space: StateSpace, site: str) -> SparseOperator:
    j = space.site_index(site)
    return diagonal_operator(space, lambda s: s.sites[j])


def site_transfer(space: StateSpace, src: str, dst: str) -> SparseOperator:
    """Move one electron src -> dst (unit amplitude, capacity respected)."""
    a = space.site_index(src)
    b = space.site_index(dst)
    cap_b = space.sites[b].capacity

    def action(state: BasisState):
        if state.sites[a] > 0 and state.sites[b] < cap_b:
            st = list(state.sites)
            st[a] -= 1
            st[b] += 1
            yield BasisState(state.photons, state.atoms, tuple(st)), 1.0

    return operator_from_action(space, action)


def _with_site(state: BasisState, j: int, n: int) -> BasisState:
    st = list(state.sites)
    st[j] = n
    return BasisState(state.photons, state.atoms, tuple(st))


# ------------------------------------------------------------------ atoms


def atom_sigma(space: StateSpace, atom: str, transition=(1, 0), kind: str = "lower") -> SparseOperator:
    """|upper><lower| (raise) or |lower><upper| (lower) on one atom.

    `transition` is (upper, lower). Acts identically on every other register
    and on the atom's position.
    """
    i = space.atom_index(atom)
    upper, lower = transition
    levels = space.atoms[i].num_levels
    if not (0 <= lower < levels and 0 <= upper < levels) or upper == lower:
        raise ModelError(f"invalid transition {transition} for atom {atom!r}")
    if kind not in ("raise", "lower"):
        raise ModelError(f"kind must be 'raise' or 'lower', got {kind!r}")
    src, dst = (lower, upper) if kind == "raise" else (upper, lower)

    def action(state: BasisState):
        lvl, pos = state.atoms[i]
        if lvl == src:
            yield _with_atom(state, i, dst, pos), 1.0

    return operator_from_action(space, action)


def atom_level_projector(space: StateSpace, atom: str, level: int) -> SparseOperator:
    i = space.atom_index(atom)
    return diagonal_operator(space, lambda s: 1.0 if s.atoms[i][0] == level else 0.0)


def atom_position_projector(space: StateSpace, atom: str, position) -> SparseOperator:
    i = space.atom_index(atom)
    return diagonal_operator(space, lambda s: 1.0 if s.atoms[i][1] == position else 0.0)


def atom_position_transfer(space: StateSpace, atom: str, src, dst) -> SparseOperator:
    """Move one atom between cavities, leaving its internal level untouched."""
    i = space.atom_index(atom)
    if src not in space.atoms[i].positions or dst not in space.atoms[i].positions:
        raise ModelError(
            f"bridge ({src!r}, {dst!r}) not allowed for atom {atom!r}"
        )

    def action(state: BasisState):
        lvl, pos = state.atoms[i]
        if pos == src:
            yield _with_atom(state, i, lvl, dst), 1.0

    return operator_from_action(space, action)


def _with_atom(state: BasisState, i: int, lvl: int, pos) -> BasisState:
    at = list(state.atoms)
    at[i] = (lvl, pos)
    return BasisState(state.photons, tuple(at), state.sites)


# ------------------------------------------------- collective operators


def collective_lowering(
    space: StateSpace,
    atoms: Sequence[str] | None = None,
    couplings: Sequence[float] | None = None,
    transition=(1, 0),
) -> SparseOperator:
    """Weighted collective relaxation sum g_j sigma_j over the given atoms."""
    labels = [a.label for a in space.atoms] if atoms is None else list(atoms)
    if couplings is None:
        couplings = [space.atoms[space.atom_index(l)].coupling for l in labels]
    if len(couplings) != len(labels):
        raise ModelError("one coupling per atom required")
    total = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for g, label in zip(couplings, labels):
        total = total + g * atom_sigma(space, label, transition, "lower").mat
    return SparseOperator(total)


def collective_emission_at(
    space: StateSpace,
    cavity,
    atoms: Sequence[str] | None = None,
    couplings: Sequence[float] | None = None,
    transition=(1, 0),
) -> SparseOperator:
    """Collective lowering restricted to atoms currently sitting in `cavity`."""
    labels = [a.label for a in space.atoms] if atoms is None else list(atoms)
    if couplings is None:
        couplings = [space.atoms[space.atom_index(l)].coupling for l in labels]
    total = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for g, label in zip(couplings, labels):
        sig = atom_sigma(space, label, transition, "lower").mat
        proj = atom_position_projector(space, label, cavity).mat
        total = total + g * (sig @ proj)
    return SparseOperator(total)


# ------------------------------------------------------- Hamiltonians


def build_tc(
    space: StateSpace,
    mode: str,
    atoms: Sequence[str] | None = None,
    couplings: Sequence[float] | None = None,
    omega: float | None = None,
    rwa: bool = False,
) -> SparseOperator:
    """Single-cavity Hamiltonian of n two-level atoms and one mode.

    H = omega a+a + omega sum_j s_j+ s_j + H_i, with the interaction either
    exact, (a+ + a)(sbar+ + sbar), or rotating-wave, (a sbar+ + a+ sbar),
    where sbar = sum_j g_j s_j.
    """
    labels = [a.label for a in space.atoms] if atoms is None else list(atoms)
    for label in labels:
        if space.atoms[space.atom_index(label)].num_levels != 2:
            raise ModelError(f"atom {label!r} is not two-level")
    if omega is None:
        omega = space.modes[space.mode_index(mode)].frequency

    a = photon_op(space, mode, "annihilate").mat
    adag = photon_op(space, mode, "create").mat
    n_ph = number_op(space, mode).mat
    sbar = collective_lowering(space, labels, couplings).mat
    sbar_dag = sbar.conjugate().transpose().tocsr()

    n_exc = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for label in labels:
        sig = atom_sigma(space, label, (1, 0), "lower").mat
        n_exc = n_exc + sig.conjugate().transpose() @ sig

    h = omega * n_ph + omega * n_exc
    if rwa:
        h = h + adag @ sbar + a @ sbar_dag
    else:
        h = h + (adag + a) @ (sbar_dag + sbar)
    return SparseOperator(h).require_hermitian("TC Hamiltonian")


def build_tch(
    space: StateSpace,
    graph: CavityGraph,
    cavity_modes: dict,
    cavity_atoms: dict,
    couplings: dict | None = None,
    omegas: dict | None = None,
    rwa: bool = False,
) -> SparseOperator:
    """Cavity-array Hamiltonian: one TC block per cavity plus photon hopping.

    cavity_modes maps cavity id -> mode label; cavity_atoms maps cavity id ->
    tuple of atom labels fixed in that cavity (may be empty). Photon hopping
    mu_ij (a_i+ a_j + a_i a_j+) runs over graph.photon_edges.
    """
    h = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for c in graph.cavities:
        mode = cavity_modes[c]
        atoms = tuple(cavity_atoms.get(c, ()))
        gs = couplings.get(c) if couplings else None
        omega = omegas.get(c) if omegas else None
        if atoms:
            h = h + build_tc(space, mode, atoms, gs, omega, rwa).mat
        else:
            w = omega if omega is not None else space.modes[space.mode_index(mode)].frequency
            h = h + w * number_op(space, mode).mat
    for i, j, mu in graph.photon_edges:
        ai = photon_op(space, cavity_modes[i], "annihilate").mat
        aj = photon_op(space, cavity_modes[j], "annihilate").mat
        h = h + mu * (ai.conjugate().transpose() @ aj + aj.conjugate().transpose() @ ai)
    return SparseOperator(h).require_hermitian("TCH Hamiltonian")


def atom_hopping(space: StateSpace, graph: CavityGraph) -> SparseOperator:
    """Atom motion between bridged cavities, level register untouched.

    sum over atoms i and bridges (j, q): r_jq (S(i)_j+ S(i)_q + S(i)_q+ S(i)_j).
    """
    h = sp.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for atom in space.atoms:
        for j, q, r in graph.atom_bridges:
            hop = atom_position_transfer(space, atom.label, q, j).mat
            h = h + r * (hop + hop.conjugate().transpose())
    return SparseOperator(h).require_hermitian("hopping Hamiltonian")
