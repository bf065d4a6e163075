"""Dark and black states of collective atom-field coupling.

A dark atomic state cannot emit a photon although its energy may be nonzero.
Under the rotating-wave coupling the dark subspace is the kernel of the
collective relaxation operator sbar; in the exact (counter-rotating) coupling
a state stays dark under the free atomic evolution only if it is annihilated
by sbar and sbar+ simultaneously, which for n two-level atoms with equal
couplings is the total-spin-zero subspace of dimension C(n, n/2) - C(n, n/2+1)
(even n), spanned by tensor products of two-atom singlets.

A black state of two mobile atoms is annihilated both by every per-cavity
emission operator and by the atom-hopping Hamiltonian; it exists only on even
(bipartite) cavity graphs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ModelError
from .operators import (
    SparseOperator,
    CavityGraph,
    atom_hopping,
    collective_emission_at,
    collective_lowering,
)
from .statespace import AtomSpec, BasisState, StateSpace, build_space

__all__ = [
    "DarkBasis",
    "BlackState",
    "dark_dimension",
    "dark_basis_numeric",
    "emission_gram",
    "atomic_dark_basis",
    "two_level_register",
    "singlet_product_basis",
    "noncrossing_pairings",
    "multi_singlet",
    "is_even_graph",
    "black_state",
]

KERNEL_RTOL = 1e-9  # singular values below rtol * s_max count as zero
MULTI_SINGLET_MAX_D = 6  # d! terms; beyond this enumeration is refused


@dataclass
class DarkBasis:
    """Orthonormal kernel basis with the tolerance used to accept it.

    `ambiguous` flags a singular value within a factor 10 of the threshold,
    i.e. a numerically uncertain rank decision.
    """

    vectors: list
    model_kind: str
    tolerance: float
    singular_values: np.ndarray = field(default=None, repr=False)
    ambiguous: bool = False

    @property
    def dimension(self) -> int:
        return len(self.vectors)


def dark_dimension(n: int) -> int:
    """Dark-subspace dimension for n two-level atoms with equal couplings.

    C(n, n/2) - C(n, n/2 + 1) for even n; odd n admits no exact-model dark
    state and returns 0.
    """
    if n < 1:
        raise ModelError(f"need at least one atom, got n={n}")
    if n % 2 == 1:
        return 0
    return math.comb(n, n // 2) - math.comb(n, n // 2 + 1)


def dark_basis_numeric(op, tol: float = KERNEL_RTOL, model_kind: str = "exact") -> DarkBasis:
    """Orthonormal nullspace basis of a square operator via SVD thresholding."""
    mat = op.to_dense() if isinstance(op, SparseOperator) else np.asarray(op, dtype=complex)
    if mat.shape[0] != mat.shape[1]:
        raise ModelError("kernel computation expects a square operator")
    _u, s, vh = np.linalg.svd(mat)
    smax = s[0] if len(s) else 0.0
    if smax == 0.0:
        vectors = [vh[i].conj() for i in range(mat.shape[0])]
        return DarkBasis(vectors, model_kind, tol, s, False)
    cut = tol * smax
    null_mask = s < cut
    ambiguous = bool(np.any((s >= cut / 10) & (s < cut * 10) & ~np.isclose(s, 0)))
    vectors = [vh[i].conj() for i in range(len(s)) if null_mask[i]]
    return DarkBasis(vectors, model_kind, tol, s, ambiguous)


def emission_gram(sigma_bar: SparseOperator, model_kind: str = "exact") -> SparseOperator:
    """Positive operator whose kernel is the dark subspace.

    rwa:   sbar+ sbar            (kernel of sbar)
    exact: sbar+ sbar + sbar sbar+  (joint kernel of sbar and sbar+, i.e.
           states that can neither relax nor be driven by the
           counter-rotating term; these stay dark under the free evolution)
    """
    s = sigma_bar.mat
    sd = s.conjugate().transpose().tocsr()
    if model_kind == "rwa":
        return SparseOperator(sd @ s)
    if model_kind == "exact":
        return SparseOperator(sd @ s + s @ sd)
    raise ModelError(f"model_kind must be 'rwa' or 'exact', got {model_kind!r}")


def two_level_register(n: int, couplings=None) -> StateSpace:
    """Bare register of n fixed two-level atoms (no photons)."""
    if couplings is None:
        couplings = [1.0] * n
    atoms = [AtomSpec(label=f"a{i}", num_levels=2, coupling=g) for i, g in enumerate(couplings)]
    return build_space(atoms=atoms)


def atomic_dark_basis(n: int, couplings=None, model_kind: str = "exact", tol: float = KERNEL_RTOL) -> DarkBasis:
    """Numeric dark basis for n two-level atoms with the given couplings."""
    space = two_level_register(n, couplings)
    sbar = collective_lowering(space)
    return dark_basis_numeric(emission_gram(sbar, model_kind), tol, model_kind)


# --------------------------------------------------------------- singlets


def noncrossing_pairings(n: int) -> list:
    """All non-crossing perfect matchings of 0..n-1 (Catalan many)."""
    if n % 2 == 1:
        raise ModelError(f"pairings need an even atom count, got n={n}")

    def rec(points):
        if not points:
            return [[]]
        first = points[0]
        out = []
        # Pairing first with points[k] splits the rest into inside/outside;
        # non-crossing forces both blocks to pair internally.
        for k in range(1, len(points), 2):
            inside = points[1:k]
            outside = points[k + 1 :]
            for pi in rec(inside):
                for po in rec(outside):
                    out.append([(first, points[k])] + pi + po)
        return out

    return [tuple(p) for p in rec(list(range(n)))]


def singlet_product_basis(n: int) -> list:
    """Spanning set of the exact-model dark space: singlet products over
    non-crossing pairings, each vector in the 2**n atomic basis.

    The vectors are normalized but not mutually orthogonal; their span has
    dimension dark_dimension(n).
    """
    if n % 2 == 1:
        raise ModelError(f"singlet products need even n, got {n}")
    vectors = []
    for pairing in noncrossing_pairings(n):
        v = np.zeros(2**n, dtype=complex)
        for bits in itertools.product((0, 1), repeat=n):
            amp = 1.0
            for i, j in pairing:
                if bits[i] == 0 and bits[j] == 1:
                    amp *= 1 / np.sqrt(2)
                elif bits[i] == 1 and bits[j] == 0:
                    amp *= -1 / np.sqrt(2)
                else:
                    amp = 0.0
                    break
            if amp:
                # bit order matches two_level_register: atom 0 varies slowest
                idx = int("".join(str(b) for b in bits), 2)
                v[idx] = amp
        vectors.append(v)
    return vectors


def multi_singlet(d: int) -> np.ndarray:
    """Fully antisymmetric state of d atoms with d levels each:
    (1/sqrt(d!)) sum_pi sgn(pi) |pi(0) pi(1) ... pi(d-1)>.

    Annihilated by every collective lowering sum_i |a><b|_i with a < b.
    Refused for d > MULTI_SINGLET_MAX_D (d! terms).
    """
    if d < 2:
        raise ModelError(f"multi-singlet needs d >= 2, got {d}")
    if d > MULTI_SINGLET_MAX_D:
        raise ModelError(
            f"d={d} exceeds the enumeration limit d <= {MULTI_SINGLET_MAX_D}"
        )
    dim = d**d
    v = np.zeros(dim, dtype=complex)
    norm = 1 / np.sqrt(math.factorial(d))
    for perm in itertools.permutations(range(d)):
        sign = _perm_sign(perm)
        idx = 0
        for lvl in perm:  # atom i holds level perm[i]; atom 0 varies slowest
            idx = idx * d + lvl
        v[idx] = sign * norm
    return v


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ------------------------------------------------------------ black states


def is_even_graph(graph: CavityGraph) -> bool:
    """True iff every cycle has an even number of cavities (graph bipartite).

    Evaluated per connected component via BFS 2-coloring.
    """
    adj = graph.adjacency()
    color = {}
    for start in graph.cavities:
        if start in color:
            continue
        color[start] = 0
        queue = [start]
        while queue:
            u = queue.pop()
            for w in adj[u]:
                if w not in color:
                    color[w] = 1 - color[u]
                    queue.append(w)
                elif color[w] == color[u]:
                    return False
    return True


@dataclass
class BlackState:
    """Two-atom state that can neither emit a photon nor move between cavities."""

    vector: np.ndarray
    space: StateSpace
    signs: dict
    degeneracy: int  # dimension of the sign solution space (gauge excluded)
    hop_residual: float
    emission_residual: float


def black_state(graph: CavityGraph, coupling: float = 1.0) -> BlackState:
    """Signed superposition of per-cavity two-atom singlets killed by both the
    hopping Hamiltonian and every per-cavity emission operator.

    The signs are not guessed from a 2-coloring: they solve the linear system
    "hopping annihilates the vector", gauge-fixed to +1 on the first cavity,
    and are then verified. Odd (non-bipartite) graphs are refused.
    """
    if not is_even_graph(graph):
        raise ModelError(
            "black diatomic states can only exist for even graphs "
            "(every cycle must contain an even number of cavities)"
        )
    if not graph.atom_bridges:
        raise ModelError("graph declares no atom bridges; atoms cannot move")

    cavities = list(graph.cavities)
    atoms = [
        AtomSpec(label="atom0", num_levels=2, positions=tuple(cavities), coupling=coupling),
        AtomSpec(label="atom1", num_levels=2, positions=tuple(cavities), coupling=coupling),
    ]
    space = build_space(atoms=atoms)
    h_hop = atom_hopping(space, graph)

    # Per-cavity singlet |s_c>: both atoms in cavity c, internal (|01>-|10>)/sqrt(2).
    singlets = []
    for c in cavities:
        v = (
            space.vector(BasisState(atoms=((0, c), (1, c))))
            - space.vector(BasisState(atoms=((1, c), (0, c))))
        ) / np.sqrt(2)
        singlets.append(v)

    # Columns H_hop |s_c>; the sign vector lives in this matrix's nullspace.
    m = np.column_stack([h_hop.apply(v) for v in singlets])
    _u, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = s[0] if len(s) else 0.0
    tol = 1e-10 * max(smax, 1.0)
    null = [vh[i].conj() for i in range(len(cavities)) if (i >= len(s) or s[i] < tol)]
    if not null:
        raise ModelError("no sign assignment annihilates the hopping operator")

    coeffs = _gauge_fix(null, space, singlets)
    signs = {c: int(np.sign(coeffs[k].real)) for k, c in enumerate(cavities)}
    vector = sum(coeffs[k] * singlets[k] for k in range(len(cavities)))
    vector = vector / np.linalg.norm(vector)

    hop_res = float(np.max(np.abs(h_hop.apply(vector))))
    em_res = 0.0
    for c in cavities:
        sig_c = collective_emission_at(space, c).mat
        em = sig_c + sig_c.conjugate().transpose()
        em_res = max(em_res, float(np.max(np.abs(em @ vector))))
    return BlackState(vector, space, signs, len(null), hop_res, em_res)


def _gauge_fix(null_vectors, space, singlets):
    """Pick the nullspace member with uniform magnitudes, first entry +1."""
    # For a connected even graph the nullspace is one-dimensional and the
    # entries all share one magnitude; normalize the gauge and rescale.
    v = null_vectors[0].copy()
    k0 = int(np.argmax(np.abs(v)))
    v = v / v[k0]
    if abs(v[0]) > 1e-12:
        v = v / v[0]
    return v
