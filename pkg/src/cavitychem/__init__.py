"""Finite-dimensional cavity-QED models of artificial chemistry.

Builds composite photon/atom/electron state spaces, assembles the standard
single- and multi-cavity Hamiltonians plus their chemically modified
variants, finds dark and black stationary states, integrates the Lindblad
master equation, and ships a catalog of ready-made experiment scenarios with
a command-line runner.
"""

from .statespace import (
    ModeSpec,
    AtomSpec,
    SiteSpec,
    BasisState,
    StateSpace,
    build_space,
    excitation_number,
    excitation_sector,
)
from .operators import (
    SparseOperator,
    CavityGraph,
    photon_op,
    number_op,
    atom_sigma,
    atom_hopping,
    collective_lowering,
    collective_emission_at,
    build_tc,
    build_tch,
)
from .darkstates import (
    DarkBasis,
    BlackState,
    dark_dimension,
    dark_basis_numeric,
    emission_gram,
    atomic_dark_basis,
    singlet_product_basis,
    multi_singlet,
    is_even_graph,
    black_state,
)
from .dynamics import (
    TimeGrid,
    LindbladChannel,
    Trajectory,
    evolve_unitary,
    evolve_lindblad,
    evolve_lindblad_exact,
    evolve_lindblad_action,
    stationarity_residual,
    pure_density,
)
from .observables import (
    AssociationClassifier,
    association_degree,
    population,
    rabi_reference,
    jump_commensurability,
    transformation_probability,
    stationary_dark_projector,
)

__version__ = "0.1.0"
