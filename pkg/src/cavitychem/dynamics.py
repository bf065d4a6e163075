"""Time evolution: unitary propagation and Lindblad master-equation solvers.

The master equation (hbar = 1) is

    drho/dt = -i [H, rho] + sum_i gamma_i (A_i rho A_i+ - (1/2){A_i+ A_i, rho})

Three evolvers are provided:

* evolve_lindblad      - classical fixed-step 4th-order integration of the
                         right-hand side; reproducible and the reference
                         contract for convergence tests.
* evolve_lindblad_exact- dense-Liouvillian matrix exponential, exact at any
                         step size; for small dimensions and stiff rate sets.
* evolve_lindblad_action - sparse Liouvillian with exact exponential action
                         (expm_multiply); for larger dimensions.

The fixed-step integrator refuses steps above 0.05 / (max row sum of |H| +
sum_i gamma_i * max row sum of |A_i+ A_i|) and suggests an admissible step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from .errors import ModelError, StabilityError
from .operators import SparseOperator

__all__ = [
    "TimeGrid",
    "LindbladChannel",
    "Trajectory",
    "pure_density",
    "check_density",
    "stability_dt",
    "lindblad_rhs",
    "stationarity_residual",
    "liouvillian",
    "evolve_unitary",
    "evolve_lindblad",
    "evolve_lindblad_exact",
    "evolve_lindblad_action",
]

STABILITY_FACTOR = 0.05
UNITARY_MAX_DIM = 4096
EXACT_MAX_DIM = 64  # dense Liouvillian is (D^2)x(D^2)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling grid t_0 + k * (t_final - t_0) / samples."""

    t_final: float
    samples: int = 200
    t0: float = 0.0

    def __post_init__(self):
        if self.t_final <= self.t0:
            raise ModelError("t_final must exceed t0")
        if self.samples < 1:
            raise ModelError("need at least one sample interval")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t_final, self.samples + 1)

    @property
    def dt_sample(self) -> float:
        return (self.t_final - self.t0) / self.samples


@dataclass
class LindbladChannel:
    """Collapse operator with a nonnegative rate."""

    operator: SparseOperator
    rate: float
    label: str = ""

    def __post_init__(self):
        if self.rate < 0:
            raise ModelError(f"channel {self.label!r}: rate must be >= 0")


@dataclass
class Trajectory:
    """Sampled run: times, recorded observables, optional snapshots,
    and integrator diagnostics."""

    times: np.ndarray
    observables: dict = field(default_factory=dict)
    snapshots: list | None = None
    diagnostics: dict = field(default_factory=dict)

    def final(self, name: str) -> float:
        return float(self.observables[name][-1])


def pure_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_density(rho: np.ndarray, herm_tol=1e-10, trace_tol=1e-8, eig_tol=1e-8) -> None:
    """Validate Hermiticity, unit trace and (on demand) near-positivity."""
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ModelError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > trace_tol:
        raise ModelError("density matrix trace differs from 1")
    if np.min(scipy.linalg.eigvalsh(rho)) < -eig_tol:
        raise ModelError("density matrix has a significantly negative eigenvalue")


def _materialize(channels: Sequence[LindbladChannel]):
    mats = []
    for ch in channels:
        a = ch.operator.mat
        ad = a.conjugate().transpose().tocsr()
        mats.append((ch.rate, a, ad, (ad @ a).tocsr()))
    return mats


def stability_dt(H: SparseOperator, channels: Sequence[LindbladChannel]) -> float:
    """Largest admissible fixed step for the 4th-order integrator."""
    scale = H.max_row_sum()
    for ch in channels:
        a = ch.operator.mat
        ada = a.conjugate().transpose() @ a
        scale += ch.rate * float(abs(ada).sum(axis=1).max()) if ada.nnz else 0.0
    if scale == 0.0:
        return np.inf
    return STABILITY_FACTOR / scale


def lindblad_rhs(H: SparseOperator, channels: Sequence[LindbladChannel]):
    """Return rhs(rho) closure computing the master-equation right-hand side."""
    mats = _materialize(channels)
    h = H.mat

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = -1j * (h @ rho - (h.T @ rho.T).T)
        for rate, a, ad, ada in mats:
            arho = a @ rho
            out += rate * ((ad.T @ arho.T).T)  # A rho A+
            anti = ada @ rho + (ada.T @ rho.T).T
            out -= 0.5 * rate * anti
        return out

    return rhs


def stationarity_residual(H: SparseOperator, channels: Sequence[LindbladChannel], rho: np.ndarray) -> float:
    """Max-norm of -i[H, rho] + L(rho); zero for a stationary state."""
    return float(np.max(np.abs(lindblad_rhs(H, channels)(np.asarray(rho, dtype=complex)))))


def liouvillian(H: SparseOperator, channels: Sequence[LindbladChannel], dense: bool = False):
    """Superoperator matrix L with vec(drho/dt) = L vec(rho).

    Column-major (Fortran) vectorization: vec(A X B) = (B^T kron A) vec(X).
    """
    d = H.dimension
    eye = sp.identity(d, dtype=complex, format="csr")
    h = H.mat
    L = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for ch in channels:
        a = ch.operator.mat
        ad = a.conjugate().transpose().tocsr()
        ada = (ad @ a).tocsr()
        L = L + ch.rate * (
            sp.kron(a.conjugate(), a)
            - 0.5 * (sp.kron(eye, ada) + sp.kron(ada.T, eye))
        )
    L = L.tocsr()
    return L.toarray() if dense else L


def evolve_unitary(
    H: SparseOperator,
    psi0: np.ndarray,
    grid: TimeGrid,
    observables: dict | None = None,
) -> Trajectory:
    """Schroedinger evolution by full diagonalization (exact to roundoff).

    Norm is preserved by construction; dimensions above UNITARY_MAX_DIM are
    refused.
    """
    if H.dimension > UNITARY_MAX_DIM:
        raise ModelError(f"dimension {H.dimension} exceeds {UNITARY_MAX_DIM}")
    H.require_hermitian("Hamiltonian")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ModelError("initial state is not normalized")

    evals, vecs = scipy.linalg.eigh(H.to_dense())
    coef = vecs.conj().T @ psi0
    times = grid.times
    snapshots = []
    recorded = {name: [] for name in (observables or {})}
    for t in times:
        psi = vecs @ (np.exp(-1j * evals * (t - grid.t0)) * coef)
        snapshots.append(psi)
        for name, ob in (observables or {}).items():
            recorded[name].append(_measure_pure(ob, psi))
    traj = Trajectory(
        times=times,
        observables={k: np.array(v) for k, v in recorded.items()},
        snapshots=snapshots,
        diagnostics={"norm_drift": float(max(abs(np.linalg.norm(s) - 1.0) for s in snapshots))},
    )
    return traj


def _measure_pure(ob, psi):
    if callable(ob):
        return float(ob(pure_density(psi)))
    mat = ob.mat if isinstance(ob, SparseOperator) else ob
    return float(np.real(np.vdot(psi, mat @ psi)))


def _measure(ob, rho):
    if callable(ob):
        return float(ob(rho))
    mat = ob.mat if isinstance(ob, SparseOperator) else ob
    if sp.issparse(mat):
        return float(np.real((mat @ rho).diagonal().sum()))
    return float(np.real(np.trace(mat @ rho)))


def evolve_lindblad(
    H: SparseOperator,
    channels: Sequence[LindbladChannel],
    rho0: np.ndarray,
    grid: TimeGrid,
    dt: float | None = None,
    observables: dict | None = None,
    keep_snapshots: bool = False,
    positivity_checks: int = 10,
) -> Trajectory:
    """Fixed-step 4th-order integration of the master equation.

    The step is clipped to divide each sample interval evenly. Hermiticity is
    repaired by symmetrization after every step; the pre-repair drift is
    tracked and reported in the diagnostics together with the trace drift and
    sampled minimum eigenvalues.
    """
    H.require_hermitian("Hamiltonian")
    rho = np.array(rho0, dtype=complex)
    check_density(rho)
    dt_max = stability_dt(H, channels)
    if dt is None:
        dt = dt_max
    elif dt > dt_max:
        raise StabilityError(dt, dt_max)

    rhs = lindblad_rhs(H, channels)
    times = grid.times
    interval = grid.dt_sample
    n_sub = max(1, int(np.ceil(interval / dt - 1e-12)))
    h = interval / n_sub

    recorded = {name: [] for name in (observables or {})}
    snapshots = [rho.copy()] if keep_snapshots else None
    trace_drift = 0.0
    herm_drift = 0.0
    min_eigs = []
    check_at = set(
        np.linspace(0, grid.samples, min(positivity_checks, grid.samples + 1), dtype=int)
    ) if positivity_checks else set()

    def record(k, rho_k):
        for name, ob in (observables or {}).items():
            recorded[name].append(_measure(ob, rho_k))
        if keep_snapshots and k > 0:
            snapshots.append(rho_k.copy())
        if k in check_at:
            min_eigs.append(float(np.min(scipy.linalg.eigvalsh(rho_k))))

    record(0, rho)
    for k in range(1, len(times)):
        for _ in range(n_sub):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * h * k1)
            k3 = rhs(rho + 0.5 * h * k2)
            k4 = rhs(rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            herm_drift = max(herm_drift, float(np.max(np.abs(rho - rho.conj().T))))
            rho = 0.5 * (rho + rho.conj().T)
        trace_drift = max(trace_drift, abs(float(np.trace(rho).real) - 1.0))
        record(k, rho)

    return Trajectory(
        times=times,
        observables={k: np.array(v) for k, v in recorded.items()},
        snapshots=snapshots,
        diagnostics={
            "trace_drift": trace_drift,
            "hermiticity_drift": herm_drift,
            "min_eigenvalue": min(min_eigs) if min_eigs else None,
            "dt": h,
            "steps": n_sub * grid.samples,
            "integrator": "rk4",
        },
    )


def evolve_lindblad_exact(
    H: SparseOperator,
    channels: Sequence[LindbladChannel],
    rho0: np.ndarray,
    grid: TimeGrid,
    observables: dict | None = None,
    keep_snapshots: bool = False,
    positivity_checks: int = 10,
    max_dim: int = EXACT_MAX_DIM,
) -> Trajectory:
    """Exact evolution by repeated application of expm(L * dt_sample).

    Insensitive to rate stiffness; restricted to small dimensions because the
    dense Liouvillian has (D^2)^2 entries.
    """
    if H.dimension > max_dim:
        raise ModelError(
            f"dense Liouvillian evolver limited to D <= {max_dim}, got {H.dimension}"
        )
    H.require_hermitian("Hamiltonian")
    rho = np.array(rho0, dtype=complex)
    check_density(rho)
    L = liouvillian(H, channels, dense=True)
    step = scipy.linalg.expm(L * grid.dt_sample)
    return _propagate_vectorized(
        lambda v: step @ v, H.dimension, rho, grid, observables, keep_snapshots, positivity_checks, "expm-dense"
    )


def evolve_lindblad_action(
    H: SparseOperator,
    channels: Sequence[LindbladChannel],
    rho0: np.ndarray,
    grid: TimeGrid,
    observables: dict | None = None,
    keep_snapshots: bool = False,
    positivity_checks: int = 10,
) -> Trajectory:
    """Exact exponential action of the sparse Liouvillian per sample interval."""
    H.require_hermitian("Hamiltonian")
    rho = np.array(rho0, dtype=complex)
    check_density(rho)
    L = liouvillian(H, channels, dense=False)
    op = scipy.sparse.linalg.expm_multiply

    def stepper(v):
        return op(L, v, start=0.0, stop=grid.dt_sample, num=2, endpoint=True)[-1]

    return _propagate_vectorized(
        stepper, H.dimension, rho, grid, observables, keep_snapshots, positivity_checks, "expm-action"
    )


def _propagate_vectorized(step, d, rho, grid, observables, keep_snapshots, positivity_checks, tag):
    times = grid.times
    recorded = {name: [] for name in (observables or {})}
    snapshots = [rho.copy()] if keep_snapshots else None
    trace_drift = 0.0
    min_eigs = []
    check_at = set(
        np.linspace(0, grid.samples, min(positivity_checks, grid.samples + 1), dtype=int)
    ) if positivity_checks else set()

    vec = rho.flatten(order="F")
    for k in range(len(times)):
        if k > 0:
            vec = step(vec)
        rho_k = vec.reshape((d, d), order="F")
        rho_k = 0.5 * (rho_k + rho_k.conj().T)
        trace_drift = max(trace_drift, abs(float(np.trace(rho_k).real) - 1.0))
        for name, ob in (observables or {}).items():
            recorded[name].append(_measure(ob, rho_k))
        if keep_snapshots and k > 0:
            snapshots.append(rho_k.copy())
        if k in check_at:
            min_eigs.append(float(np.min(scipy.linalg.eigvalsh(rho_k))))
    return Trajectory(
        times=times,
        observables={k: np.array(v) for k, v in recorded.items()},
        snapshots=snapshots,
        diagnostics={
            "trace_drift": trace_drift,
            "hermiticity_drift": 0.0,
            "min_eigenvalue": min(min_eigs) if min_eigs else None,
            "dt": grid.dt_sample,
            "steps": grid.samples,
            "integrator": tag,
        },
    )
