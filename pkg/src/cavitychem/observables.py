"""Scalar diagnostics over states and trajectories.

Includes the association degree a(t) = sum_Phi xi(Phi) <Phi|rho|Phi> for a
0/1 classifier xi over basis configurations, projector populations, the
closed-form two-component Rabi amplitudes, the commensurability classifier
for the frequency/coupling ratio governing exact spatial jumps, and the
numerically computed manifold of stationary dark states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .dynamics import LindbladChannel, Trajectory
from .errors import ModelError
from .operators import SparseOperator
from .statespace import BasisState, StateSpace

__all__ = [
    "AssociationClassifier",
    "association_degree",
    "population",
    "expectation",
    "rabi_reference",
    "JumpClassification",
    "jump_commensurability",
    "transformation_probability",
    "stationary_dark_states",
    "stationary_dark_projector",
]


@dataclass
class AssociationClassifier:
    """0/1 classifier over the full basis; weights[i] = xi(basis[i])."""

    weights: np.ndarray
    label: str = "association"

    @classmethod
    def from_predicate(cls, space: StateSpace, predicate: Callable[[BasisState], bool], label="association"):
        w = np.array([1.0 if predicate(s) else 0.0 for s in space.basis])
        return cls(weights=w, label=label)

    def __call__(self, rho: np.ndarray) -> float:
        return association_degree(rho, self)


def association_degree(rho: np.ndarray, xi: AssociationClassifier) -> float:
    """Diagonal expectation of the classifier; lies in [0, 1] for a state."""
    diag = np.real(np.diagonal(rho))
    if len(diag) != len(xi.weights):
        raise ModelError("classifier length does not match the density matrix")
    return float(np.dot(xi.weights, diag))


def population(rho: np.ndarray, projector) -> float:
    """tr(P rho) for an idempotent Hermitian P; rejects non-projectors."""
    p = projector.to_dense() if isinstance(projector, SparseOperator) else np.asarray(projector)
    if np.max(np.abs(p - p.conj().T)) > 1e-10 or np.max(np.abs(p @ p - p)) > 1e-8:
        raise ModelError("population expects an idempotent Hermitian projector")
    return float(np.real(np.trace(p @ rho)))


def expectation(rho: np.ndarray, op) -> float:
    mat = op.to_dense() if isinstance(op, SparseOperator) else np.asarray(op)
    return float(np.real(np.trace(mat @ rho)))


def rabi_reference(omega: float, g: float, t: float) -> tuple[complex, complex]:
    """Closed-form amplitudes of the resonant single-excitation exchange.

    Starting from the excited atom and an empty mode,
    amp_dark  (atom excited, 0 photons) = exp(-i omega t) cos(g t)
    amp_bright (atom ground, 1 photon)  = -i exp(-i omega t) sin(g t).
    """
    phase = np.exp(-1j * omega * t)
    return phase * np.cos(g * t), -1j * phase * np.sin(g * t)


@dataclass(frozen=True)
class JumpClassification:
    kind: str  # "exact" or "approximate"
    witness: tuple | None = None  # (l, m) with ratio == (1+2l)/(2m) or 2l/(1+2m)

    def __bool__(self):
        return self.kind == "exact"


def jump_commensurability(ratio) -> JumpClassification:
    """Classify the frequency/coupling ratio for exact spatial jumps.

    A positive rational p/q (lowest terms) admits an exact jump iff it can be
    written as (1+2l)/(2m) or 2l/(1+2m), which holds exactly when p and q
    have opposite parity. Irrational or odd/odd ratios only admit arbitrarily
    good approximate jumps (recurrence argument), classified "approximate".
    """
    frac = _as_fraction(ratio)
    if frac is None:
        if ratio <= 0:
            raise ModelError("ratio must be positive")
        return JumpClassification("approximate")
    if frac <= 0:
        raise ModelError("ratio must be positive")
    p, q = frac.numerator, frac.denominator
    if p % 2 == 1 and q % 2 == 0:
        return JumpClassification("exact", ((p - 1) // 2, q // 2))
    if p % 2 == 0 and q % 2 == 1:
        return JumpClassification("exact", (p // 2, (q - 1) // 2))
    return JumpClassification("approximate")


def _as_fraction(ratio):
    if isinstance(ratio, Fraction):
        return ratio
    if isinstance(ratio, int):
        return Fraction(ratio, 1)
    if isinstance(ratio, tuple) and len(ratio) == 2:
        return Fraction(ratio[0], ratio[1])
    if isinstance(ratio, float):
        cand = Fraction(ratio).limit_denominator(10**6)
        if cand > 0 and abs(float(cand) - ratio) <= 1e-12 * max(1.0, abs(ratio)):
            return cand
        return None
    raise ModelError(f"unsupported ratio type {type(ratio)!r}")


def transformation_probability(trajectory: Trajectory, sink_name: str = "sink") -> float:
    """Final sink population of a trajectory; the sink must be absorbing,
    so the recorded series is nondecreasing up to integrator tolerance."""
    if sink_name not in trajectory.observables:
        raise ModelError(f"trajectory records no {sink_name!r} observable")
    series = trajectory.observables[sink_name]
    if np.any(np.diff(series) < -1e-8):
        raise ModelError("sink population decreased along the trajectory")
    return float(series[-1])


def stationary_dark_states(
    H: SparseOperator,
    channels: Sequence[LindbladChannel],
    tol: float = 1e-8,
) -> list[np.ndarray]:
    """Pure states stationary under the full generator.

    A pure stationary state must be an eigenvector of H annihilated by every
    collapse operator. Computed as the joint numerical kernel of the collapse
    operators, diagonalizing H restricted to it and keeping eigenvectors that
    H does not leak outside the kernel.
    """
    d = H.dimension
    gram = np.zeros((d, d), dtype=complex)
    for ch in channels:
        if ch.rate == 0:
            continue
        a = ch.operator.to_dense()
        gram += a.conj().T @ a
    if not channels or np.max(np.abs(gram)) == 0:
        kernel = np.eye(d, dtype=complex)
    else:
        evals, vecs = scipy.linalg.eigh(gram)
        scale = max(evals[-1], 1.0)
        kernel = vecs[:, evals < tol * scale]
    if kernel.shape[1] == 0:
        return []

    hd = H.to_dense()
    h_in = kernel.conj().T @ hd @ kernel
    evals, vecs = scipy.linalg.eigh(0.5 * (h_in + h_in.conj().T))
    out = []
    for k in range(vecs.shape[1]):
        v_full = kernel @ vecs[:, k]
        residual = np.linalg.norm(hd @ v_full - evals[k] * v_full)
        if residual <= tol * max(1.0, float(np.max(np.abs(hd)))):
            out.append(v_full)
    return out


def stationary_dark_projector(
    H: SparseOperator,
    channels: Sequence[LindbladChannel],
    tol: float = 1e-8,
) -> np.ndarray:
    """Orthogonal projector onto the span of all stationary dark states."""
    vecs = stationary_dark_states(H, channels, tol)
    d = H.dimension
    if not vecs:
        return np.zeros((d, d), dtype=complex)
    basis = np.column_stack(vecs)
    q, _r = np.linalg.qr(basis)
    return q @ q.conj().T
