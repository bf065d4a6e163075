"""Exception types shared across the package."""


class CavityChemError(Exception):
    """Base class for all package-specific errors."""


class ModelError(CavityChemError, ValueError):
    """Raised when a model is assembled from inconsistent ingredients."""


class BasisError(CavityChemError, ValueError):
    """Raised for invalid basis states or empty state spaces."""


class StabilityError(CavityChemError, RuntimeError):
    """Raised when a requested integrator step violates the stability bound.

    Carries the largest admissible step so callers can retry.
    """

    def __init__(self, dt: float, dt_max: float):
        self.dt = dt
        self.dt_max = dt_max
        super().__init__(
            f"step dt={dt:.3e} exceeds the stability bound {dt_max:.3e}; "
            f"rerun with dt <= {dt_max:.3e}"
        )


class ScenarioError(CavityChemError, ValueError):
    """Raised for unknown scenario ids or invalid scenario configuration."""
