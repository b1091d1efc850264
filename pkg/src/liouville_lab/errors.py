"""Exception hierarchy shared by all liouville_lab modules."""


class LiouvilleLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(LiouvilleLabError, ValueError):
    """A point or radius lies outside the admissible domain."""


class JointError(DomainError):
    """Evaluation requested too close to a piecewise joint.

    Use a one-sided evaluation (move the radius off the joint by more than
    the configured margin) instead.
    """


class SingularityError(DomainError):
    """Kernel evaluated on its diagonal (x == y)."""


class QuadratureError(LiouvilleLabError):
    """Quadrature did not reach the requested tolerance.

    ``estimate`` holds the best value obtained, ``error`` the achieved
    error estimate.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BlowupError(LiouvilleLabError):
    """e^u overflow guard triggered during integration."""

    def __init__(self, message, last_radius):
        super().__init__(message)
        self.last_radius = last_radius


class NoSolutionError(LiouvilleLabError):
    """Shooting found no bracket for the boundary value problem."""


class SolverError(LiouvilleLabError):
    """Linear or nonlinear solver failure."""


class InputError(LiouvilleLabError, ValueError):
    """Malformed or inconsistent input (sequences, configs, files)."""
