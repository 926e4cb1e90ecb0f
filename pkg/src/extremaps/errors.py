"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (bad shapes, non-finite entries, ...)."""


class NotCompletelyPositive(InputError):
    """A Choi matrix that is not positive semi-definite.

    ``min_eigenvalue`` carries the most negative eigenvalue found.
    """

    def __init__(self, min_eigenvalue: float, message: str | None = None):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(message or f"Choi matrix is not psd (min eigenvalue {self.min_eigenvalue:.3e})")


class ModeError(InputError):
    """A certificate was requested for a channel that fails the mode's precondition."""

    def __init__(self, predicate: str, residual: float | None = None):
        self.predicate = predicate
        self.residual = residual
        msg = f"channel is not {predicate}"
        if residual is not None:
            msg += f" (residual {residual:.3e})"
        super().__init__(msg)


class NotBallPositive(InputError):
    """An affine map that does not send the closed unit ball into itself."""

    def __init__(self, max_norm: float):
        self.max_norm = float(max_norm)
        super().__init__(f"map leaves the unit ball: max norm on sphere is {self.max_norm:.12g}")
