"""Exception types shared across the toolkit."""


class DiracObstructionError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(DiracObstructionError):
    """Malformed or out-of-contract input (bad matrix, bad indices, bad file)."""


class ContextMismatchError(ValidationError):
    """Two cohomology classes living in different exterior algebras were combined."""


class BoundaryAmbiguityError(DiracObstructionError):
    """An eigenvalue sits too close to the edge of the counting window.

    The open-interval eigenvalue count is numerically unstable in that
    situation; the caller must perturb the window radius and retry.
    """


class RefinementRequiredError(DiracObstructionError):
    """A path step moves the operator farther than the crossing guard allows."""


class EndpointDegeneracyError(DiracObstructionError):
    """An open path endpoint has spectrum inside the guard interval around zero."""
