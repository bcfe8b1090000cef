"""Exception hierarchy shared across the toolkit."""


class CdcrError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CdcrError):
    """Input data violates a documented invariant (bad corpus, bad span, ...)."""


class FormatError(CdcrError):
    """A binary or text artifact does not conform to its file format."""


class SolverError(CdcrError):
    """A numerical solve failed (singular system, residual out of tolerance)."""


class TrainingDivergedError(CdcrError):
    """Training produced a non-finite loss; raised instead of continuing silently."""
