"""Exception hierarchy shared by the whole package.

Every error derives from :class:`RotavatError` so that callers (the CLI in
particular) can map whole families onto exit codes.
"""


class RotavatError(Exception):
    """Base class for all package errors."""


class DomainError(RotavatError):
    """Degenerate geometric input. CLI exit code 3."""


class DegenerateDepth(DomainError):
    pass


class HorizonDegenerate(DomainError):
    pass


class ParallelLines(DomainError):
    pass


class MissingJoint(DomainError):
    pass


class EmptyInput(DomainError):
    pass


class AllDegenerate(DomainError):
    pass


class DegenerateConfiguration(DomainError):
    pass


class ShapeMismatch(DomainError):
    pass


class UnmatchedPerson(DomainError):
    pass


class MissingCamera(DomainError):
    pass


class AlignmentError(DomainError):
    """A RotAvat phase failed. ``phase`` is one of "input", "i", "ii", "iii"."""

    def __init__(self, message, phase="input"):
        super().__init__(message)
        self.phase = phase

    def __str__(self):
        return f"phase ({self.phase}): {super().__str__()}"


class FootAtCameraHeight(AlignmentError):
    pass


class DegeneratePlane(AlignmentError):
    pass


class VerticalProjectionNull(AlignmentError):
    pass


class HeadRayParallel(AlignmentError):
    pass


class NegativeScale(AlignmentError):
    pass


class SchemaError(RotavatError):
    """Malformed scene/config document. CLI exit code 2."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class UnitError(SchemaError):
    pass
