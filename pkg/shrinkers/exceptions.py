from django.core.exceptions import ValidationError


class ShrinkerError(ValidationError):
    """Base class for every failure raised by the shrinker laboratory."""

    def __init__(self, message, code=None, params=None, **details):
        super().__init__(message, code=code, params=params)
        self.details = details

    def __str__(self):
        return '; '.join(self.messages)


class DomainError(ShrinkerError):
    """A point outside the open quadrant was handed to a singular formula."""


class OutOfSpanError(ShrinkerError):
    pass


class StepSizeCollapse(ShrinkerError):
    """The adaptive step fell below the floor without any event firing."""


class ClassificationError(ShrinkerError):
    pass


class NoSignChange(ShrinkerError):
    pass


class NonConvergence(ShrinkerError):
    pass


class SeamMismatch(ShrinkerError):
    pass


class NotOrthogonal(ShrinkerError):
    pass


class DegenerateSegment(ShrinkerError):
    pass


class ProfileError(ShrinkerError):
    """A closed profile failed one of its certificates."""


class SchemaError(ShrinkerError):
    pass
