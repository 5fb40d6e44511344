"""Exception hierarchy shared by every stage of the pipeline."""


class RnnDcorError(Exception):
    """Base class for all library errors."""


class UserInputError(RnnDcorError, ValueError):
    """Invalid parameters, configuration or data supplied by the caller."""


class NumericalError(RnnDcorError, ArithmeticError):
    """A computation produced non-finite or inconsistent numbers."""


# tsgen
class StationarityError(UserInputError):
    pass


class InvalidLength(UserInputError):
    pass


class GarchConstraintError(UserInputError):
    pass


class ParseError(UserInputError):
    pass


class NumericalInstabilityError(NumericalError):
    pass


# pipeline
class DegenerateSeriesError(UserInputError):
    pass


class InsufficientDataError(UserInputError):
    pass


# estat
class NonFiniteInputError(UserInputError):
    pass


class InvalidDistanceMatrixError(UserInputError):
    pass


class SampleCountMismatchError(UserInputError):
    pass


class InternalConsistencyError(NumericalError):
    pass


# rnn
class ShapeMismatchError(UserInputError):
    pass


class TrainingDivergedError(NumericalError):
    pass


# analysis
class DegenerateProfileError(UserInputError):
    pass


class AlignmentError(UserInputError):
    pass


class EmptyIntersection(AlignmentError):
    pass


class DegenerateTargetsError(UserInputError):
    pass
