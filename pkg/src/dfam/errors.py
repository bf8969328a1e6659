"""Error taxonomy shared by the library and the CLI.

Every error carries a distinct exit code so shell callers can branch on
failure category without parsing messages.
"""


class DfamError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class BadConfig(DfamError):
    exit_code = 2


class BadFilterLength(DfamError):
    exit_code = 3


class InsufficientSamples(DfamError):
    exit_code = 4


class BadWindowSize(DfamError):
    exit_code = 5


class BadBinCount(DfamError):
    exit_code = 6


class NegativeFrequency(DfamError):
    exit_code = 7


class MisalignedWindows(DfamError):
    exit_code = 8


class MissingStream(DfamError):
    exit_code = 9


class EmptyActivity(DfamError):
    exit_code = 10


class ConfigMismatch(DfamError):
    exit_code = 11


class ShapeMismatch(DfamError):
    exit_code = 12


class EmptyModel(DfamError):
    exit_code = 13


class CorruptModel(DfamError):
    exit_code = 14


class IoFailure(DfamError):
    exit_code = 15


class DegenerateWindow(DfamError):
    exit_code = 16


class DegenerateTrainingSet(DfamError):
    exit_code = 17


class NotFitted(DfamError):
    exit_code = 18


class DimensionMismatch(DfamError):
    exit_code = 19


class BadFoldCount(DfamError):
    exit_code = 20


class SingleSubject(DfamError):
    exit_code = 21


class FoldTrainingFailure(DfamError):
    exit_code = 22


class WindowSizeMismatch(DfamError):
    exit_code = 23


def exit_code_table():
    """Map error class name -> exit code, for --help output."""
    table = {"DfamError": DfamError.exit_code}
    for cls in DfamError.__subclasses__():
        table[cls.__name__] = cls.exit_code
    return dict(sorted(table.items(), key=lambda kv: kv[1]))
