"""Exception hierarchy.

``DataError`` subclasses describe problems with user-supplied inputs (files,
feature names, URLs); the CLI maps them to exit code 2.
"""


class PhishsenseError(Exception):
    pass


class DataError(PhishsenseError, ValueError):
    pass


class EmptyFile(DataError):
    pass


class MissingClassColumn(DataError):
    def __init__(self, column):
        super().__init__(f"class column {column!r} not found in header")
        self.column = column


class RowArityMismatch(DataError):
    def __init__(self, row, expected=None, got=None):
        msg = f"row {row} has the wrong number of columns"
        if expected is not None:
            msg += f" (expected {expected}, got {got})"
        super().__init__(msg)
        self.row = row


class UnparsableValue(DataError):
    def __init__(self, row, column, value=None):
        super().__init__(f"cannot parse {value!r} at row {row}, column {column!r}")
        self.row = row
        self.column = column


class UnknownLabel(DataError):
    def __init__(self, row, value):
        super().__init__(f"row {row}: class value {value!r} is neither positive nor negative")
        self.row = row


class UnknownFeature(DataError, KeyError):
    def __init__(self, name):
        super().__init__(f"unknown feature {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]


class TooFewRowsPerClass(DataError):
    pass


class EmptyDataset(DataError):
    pass


class SingleClassDataset(DataError):
    pass


class EmptyInput(DataError):
    pass


class EmptyEvaluation(DataError):
    pass


class KOutOfRange(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class ArityMismatch(DataError):
    pass


class LabelOutOfRange(DataError, IndexError):
    pass


class ModelFormatError(DataError):
    pass


class UrlError(DataError):
    pass


class MissingScheme(UrlError):
    pass


class EmptyHost(UrlError):
    pass


class IllegalCharacter(UrlError):
    def __init__(self, position, char):
        super().__init__(f"illegal character {char!r} at position {position}")
        self.position = position
