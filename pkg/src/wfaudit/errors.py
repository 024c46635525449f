"""Exception types shared across the audit pipeline."""


class WfauditError(Exception):
    """Base class for all library errors."""


class MissingColumn(WfauditError):
    def __init__(self, name: str):
        super().__init__(f"required column not found: {name!r}")
        self.name = name


class ParseError(WfauditError):
    def __init__(self, row: int, column: str, reason: str):
        super().__init__(f"row {row}, column {column!r}: {reason}")
        self.row = row
        self.column = column
        self.reason = reason


class EmptyLog(WfauditError):
    pass


class DegenerateSplit(WfauditError):
    pass


class MissingAttribute(WfauditError):
    def __init__(self, attr: str, case_id: str):
        super().__init__(f"case {case_id!r} lacks attribute {attr!r} and no default is configured")
        self.attr = attr
        self.case_id = case_id


class UnknownState(WfauditError):
    pass


class LengthMismatch(WfauditError):
    pass


class AbstractionMismatch(WfauditError):
    pass


class NonterminatingProcess(WfauditError):
    pass
