"""Exception hierarchy shared by every module."""


class DualRecError(Exception):
    """Base class for all package errors."""


class ZeroVector(DualRecError, ValueError):
    """A vector that had to be projected onto the sphere has (near) zero norm."""

    def __init__(self, message="cannot project a zero vector", index=None):
        if index is not None:
            message = f"{message} (index {index})"
        super().__init__(message)
        self.index = index


class DimensionMismatch(DualRecError, ValueError):
    pass


class DegenerateTail(DualRecError, ValueError):
    """The free (non-fixed) part of a user vector vanished."""


class KTooLarge(DualRecError, ValueError):
    pass


class NeedTwoCreators(DualRecError, ValueError):
    pass


class OracleViolation(DualRecError, AssertionError):
    """A numerical oracle found an instance that breaks the checked inequality."""

    def __init__(self, message, instance=None):
        super().__init__(message)
        self.instance = instance


class FileFormat(DualRecError, ValueError):
    pass


class CountMismatch(FileFormat):
    pass


class ParseError(DualRecError, ValueError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class ValidationError(DualRecError, ValueError):
    def __init__(self, message, constraint=None):
        if constraint is not None:
            message = f"{message} [{constraint}]"
        super().__init__(message)
        self.constraint = constraint
