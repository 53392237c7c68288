"""Exception types shared across the package."""


class SdlError(Exception):
    pass


class InvalidInput(SdlError, ValueError):
    """An argument violates a documented precondition."""


class SingularMatrix(SdlError, ArithmeticError):
    """A matrix that must be (safely) invertible is numerically singular."""


class Infeasible(SdlError):
    """A linear program has an empty feasible region."""


class Unbounded(SdlError):
    """A linear program is unbounded below."""


class NumericalFailure(SdlError):
    """An iterative routine exhausted its safeguards without converging."""


class ParseError(SdlError, ValueError):
    """A matrix file is malformed; the message carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
