"""Exception types raised across the package."""


class GacError(Exception):
    """Base class for all errors raised by graphgac."""


class EmptyInputError(GacError, ValueError):
    pass


class DuplicatePointError(GacError, ValueError):
    def __init__(self, i: int, j: int, point):
        self.pair = (i, j)
        super().__init__(f"vertices {i} and {j} share the position ({point[0]!r}, {point[1]!r})")


class DegenerateInputError(GacError, ValueError):
    pass


class FieldMismatchError(GacError, ValueError):
    pass


class ConfigError(GacError, ValueError):
    pass


class PgmFormatError(GacError, ValueError):
    pass


class DivergenceError(GacError, ArithmeticError):
    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(f"embedding function became non-finite at iteration {iteration}")
