"""Exception types shared across the package."""


class CCTSNEError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CCTSNEError):
    pass


class NotRowStochastic(CCTSNEError):
    def __init__(self, row: int, row_sum: float):
        self.row = row
        self.row_sum = row_sum
        super().__init__(f"row {row} sums to {row_sum!r}, expected 1 within 1e-6")


class NonFiniteValue(CCTSNEError):
    pass


class InvalidSize(CCTSNEError):
    pass


class InvalidHyperparam(CCTSNEError):
    pass


class CalibrationFailed(CCTSNEError):
    def __init__(self, row: int, detail: str = "could not bracket bandwidth"):
        self.row = row
        super().__init__(f"bandwidth calibration failed at row {row}: {detail}")


class NonFiniteUpdate(CCTSNEError):
    def __init__(self, iteration: int):
        self.iteration = iteration
        super().__init__(
            f"non-finite position at iteration {iteration}; learning rate likely too large"
        )


class InvalidK(CCTSNEError):
    pass


class SingleClass(CCTSNEError):
    pass


class SingleClassTrainingSet(CCTSNEError):
    pass


class EmptySet(CCTSNEError):
    pass


class ParseError(CCTSNEError):
    def __init__(self, line: int, detail: str):
        self.line = line
        super().__init__(f"line {line}: {detail}")


class EmptyFile(CCTSNEError):
    pass
