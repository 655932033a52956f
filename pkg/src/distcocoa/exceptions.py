"""Exception hierarchy; every error raised by the package derives from CocoaError."""


class CocoaError(Exception):
    pass


class ParseError(CocoaError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class EmptyDatasetError(CocoaError, ValueError):
    def __init__(self, message="empty dataset"):
        super().__init__(message)


class ZeroDataError(CocoaError, ValueError):
    def __init__(self, message="zero data"):
        super().__init__(message)


class ConfigError(CocoaError, ValueError):
    pass


class ConvergenceError(CocoaError, RuntimeError):
    """An iterative solve hit its cap; ``gap`` carries the last certificate."""

    def __init__(self, message, gap):
        self.gap = gap
        super().__init__(f"{message} (last gap {gap:.3e})")


class DivergenceError(CocoaError, RuntimeError):
    pass


class RoundAbortedError(CocoaError, RuntimeError):
    def __init__(self, round_, worker, cause):
        self.round = round_
        self.worker = worker
        super().__init__(f"round {round_} aborted: worker {worker} failed: {cause!r}")
