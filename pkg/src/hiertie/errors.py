"""Exception hierarchy shared by every hiertie module."""


class HierTieError(Exception):
    """Base class for all library errors."""


class EmptySpan(HierTieError, ValueError):
    pass


class TooManySlots(HierTieError, ValueError):
    pass


class RootInactive(HierTieError, ValueError):
    pass


class EmptyGraph(HierTieError, ValueError):
    pass


class QueryIsolated(HierTieError, ValueError):
    pass


class InvalidThreshold(HierTieError, ValueError):
    pass


class MissingTruth(HierTieError, KeyError):
    def __init__(self, offenders):
        self.offenders = list(offenders)
        super().__init__(f"queries without ground truth: {self.offenders}")

    def __str__(self):
        return self.args[0]


class IncomparableCurves(HierTieError, ValueError):
    pass


class ParseError(HierTieError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInput(HierTieError, ValueError):
    pass


class UnknownActor(HierTieError, KeyError):
    def __init__(self, labels):
        self.labels = sorted(labels)
        super().__init__(f"labels absent from edge data: {self.labels}")

    def __str__(self):
        return self.args[0]


class DegenerateConfig(HierTieError, ValueError):
    pass


class ConfigError(HierTieError, ValueError):
    """Invalid run configuration (bad flag value, missing file, ...)."""
