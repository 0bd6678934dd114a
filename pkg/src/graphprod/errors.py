"""Exception hierarchy shared by all modules."""


class GraphProdError(Exception):
    """Base class; ``code`` is the machine-readable name used by the CLI."""

    @property
    def code(self) -> str:
        return type(self).__name__


class LimitExceeded(GraphProdError):
    pass


class InvalidSyllable(GraphProdError):
    pass


class InvalidGroupSpec(GraphProdError):
    pass


class MixedAmbient(GraphProdError):
    pass


class NotInStar(GraphProdError):
    pass


class EmptyLink(GraphProdError):
    pass


class NoOrthogonal(GraphProdError):
    pass


class NodeLimitExceeded(GraphProdError):
    pass


class InvalidFamily(GraphProdError):
    pass


class OutOfBall(GraphProdError):
    pass


class BudgetExceeded(GraphProdError):
    pass


class EmptyRegion(GraphProdError):
    pass


class PreconditionFailed(GraphProdError):
    pass


class WindowViolation(GraphProdError):
    pass


class NoSamples(GraphProdError):
    pass


class ConfigError(GraphProdError):
    pass


class ParseError(GraphProdError):
    pass
