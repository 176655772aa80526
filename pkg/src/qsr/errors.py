"""Exception hierarchy shared across the package."""


class QsrError(Exception):
    """Base class for every error raised by qsr."""


class TopologyError(QsrError):
    pass


class ParseError(TopologyError):
    """The document could not be parsed or has the wrong shape."""


class ValidationError(TopologyError):
    """The document parsed but violates a network or request invariant."""


class UnreachableError(QsrError):
    def __init__(self, u, v):
        super().__init__(f"node {v!r} is unreachable from {u!r}")
        self.pair = (u, v)


class MissingPairError(QsrError, KeyError):
    def __init__(self, u, v):
        super().__init__(f"intra-segment table has no entry for pair ({u!r}, {v!r})")
        self.pair = (u, v)

    def __str__(self):
        return self.args[0]


class NoSuchLinkError(QsrError, KeyError):
    def __str__(self):
        return self.args[0]


class EnumerationTooLarge(QsrError):
    pass


class SolverError(QsrError):
    pass


class NumericalFailure(SolverError):
    pass


class PhaseLimitExceeded(SolverError):
    pass
