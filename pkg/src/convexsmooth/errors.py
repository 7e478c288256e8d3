"""Exception types shared across the package."""


class ConvexModelError(Exception):
    """Base class for all library errors."""


class ParseError(ConvexModelError):
    """Expression text does not conform to the grammar.

    Carries the 0-based character position of the offending token.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"syntax error at position {position}: {message}")
        self.position = position


class ConvexityRuleError(ConvexModelError):
    """An expression node violates the structural convexity ruleset."""

    def __init__(self, node: str, rule: str):
        super().__init__(f"convexity rule violation at node '{node}': {rule}")
        self.node = node
        self.rule = rule


class DomainCompatibilityError(ConvexModelError):
    """Expression and domain do not fit together (dimension, certificates)."""


class DomainError(ConvexModelError):
    """A point lies outside the open domain it is evaluated on."""


class UnboundedLipschitzError(ConvexModelError):
    """No finite Lipschitz bound exists (or is certifiable) on the region."""


class EnvelopeUnboundedError(ConvexModelError):
    """An infimal-convolution objective could not be certified bounded below."""


class StratumOverflowError(ConvexModelError):
    """The evaluation point needs a Lipschitz stratum beyond max_stratum."""

    def __init__(self, message: str, needed: int, max_stratum: int):
        super().__init__(message)
        self.needed = needed
        self.max_stratum = max_stratum


class AccuracyWarning(RuntimeWarning):
    """An inner solve stopped before reaching the requested tolerance."""
