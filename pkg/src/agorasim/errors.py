"""Exception hierarchy shared across the simulator."""


class AgoraError(Exception):
    """Base class for all simulator errors."""


class ConfigError(AgoraError):
    """Bad or inconsistent configuration."""


class MissingData(AgoraError):
    """A required input file or record is absent."""


class SettlementFault(AgoraError):
    """A settlement would drive a balance negative; indicates a matching bug."""


class MissingConstituent(AgoraError):
    """Index valuation requested without a price for every constituent."""


class UnknownUser(AgoraError):
    pass


class UnknownPost(AgoraError):
    pass


class CycleDetected(AgoraError):
    """A repost chain revisits a node; the post store is corrupt."""


class EmptyTemplate(AgoraError):
    """Transaction synthesis template has no trades to mirror."""


class PolicyFailure(AgoraError):
    """A decision policy produced malformed output; the agent holds today."""


class ServiceUnavailable(PolicyFailure):
    """The chat completion backend could not be reached."""


class SchemaViolation(PolicyFailure):
    """A chat completion response did not match the expected schema."""


class TooFewSamples(AgoraError):
    pass


class ZeroVariance(AgoraError):
    pass


class AllZero(AgoraError):
    pass


class LengthMismatch(AgoraError):
    pass


class NoBuys(AgoraError):
    """Sell/buy ratio undefined without at least one buy."""


class ParameterDomain(AgoraError):
    """A baseline generator parameter is outside its valid domain."""
