"""Exception types shared across the library."""


class MatchlabError(Exception):
    """Base class for all library errors."""


class DuplicateEntry(MatchlabError):
    """A preference list mentions the same partner twice."""

    def __init__(self, side: str, index: int, partner: int):
        self.side, self.index, self.partner = side, index, partner
        super().__init__(f"{side} {index}: duplicate entry {partner} in preference list")


class MissingPartner(MatchlabError):
    """A preference list does not cover the full opposite side."""

    def __init__(self, side: str, index: int, partner: int):
        self.side, self.index, self.partner = side, index, partner
        super().__init__(f"{side} {index}: preference list is missing partner {partner}")


class ValueOrderMismatch(MatchlabError):
    """Cardinal values disagree with the ordinal ranking."""

    def __init__(self, side: str, index: int):
        self.side, self.index = side, index
        super().__init__(f"{side} {index}: cardinal values do not agree with ordinal ranking")


class NotABlockingPair(MatchlabError):
    pass


class CapExceeded(MatchlabError):
    """An exhaustive operation would exceed its configured size cap."""


class FirmUnmatched(MatchlabError):
    pass


class InputNotStable(MatchlabError):
    pass


class BreakmarriageUnsuccessful(MatchlabError):
    pass


class SizeMismatch(MatchlabError):
    pass


class FullSizeSubset(MatchlabError):
    pass


class ImbalancedMarket(MatchlabError):
    """Fragment machinery is defined for balanced markets only."""


class PremiseViolated(MatchlabError):
    pass


class NotUniqueStable(MatchlabError):
    pass


class PreconditionFailed(MatchlabError):
    """Names the violated clause of a construction's contract."""


class MissingCardinalValues(MatchlabError):
    pass


class StarConditionViolated(MatchlabError):
    """No unmatched non-exception agent exists at the given matching."""


class DomainError(MatchlabError):
    pass


class StateNotFound(MatchlabError):
    pass


class SingularSystem(MatchlabError):
    """Absorbing-chain solve failed; signals a malformed transition graph."""


class EtaMarketNotFound(MatchlabError):
    """Verified search exhausted its budget without a passing market."""


class FormatError(MatchlabError):
    """Malformed market/matching text input."""


class ConfigError(MatchlabError):
    """Invalid experiment configuration (CLI exit code 2)."""
