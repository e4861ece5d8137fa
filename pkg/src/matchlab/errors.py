"""Exception hierarchy shared by the library and the command-line tool."""


class MatchlabError(Exception):
    """Base class for all library errors."""


class StrictnessError(MatchlabError, ValueError):
    """An agent is indifferent between two partners, or values a partner at exactly zero."""


class PreferenceError(MatchlabError, ValueError):
    """A preference list is malformed (duplicates, unknown agents)."""


class SizeBoundError(MatchlabError):
    """A brute-force routine was asked to run beyond its size bound."""


class BudgetExceededError(MatchlabError):
    """A profile sweep would visit more profiles than the configured budget."""


class NotUniquelyStableError(MatchlabError):
    """A state market does not have a unique stable matching."""


class ConstructionError(MatchlabError):
    """A generated economy failed one of its construction-time assertions."""


class SchemaError(MatchlabError, ValueError):
    """An economy or profile file does not follow the documented schema."""
