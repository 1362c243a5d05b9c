"""Exception taxonomy shared across the package.

The CLI maps these onto stable exit codes, so new failure modes should
subclass one of the groups below rather than raising bare exceptions.
"""

from __future__ import annotations


class ConfigError(Exception):
    """Bad configuration, missing inputs, or precondition violations."""


class MissingSlot(ConfigError):
    def __init__(self, name: str):
        super().__init__(f"question template slot not filled: {name!r}")
        self.name = name


class UnknownCategory(ConfigError):
    pass


class CompositionMismatch(ConfigError):
    pass


class EmptyText(ConfigError):
    pass


class SequenceTooLong(ConfigError):
    pass


class EmptyCorpus(ConfigError):
    pass


class EmptyEvalSet(ConfigError):
    pass


class EmptyPositives(ConfigError):
    pass


class NoPositives(ConfigError):
    """A class with no positive items; its AP is undefined."""


class ClientError(Exception):
    """LLM client failure after retries were exhausted."""


class EmptyAnswer(ClientError):
    """The LLM answer parsed to zero items."""


class UnparseableAnswer(ClientError):
    """The LLM answer does not sufficiently overlap the candidates given."""


class NumericError(Exception):
    """Non-finite values where finite ones are required."""


class NonFiniteLoss(NumericError):
    pass


class NonFiniteValue(NumericError):
    pass


class DegenerateFeature(NumericError):
    """A feature vector with near-zero norm where a direction is needed."""


class IoError(Exception):
    """File level read/write failures."""


class FormatError(IoError):
    """Malformed file contents; carries a line number or byte offset."""

    def __init__(self, message: str, *, line: int | None = None,
                 offset: int | None = None):
        where = ""
        if line is not None:
            where = f" (line {line})"
        elif offset is not None:
            where = f" (byte offset {offset})"
        super().__init__(message + where)
        self.line = line
        self.offset = offset
