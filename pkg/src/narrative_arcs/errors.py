"""Exception types raised across the pipeline.

Validation problems (bad config, malformed inputs) derive from
``ValidationError``; the CLI maps those to exit code 1 and everything else
to exit code 2.
"""


class ArcsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ArcsError):
    """Input or configuration failed validation."""


# corpus preparation

class InvalidCorpusId(ValidationError):
    pass


class InvalidEncoding(ValidationError):
    pass


# lexicons and scoring

class LexiconError(ValidationError):
    pass


class DuplicateToken(LexiconError):
    def __init__(self, token):
        super().__init__(f"duplicate lexicon token {token!r}")
        self.token = token


class NonFiniteValence(LexiconError):
    def __init__(self, line):
        super().__init__(f"non-finite or unparsable valence on line {line}")
        self.line = line


class EmptyLexicon(LexiconError):
    pass


class MissingData(ArcsError):
    """An optional data file (lexicon, corpus) has not been downloaded."""


class RuleSetError(ValidationError):
    pass


class EmptyCorpus(ValidationError):
    pass


class ExternalScoresError(ValidationError):
    pass


class MissingIndex(ExternalScoresError):
    def __init__(self, model, index):
        super().__init__(f"model {model!r} has no score for segment {index}")
        self.model = model
        self.index = index


class DuplicateIndex(ExternalScoresError):
    def __init__(self, model, index):
        super().__init__(f"model {model!r} has more than one score for segment {index}")
        self.model = model
        self.index = index


class NonFiniteScore(ExternalScoresError):
    pass


class LengthMismatch(ValidationError):
    """Series or arcs that must share a length do not."""


# arcs

class ConstantSeries(ArcsError):
    pass


class TooShort(ArcsError):
    pass


class ThresholdTooSmall(ValidationError):
    pass


class ThresholdExceedsLength(ArcsError):
    pass


class TooFewArcs(ArcsError):
    pass


class StageError(ArcsError):
    pass


# similarity and metrics

class EmptyArc(ArcsError):
    pass


class AllExactMatch(ArcsError):
    pass


class EmptyFamily(ArcsError):
    pass


# configuration

class ConfigError(ValidationError):
    pass


class UnknownScorer(ConfigError):
    pass


class BadFraction(ConfigError):
    pass


class BadThreshold(ConfigError):
    pass
