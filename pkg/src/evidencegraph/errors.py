"""Exception hierarchy shared across the package."""


class EvidenceGraphError(Exception):
    """Base class for all errors raised by this package."""


class UnknownEntityError(EvidenceGraphError, KeyError):
    """A graph operation was given an entity id that is not in the graph."""


class TransportError(EvidenceGraphError):
    """A SPARQL request failed after exhausting retries."""


class CacheMissError(EvidenceGraphError):
    """Replay mode was asked for a request that was never recorded."""


class ResponseParseError(EvidenceGraphError):
    """A SPARQL response body could not be interpreted."""


class VectorFormatError(EvidenceGraphError):
    """A word-vector file line did not match the expected format."""


class UnembeddableSentenceError(EvidenceGraphError):
    """No token of the sentence is covered by the embedding table."""


class EmptyCorpusError(EvidenceGraphError):
    """Topic modelling was asked to train on an empty corpus or vocabulary."""


class SingleClassDatasetError(EvidenceGraphError):
    """Classifier training needs both labels present in the dataset."""


class ConfigError(EvidenceGraphError):
    """A pipeline configuration file is missing or inconsistent."""
