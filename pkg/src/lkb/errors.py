"""Exception types shared across the package."""


class LkbError(Exception):
    """Base class for all errors raised by this package."""


class DocumentDecodeError(LkbError):
    """Raw bytes are not valid UTF-8; the message names the failing byte offset."""


class EmptyDocumentError(LkbError):
    """Document content is empty after decoding and flattening."""


class DimensionMismatchError(LkbError):
    """Operands disagree on vector/matrix dimensions; the message names both."""


class NonFiniteVectorError(LkbError):
    """A vector contains NaN or infinite entries."""


class DuplicateIdError(LkbError):
    """An id was added to an index that already contains it."""


class UnknownIdError(LkbError):
    """An id was referenced that the index or store does not contain."""


class EmptyIndexError(LkbError):
    """A search was attempted against an index with no vectors."""


class IndexFormatError(LkbError):
    """A serialized index could not be parsed (bad magic or truncation)."""


class UnsupportedVersionError(IndexFormatError):
    """The serialized index declares a format version this build cannot read."""


class ChecksumError(IndexFormatError):
    """The serialized index payload does not match its trailing CRC32."""


class EmbedderTransportError(LkbError):
    """The remote embedding service could not be reached or timed out."""


class LlmTransportError(LkbError):
    """The LLM endpoint could not be reached after the configured retries."""


class MalformedResponseError(LkbError):
    """A remote service answered with a body that does not match its wire contract."""


class TemplateError(LkbError):
    """A prompt template is missing a required placeholder."""


class StoreCorruptionError(LkbError):
    """Persisted store state is internally inconsistent (digest or id mismatch)."""


class RebuildInProgressError(LkbError):
    """An index rebuild was requested while another one is still running."""


class ConfigError(LkbError):
    """A configuration value is missing, unparseable, or out of range."""
