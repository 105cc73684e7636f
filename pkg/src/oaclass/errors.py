"""Exception hierarchy.

Everything raised on bad input data derives from :class:`OAError`, which the
CLI maps to exit code 1.
"""

from __future__ import annotations


class OAError(Exception):
    """Base class for data errors."""


class FormatError(OAError, ValueError):
    """An identifier does not have the expected shape."""


class ChecksumError(OAError, ValueError):
    """An ISSN check digit does not match the computed one."""

    def __init__(self, message: str, issn: str | None = None, row: int | None = None):
        super().__init__(message)
        self.issn = issn
        self.row = row


class ParseError(OAError, ValueError):
    """A row, line or field could not be parsed.

    ``row`` is the 1-based physical line number in the source file (the CSV
    header is line 1).
    """

    def __init__(self, message: str, row: int | None = None, source: str | None = None):
        prefix = ""
        if source is not None:
            prefix += f"{source}:"
        if row is not None:
            prefix += f"{row}: "
        elif prefix:
            prefix += " "
        super().__init__(prefix + message)
        self.row = row
        self.source = source
        self.reason = message


class ConflictError(OAError):
    """Several registry entries claim the same ISSN."""

    def __init__(self, message: str, issns: list[str] | None = None):
        super().__init__(message)
        self.issns = sorted(issns or [])


class UnknownKindError(ParseError):
    """Repository kind token not in the supported vocabulary."""


class XmlError(OAError):
    """An OAI-PMH response is not well-formed XML."""


class RecordError(OAError):
    """A single OAI-PMH record is unusable (the rest of the page is fine)."""


class RegistryConflict(OAError):
    """A journal passed to the delayed-OA detector is registered as full OA."""


class ProtocolError(OAError):
    """The OAI-PMH endpoint answered with a protocol-level error."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


class TransportError(OAError):
    """HTTP request failed after exhausting retries."""


class AuthError(TransportError):
    """The endpoint rejected our credentials (401/403)."""


class UnknownFieldError(OAError, KeyError):
    """A report grouping field is not known."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""
