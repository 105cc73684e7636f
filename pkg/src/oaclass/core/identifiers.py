"""ISSN and DOI normalization."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ChecksumError, FormatError

_ISSN_CHARS = re.compile(r"^[0-9]{7}[0-9X]$")
_ISSN_IGNORED = re.compile(r"[\s\-‐-―]")

_DOI_PREFIXES = re.compile(
    r"^(?:doi:\s*|(?:https?://)?(?:dx\.|www\.)?doi\.org/)", re.IGNORECASE
)
_DOI_SHAPE = re.compile(r"^10\.[^/\s]+/\S.*$")


def issn_check_digit(first7: str) -> str:
    """Return the mod-11 check character for the first seven ISSN digits."""
    if len(first7) != 7 or not first7.isdigit():
        raise FormatError(f"expected 7 digits, got {first7!r}")
    total = sum(int(d) * w for d, w in zip(first7, range(8, 1, -1)))
    check = (11 - total % 11) % 11
    return "X" if check == 10 else str(check)


@dataclass(frozen=True, order=True)
class Issn:
    """Canonical ``NNNN-NNNC`` ISSN. Build through :func:`normalize_issn`."""

    value: str

    def __post_init__(self) -> None:
        if len(self.value) != 9 or self.value[4] != "-":
            raise FormatError(f"not a canonical ISSN: {self.value!r}")

    @property
    def compact(self) -> str:
        return self.value.replace("-", "")

    def __str__(self) -> str:
        return self.value


def normalize_issn(raw: str) -> Issn:
    """Parse ``raw`` into a checksum-validated :class:`Issn`.

    Hyphens, whitespace and case are ignored; anything else that is not an
    ISSN character is a :class:`FormatError`.
    """
    if not isinstance(raw, str):
        raise FormatError(f"ISSN must be text, got {type(raw).__name__}")
    compact = _ISSN_IGNORED.sub("", raw).upper()
    if not _ISSN_CHARS.match(compact):
        raise FormatError(f"malformed ISSN: {raw!r}")
    expected = issn_check_digit(compact[:7])
    if compact[7] != expected:
        raise ChecksumError(
            f"ISSN {raw!r} has check digit {compact[7]}, expected {expected}",
            issn=raw,
        )
    return Issn(f"{compact[:4]}-{compact[4:]}")


def is_valid_issn(raw: str) -> bool:
    try:
        normalize_issn(raw)
    except (FormatError, ChecksumError):
        return False
    return True


@dataclass(frozen=True, order=True)
class Doi:
    """Lowercased DOI without resolver prefix. Build through :func:`normalize_doi`."""

    value: str

    def __str__(self) -> str:
        return self.value


def normalize_doi(raw: str) -> Doi:
    if not isinstance(raw, str):
        raise FormatError(f"DOI must be text, got {type(raw).__name__}")
    text = raw.strip()
    # prefixes may be stacked, e.g. "doi:https://doi.org/10..."
    while True:
        stripped = _DOI_PREFIXES.sub("", text, count=1).strip()
        if stripped == text:
            break
        text = stripped
    text = text.lower()
    if not _DOI_SHAPE.match(text):
        raise FormatError(f"malformed DOI: {raw!r}")
    return Doi(text)
