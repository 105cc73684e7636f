"""Evidence item types shared by the parsers, the bundler and the classifier."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..core.dates import PartialDate


class ContentVersion(enum.Enum):
    VOR = "vor"
    AM = "am"
    TDM = "tdm"
    UNSPECIFIED = "unspecified"

    @classmethod
    def parse(cls, token: str | None) -> ContentVersion:
        try:
            return cls((token or "unspecified").strip().lower())
        except ValueError:
            return cls.UNSPECIFIED


class HostKind(enum.Enum):
    PUBLISHER = "publisher"
    REPOSITORY = "repository"


class DeclaredVersion(enum.Enum):
    SUBMITTED = "submittedVersion"
    ACCEPTED = "acceptedVersion"
    PUBLISHED = "publishedVersion"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, token: str | None) -> DeclaredVersion:
        if not token:
            return cls.UNKNOWN
        lowered = token.strip().lower()
        for member in (cls.SUBMITTED, cls.ACCEPTED, cls.PUBLISHED):
            # also accepts "info:eu-repo/semantics/acceptedVersion"
            if lowered.endswith(member.value.lower()):
                return member
        return cls.UNKNOWN


@dataclass(frozen=True)
class LicenseStatement:
    url: str
    start_date: PartialDate | None = None
    delay_days: int | None = None
    content_version: ContentVersion = ContentVersion.UNSPECIFIED
    ref: str = ""

    def __post_init__(self) -> None:
        if self.delay_days is not None and self.delay_days < 0:
            raise ValueError("delay_days must be >= 0")

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "start": self.start_date.isoformat() if self.start_date else None,
            "delay_days": self.delay_days,
            "content_version": self.content_version.value,
            "ref": self.ref,
        }

    @classmethod
    def from_dict(cls, data: dict) -> LicenseStatement:
        return cls(
            url=data["url"],
            start_date=PartialDate.parse(data["start"]) if data.get("start") else None,
            delay_days=data.get("delay_days"),
            content_version=ContentVersion.parse(data.get("content_version")),
            ref=data.get("ref", ""),
        )


@dataclass(frozen=True)
class AccessLocation:
    url: str
    host_kind: HostKind
    repo_hint: str | None = None
    deposit_timestamp: PartialDate | None = None
    declared_version: DeclaredVersion = DeclaredVersion.UNKNOWN
    license: LicenseStatement | None = None
    ref: str = ""

    def __post_init__(self) -> None:
        if self.host_kind is HostKind.PUBLISHER and self.repo_hint is not None:
            raise ValueError("publisher-hosted locations carry no repository hint")

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "host_kind": self.host_kind.value,
            "repo_hint": self.repo_hint,
            "deposit_timestamp": self.deposit_timestamp.isoformat() if self.deposit_timestamp else None,
            "declared_version": self.declared_version.value,
            "license": self.license.to_dict() if self.license else None,
            "ref": self.ref,
        }

    @classmethod
    def from_dict(cls, data: dict) -> AccessLocation:
        deposit = data.get("deposit_timestamp")
        return cls(
            url=data["url"],
            host_kind=HostKind(data["host_kind"]),
            repo_hint=data.get("repo_hint"),
            deposit_timestamp=PartialDate.parse(deposit) if deposit else None,
            declared_version=DeclaredVersion.parse(data.get("declared_version")),
            license=LicenseStatement.from_dict(data["license"]) if data.get("license") else None,
            ref=data.get("ref", ""),
        )
