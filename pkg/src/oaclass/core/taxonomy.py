"""The OA class scheme and classification results."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable


class Family(enum.Enum):
    GOLD = "gold"
    GREEN = "green"
    NON_OA = "non_oa"


class GoldKind(enum.Enum):
    FULL = "full"
    HYBRID = "hybrid"
    DELAYED = "delayed"


class Timing(enum.Enum):
    PREPRINT = "preprint"
    POSTPRINT = "postprint"
    UNKNOWN = "unknown"


class Host(enum.Enum):
    INSTITUTIONAL = "institutional"
    DISCIPLINARY = "disciplinary"
    OTHER = "other"


class OAClass(enum.Enum):
    """All 13 classes, declared in default precedence order.

    Member values are the stable snake_case codes used in every output.
    """

    GOLD_FULL = "gold_full"
    GOLD_HYBRID = "gold_hybrid"
    GOLD_DELAYED = "gold_delayed"
    GREEN_POSTPRINT_DISCIPLINARY = "green_postprint_disciplinary"
    GREEN_POSTPRINT_INSTITUTIONAL = "green_postprint_institutional"
    GREEN_POSTPRINT_OTHER = "green_postprint_other"
    GREEN_UNKNOWN_DISCIPLINARY = "green_unknown_disciplinary"
    GREEN_UNKNOWN_INSTITUTIONAL = "green_unknown_institutional"
    GREEN_UNKNOWN_OTHER = "green_unknown_other"
    GREEN_PREPRINT_DISCIPLINARY = "green_preprint_disciplinary"
    GREEN_PREPRINT_INSTITUTIONAL = "green_preprint_institutional"
    GREEN_PREPRINT_OTHER = "green_preprint_other"
    NON_OA = "non_oa"

    @property
    def code(self) -> str:
        return self.value

    @property
    def family(self) -> Family:
        head = self.value.split("_", 1)[0]
        return Family.NON_OA if head == "non" else Family(head)

    @property
    def gold_kind(self) -> GoldKind | None:
        if self.family is not Family.GOLD:
            return None
        return GoldKind(self.value.split("_")[1])

    @property
    def timing(self) -> Timing | None:
        if self.family is not Family.GREEN:
            return None
        return Timing(self.value.split("_")[1])

    @property
    def host(self) -> Host | None:
        if self.family is not Family.GREEN:
            return None
        return Host(self.value.split("_")[2])

    @classmethod
    def gold(cls, kind: GoldKind) -> OAClass:
        return cls(f"gold_{kind.value}")

    @classmethod
    def green(cls, timing: Timing, host: Host) -> OAClass:
        return cls(f"green_{timing.value}_{host.value}")

    @classmethod
    def from_code(cls, code: str) -> OAClass:
        try:
            return cls(code)
        except ValueError:
            raise ValueError(f"unknown OA class code {code!r}") from None


#: Fixed ordering for reports and serialized label lists.
CLASS_ORDER: tuple[OAClass, ...] = tuple(OAClass)
DEFAULT_PRECEDENCE: tuple[OAClass, ...] = CLASS_ORDER


class AccessMode(enum.Enum):
    LIBRE = "libre"
    GRATIS = "gratis"
    CLOSED = "closed"


@dataclass(frozen=True)
class EvidenceRef:
    """Ties one label to one piece of evidence that justified it."""

    label: OAClass
    ref: str

    def to_dict(self) -> dict:
        return {"label": self.label.code, "ref": self.ref}

    @classmethod
    def from_dict(cls, data: dict) -> EvidenceRef:
        return cls(OAClass.from_code(data["label"]), data["ref"])


def sort_labels(labels: Iterable[OAClass]) -> list[OAClass]:
    return sorted(set(labels), key=CLASS_ORDER.index)


@dataclass(frozen=True)
class OAClassification:
    labels: frozenset[OAClass]
    primary: OAClass
    access_mode: AccessMode
    evidence_refs: tuple[EvidenceRef, ...] = ()
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValueError("labels must not be empty")
        if self.primary not in self.labels:
            raise ValueError(f"primary {self.primary.code} not among labels")
        if OAClass.NON_OA in self.labels:
            if len(self.labels) != 1:
                raise ValueError("non_oa cannot be combined with other labels")
            if self.access_mode is not AccessMode.CLOSED:
                raise ValueError("non_oa requires access_mode closed")
        elif self.access_mode is AccessMode.CLOSED:
            raise ValueError("open labels cannot have access_mode closed")

    @property
    def is_open(self) -> bool:
        return OAClass.NON_OA not in self.labels

    def to_dict(self) -> dict:
        return {
            "labels": [c.code for c in sort_labels(self.labels)],
            "primary": self.primary.code,
            "access_mode": self.access_mode.value,
            "evidence_refs": [r.to_dict() for r in self.evidence_refs],
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: dict) -> OAClassification:
        return cls(
            labels=frozenset(OAClass.from_code(c) for c in data["labels"]),
            primary=OAClass.from_code(data["primary"]),
            access_mode=AccessMode(data["access_mode"]),
            evidence_refs=tuple(EvidenceRef.from_dict(r) for r in data.get("evidence_refs", [])),
            diagnostics=tuple(data.get("diagnostics", [])),
        )
