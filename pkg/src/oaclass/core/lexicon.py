"""OA labels in circulation and where each sits in the class scheme."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .taxonomy import AccessMode, OAClass


class LegacyName(enum.Enum):
    HYBRID = "Hybrid"
    DELAYED = "Delayed"
    PLATINUM = "Platinum"
    DIAMOND = "Diamond"
    GRAY = "Gray"
    BRONZE = "Bronze"
    TRANSIENT = "Transient"
    GUERILLA = "Guerilla"
    BLACK = "Black"
    ROBIN_HOOD = "RobinHood"
    BLUE = "Blue"
    YELLOW = "Yellow"
    WHITE = "White"


@dataclass(frozen=True)
class LegacyLabel:
    name: LegacyName
    mapping: OAClass | None
    note: str
    access_mode: AccessMode | None = None


_NO_FEES = "no publication fees; fee status out of scope, classified by venue openness only"
_INFRINGES = (
    "freely accessible but infringes copyright; fails the lawfulness requirement, "
    "never classified Green"
)
_POLICY = "describes a publisher self-archiving policy, not the access status of a publication"

_LEXICON = (
    LegacyLabel(
        LegacyName.HYBRID,
        OAClass.GOLD_HYBRID,
        "article in a subscription journal made open at publication (APC paid)",
    ),
    LegacyLabel(
        LegacyName.DELAYED,
        OAClass.GOLD_DELAYED,
        "also called Moving Wall; free after an embargo, typically 6 to 24 months",
    ),
    LegacyLabel(LegacyName.PLATINUM, OAClass.GOLD_FULL, _NO_FEES),
    LegacyLabel(LegacyName.DIAMOND, OAClass.GOLD_FULL, _NO_FEES),
    LegacyLabel(
        LegacyName.GRAY,
        OAClass.GOLD_FULL,
        "full OA journal missing from DOAJ; only detectable through other full-OA lists",
    ),
    LegacyLabel(
        LegacyName.BRONZE,
        None,
        "publisher-hosted free copy without any license for reuse; gold family "
        "with access_mode gratis, no dedicated class",
        AccessMode.GRATIS,
    ),
    LegacyLabel(
        LegacyName.TRANSIENT,
        None,
        "open only for a limited period; needs repeated observation, not modelled "
        "by single-snapshot classification",
    ),
    LegacyLabel(LegacyName.GUERILLA, None, _INFRINGES),
    LegacyLabel(LegacyName.BLACK, None, _INFRINGES),
    LegacyLabel(LegacyName.ROBIN_HOOD, None, _INFRINGES),
    LegacyLabel(LegacyName.BLUE, None, _POLICY + " (postprint deposit allowed)"),
    LegacyLabel(LegacyName.YELLOW, None, _POLICY + " (preprint deposit allowed)"),
    LegacyLabel(LegacyName.WHITE, None, _POLICY + " (self-archiving not supported)"),
)


def legacy_lexicon() -> list[LegacyLabel]:
    return list(_LEXICON)


def lookup(name: LegacyName | str) -> LegacyLabel:
    if isinstance(name, str):
        aliases = {"moving wall": "Delayed", "movingwall": "Delayed", "robin hood": "RobinHood"}
        key = aliases.get(name.strip().lower(), name.strip())
        name = next((n for n in LegacyName if n.value.lower() == key.lower()), None)
        if name is None:
            raise KeyError(key)
    return next(label for label in _LEXICON if label.name is name)
