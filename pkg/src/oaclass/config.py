"""Run configuration from a single flat TOML file.

Recognized keys (all optional)::

    immediate_grace_days = 30
    open_license_patterns = ["creativecommons.org/licenses/*", "creativecommons.org/publicdomain/*"]
    unlawful_host_denylist = ["researchgate.net", "academia.edu", "sci-hub."]
    precedence = ["gold_full", "gold_hybrid", ...]      # every class code exactly once
    preprint_on_equal_date = true
    delayed_registry = "delayed.csv"
    horizon_months = 24
    recent_months = 12
    theta_old = 0.9
    theta_recent = 0.5
    min_cohort = 20
"""

from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ParseError

CLASSIFIER_KEYS = frozenset({
    "immediate_grace_days", "open_license_patterns", "unlawful_host_denylist",
    "precedence", "preprint_on_equal_date", "delayed_registry",
})
DETECTOR_KEYS = frozenset({"horizon_months", "recent_months", "theta_old", "theta_recent", "min_cohort"})
KNOWN_KEYS = CLASSIFIER_KEYS | DETECTOR_KEYS

CACHE_ENV = "OACLASS_CACHE_DIR"


def load_config(path: str | Path | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"invalid config: {exc}", source=str(path)) from None
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise ParseError(f"unknown config key(s): {', '.join(unknown)}", source=str(path))
    return data


def cache_dir() -> Path:
    """Default location for harvested snapshots."""
    override = os.environ.get(CACHE_ENV)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "oaclass"
