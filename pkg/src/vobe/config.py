"""Engine configuration: verification thresholds, enumeration cap, defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .socialnet import VerificationRules

DEFAULT_VARIANT_CAP = 10**6
DEFAULT_SORT_KEYS = (("competenceScore", "desc"), ("totalCost", "asc"))


@dataclass(frozen=True)
class EngineConfig:
    verification: VerificationRules = field(default_factory=VerificationRules)
    variant_cap: int = DEFAULT_VARIANT_CAP
    default_sort_keys: tuple[tuple[str, str], ...] = DEFAULT_SORT_KEYS

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        doc = json.loads(Path(path).read_text())
        return cls(
            verification=VerificationRules(
                tau=doc.get("tau", 0.5), delta=doc.get("delta", 0.2)
            ),
            variant_cap=doc.get("variantCap", DEFAULT_VARIANT_CAP),
            default_sort_keys=tuple(
                (k["key"], k.get("order", "desc"))
                for k in doc.get("defaultSortKeys", ())
            )
            or DEFAULT_SORT_KEYS,
        )
