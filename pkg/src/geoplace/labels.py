"""The ten semantic place categories and labelled places."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import ValidationError
from .geo import GeoPoint


class SemanticLabel(enum.Enum):
    BAR_RESTAURANT = "Bar;Restaurant"
    OUTDOOR_SPORTS = "Outdoor Sports"
    INDOOR_SPORTS = "Indoor Sports"
    HOME = "Home"
    HOME_OF_FRIEND = "Home of a Friend"
    TRANSPORT = "Transport Related"
    WORK = "Work"
    SHOP = "Shop"
    HOLIDAY_RESORT = "Holidays Resort"
    WORK_OF_FRIEND = "Work of a Friend"

    @property
    def index(self) -> int:
        return _INDEX[self]

    @classmethod
    def parse(cls, text: str) -> "SemanticLabel":
        """Accepts the canonical name (``HOME_OF_FRIEND``) or the display name."""
        key = text.strip()
        if key.upper() in cls.__members__:
            return cls[key.upper()]
        for label in cls:
            if label.value.lower() == key.lower():
                return label
        raise ValidationError(f"unknown semantic label {text!r}")

    def __str__(self) -> str:
        return self.name

    def __lt__(self, other):
        if not isinstance(other, SemanticLabel):
            return NotImplemented
        return self.index < other.index


LABELS: tuple[SemanticLabel, ...] = tuple(SemanticLabel)
_INDEX = {label: i for i, label in enumerate(LABELS)}


@dataclass(frozen=True)
class LabeledPlace:
    place_id: str
    location: GeoPoint
    label: SemanticLabel
