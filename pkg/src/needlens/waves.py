"""Follow-up wave timeline shared by every stage of the pipeline."""

from __future__ import annotations

# T0 marks the static scaffold (ontology-derived) portion of the graph;
# the four waves are the follow-up time points in months.
T0 = "T0"
WAVES = ("M3", "M6", "M12", "M24")

_ORDER = {T0: 0, "M3": 1, "M6": 2, "M12": 3, "M24": 4}

WAVE_MONTHS = {"M3": 3, "M6": 6, "M12": 12, "M24": 24}

# wire values accepted in the feedback stream
WIRE_WAVES = {"3m": "M3", "6m": "M6", "12m": "M12", "24m": "M24"}


def wave_order(wave: str) -> int:
    """Total order over T0 and the four waves; raises on unknown values."""
    try:
        return _ORDER[wave]
    except KeyError:
        raise ValueError(f"unknown wave: {wave!r}") from None


def earliest(waves) -> str:
    """The earliest of a non-empty collection of wave values."""
    items = list(waves)
    if not items:
        raise ValueError("earliest() of empty wave collection")
    return min(items, key=wave_order)


def parse_wire_wave(value: str) -> str:
    """Map a feedback-stream wave string ('3m', ...) to the internal name."""
    try:
        return WIRE_WAVES[value]
    except KeyError:
        raise ValueError(f"unknown wave value: {value!r}") from None
