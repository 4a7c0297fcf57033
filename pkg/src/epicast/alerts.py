"""Alert levels derived from daily incidence, with two response policies.

Levels run 1..4 against three ascending incidence thresholds (default
10/20/40 cases per million per day). The low-inertia policy maps incidence
to a level instantly; the high-inertia policy is a state machine that only
steps up after the instantaneous level has exceeded the held level for
``up_days`` consecutive days, and only steps down after ``down_days``
consecutive days below it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOW_INERTIA = "low_inertia"
HIGH_INERTIA = "high_inertia"


@dataclass(frozen=True)
class AlertConfig:
    thresholds: tuple[float, float, float] = (10.0, 20.0, 40.0)
    up_days: int = 7
    down_days: int = 14

    def __post_init__(self):
        t1, t2, t3 = self.thresholds
        if not t1 < t2 < t3:
            raise ValueError("thresholds must be strictly ascending")
        if self.up_days < 1 or self.down_days < 1:
            raise ValueError("confirmation windows must be at least 1 day")


@dataclass
class AlertSeries:
    levels: np.ndarray  # integers in 1..4, one per day
    policy: str
    region_id: str = ""

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=int)
        if self.levels.size and (self.levels.min() < 1 or self.levels.max() > 4):
            raise ValueError("alert levels must lie in 1..4")


DEFAULT_CONFIG = AlertConfig()


def level_from_incidence(incidence: float, config: AlertConfig = DEFAULT_CONFIG) -> int:
    """Map one day's incidence to a level.

    Bands are [0, t1) -> 1, [t1, t2) -> 2, [t2, t3] -> 3, (t3, inf) -> 4,
    so every non-negative incidence maps to exactly one level.
    """
    if incidence < 0:
        raise ValueError(f"negative incidence {incidence}")
    t1, t2, t3 = config.thresholds
    if incidence < t1:
        return 1
    if incidence < t2:
        return 2
    if incidence <= t3:
        return 3
    return 4


def low_inertia_series(incidence, config: AlertConfig = DEFAULT_CONFIG,
                       region_id: str = "") -> AlertSeries:
    """Instantaneous alert level for every day."""
    levels = [level_from_incidence(float(v), config) for v in incidence]
    return AlertSeries(levels=np.array(levels, dtype=int), policy=LOW_INERTIA,
                       region_id=region_id)


def high_inertia_series(incidence, config: AlertConfig = DEFAULT_CONFIG,
                        region_id: str = "") -> AlertSeries:
    """Confirmed alert level: starts at 1 and moves at most one step per day.

    A step up requires the instantaneous level to exceed the held level for
    ``up_days`` consecutive days ending today; a step down requires it to
    stay below for ``down_days`` consecutive days. Both run counters reset
    after every transition.
    """
    level = 1
    up_run = 0
    down_run = 0
    levels = []
    for value in incidence:
        instant = level_from_incidence(float(value), config)
        up_run = up_run + 1 if instant > level else 0
        down_run = down_run + 1 if instant < level else 0
        if up_run >= config.up_days:
            level += 1
            up_run = 0
            down_run = 0
        elif down_run >= config.down_days:
            level -= 1
            up_run = 0
            down_run = 0
        levels.append(level)
    return AlertSeries(levels=np.array(levels, dtype=int), policy=HIGH_INERTIA,
                       region_id=region_id)


def count_level_changes(series: AlertSeries) -> int:
    """Number of days whose level differs from the day before."""
    levels = series.levels
    if levels.size < 2:
        return 0
    return int(np.count_nonzero(levels[1:] != levels[:-1]))


def count_spikes(series: AlertSeries) -> int:
    """Number of level flaps: two transitions within a 3-consecutive-day span.

    Two transitions fit in three consecutive days exactly when they happen
    on back-to-back days, so this counts days t where the level changed at
    both t and t+1.
    """
    levels = series.levels
    if levels.size < 3:
        return 0
    changes = levels[1:] != levels[:-1]
    return int(np.count_nonzero(changes[:-1] & changes[1:]))
