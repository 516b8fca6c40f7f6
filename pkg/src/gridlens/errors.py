"""Exception hierarchy for the gridlens analytics engine.

Every error carries a stable machine-readable ``code`` (the class name in
snake_case) so the CLI and HTTP server can emit structured error bodies
without string matching.
"""

from __future__ import annotations

import re


def _snake(name: str) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


class GridlensError(Exception):
    """Base class for all gridlens errors."""

    @property
    def code(self) -> str:
        return _snake(type(self).__name__)


# -- ingest / validation -----------------------------------------------------

class MissingFile(GridlensError):
    pass


class SchemaMismatch(GridlensError):
    pass


class TimeGridError(GridlensError):
    pass


class RangeError(GridlensError):
    pass


class EventOrderError(GridlensError):
    pass


class EmptyScenario(GridlensError):
    pass


# -- cache -------------------------------------------------------------------

class CacheVersionMismatch(GridlensError):
    pass


class CorruptCache(GridlensError):
    pass


# -- metrics -----------------------------------------------------------------

class ZeroPeak(GridlensError):
    pass


class NonFinite(GridlensError):
    pass


class NoChargingEnergy(GridlensError):
    """Raised when a window contains no EV charging energy.

    Cost and CO2 intensity are undefined in that case; the tariff revenue is
    still well defined and is carried on the exception.
    """

    def __init__(self, message: str, revenue: float):
        super().__init__(message)
        self.revenue = revenue


# -- query -------------------------------------------------------------------

class UnknownVariable(GridlensError):
    pass


class UnknownAgent(GridlensError):
    pass


class UnknownMetric(GridlensError):
    pass


class EmptyWindow(GridlensError):
    pass


class BadBucketCount(GridlensError):
    pass


class DateOutOfRange(GridlensError):
    pass


class OffGridTimestamp(GridlensError):
    pass


# -- compare -----------------------------------------------------------------

class WindowMismatch(GridlensError):
    pass


# -- generator ---------------------------------------------------------------

class InfeasibleConfig(GridlensError):
    pass


# -- server ------------------------------------------------------------------

class DuplicateScenario(GridlensError):
    pass
