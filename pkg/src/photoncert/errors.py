"""Exception types shared across the package."""

from __future__ import annotations


class PhotoncertError(Exception):
    """Base class for all package-specific errors."""


class DomainError(PhotoncertError):
    """A radial evaluation was requested outside a profile's domain."""


class InvalidComponentError(PhotoncertError):
    """A surface-data tuple violates a structural requirement (r > 0, lapse > 0, ...)."""


class RefusalError(PhotoncertError):
    """An operation declined to run because its geometric preconditions fail.

    The message names the violated requirement (e.g. a degenerate horizon, a
    non-sub-extremal component, a vanishing total charge).
    """


class AlignmentError(PhotoncertError):
    """Gluing radii of neck and exterior pieces disagree beyond tolerance."""


class SpecFormatError(PhotoncertError):
    """A configuration file failed schema validation or data sanity checks."""


class GaugeError(PhotoncertError):
    """A coordinate map required for a diagnostic is not monotone on the needed range."""
