"""Exception types shared across the package."""

from __future__ import annotations


class CreativityError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CreativityError):
    """Two feature payloads do not live in the same space."""


class NetworkError(CreativityError):
    """A semantic network is malformed or a concept id is unknown."""


class Sb3Error(CreativityError):
    """A project archive is missing, malformed, or internally inconsistent."""


class SidecarError(CreativityError):
    """A feature sidecar file violates the CFV1 format."""


class MissingFeatures(CreativityError):
    """No sidecar exists for one or more asset digests.

    Callers with a fallback extractor catch this and extract features
    themselves; strict callers surface the digest list.
    """

    def __init__(self, digests):
        self.digests = tuple(digests)
        super().__init__("missing feature sidecars: " + ", ".join(self.digests))


class FeatureError(CreativityError):
    """An asset could not be decoded or featurized."""


class LabelsError(CreativityError):
    """Expert label or weight data is missing, malformed, or inconsistent."""
