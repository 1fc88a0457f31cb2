"""Exception types shared across the pipeline."""


class DrError(Exception):
    """Base class for all drpipe errors."""


class DimMismatch(DrError):
    """Two rasters that must share dimensions do not."""


class NonPositiveFps(DrError):
    pass


class NonUnitQuaternion(DrError):
    pass


class BehindCamera(DrError):
    """Point with z <= 0 cannot be projected."""


class InvalidConfig(DrError):
    pass


class ManifestSchema(DrError):
    """Bundle manifest missing, malformed, or inconsistent with its files."""


class NoDepth(DrError):
    pass


class EmptyInstance(DrError):
    pass


class DegenerateDepth(DrError):
    """Every masked pixel had non-finite or non-positive depth."""


class DegenerateGeometry(DrError):
    """Back-projected points have zero spread on two or more axes."""


class NoBoundary(DrError):
    """Inpainting hole touches no non-hole pixel."""


class UnsupportedTargetMode(DrError):
    pass


class ZeroExtent(DrError):
    pass


class MissingPrevPose(DrError):
    """Previous pose features exist without a previous pose (internal inconsistency)."""


class OutOfOrderFrame(DrError):
    pass


class StageFailure(DrError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


class OversizedPayload(DrError):
    pass


class NonFiniteFloat(DrError):
    pass


class EmptyRegion(DrError):
    pass


class Misaligned(DrError):
    """Results do not align with the bundle they are evaluated against."""


class BundleMismatch(DrError):
    """Reports compared across different bundles."""


class AssetFormatError(DrError):
    pass


class UnknownAsset(DrError):
    pass


class NoInstanceAtPoint(DrError):
    """select_object hit a background pixel."""
