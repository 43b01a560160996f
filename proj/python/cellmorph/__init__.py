"""Python bindings for the cellmorph morphometry library."""

from ._cellmorph import (
    AnovaResult,
    CellNucleusPair,
    Channel,
    ConfigError,
    DimensionMismatchError,
    Error,
    GeometryError,
    InvalidScaleError,
    IoError,
    LabelMask,
    MaskFormatError,
    NotFoundError,
    PairingResult,
    PixelScale,
    RunSummary,
    StatsError,
    SubjectFeatures,
    Tessellation,
    __version__,
    analyze,
    build_voronoi,
    compute_features,
    derive_scale,
    f_cdf,
    image_csm,
    label_components,
    load_mask,
    one_way_anova,
    pair_subjects,
    polygon_csm,
    roundness,
    voronoi_entropy,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
