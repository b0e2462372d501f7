"""Python access to the evtrack tracking core."""

from ._evtrack import (
    ConfigError,
    EvtrackError,
    InvalidValueError,
    IoError,
    NumericError,
    ParseError,
    correlate,
    distance_errors,
    distort_point,
    evaluate,
    invert_perspective,
    mode_names,
    otsu_threshold,
    perspective_transform,
    pixel_to_distance,
    schedule,
    sos_filter,
    sos_filtfilt,
    synth,
    track,
    track_to_distance,
    undistort_point,
)

__all__ = [
    "ConfigError",
    "EvtrackError",
    "InvalidValueError",
    "IoError",
    "NumericError",
    "ParseError",
    "correlate",
    "distance_errors",
    "distort_point",
    "evaluate",
    "invert_perspective",
    "mode_names",
    "otsu_threshold",
    "perspective_transform",
    "pixel_to_distance",
    "schedule",
    "sos_filter",
    "sos_filtfilt",
    "synth",
    "track",
    "track_to_distance",
    "undistort_point",
]
