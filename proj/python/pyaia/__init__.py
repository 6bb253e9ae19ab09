"""Python access to the automatic image annotation core."""

from ._core import (
    ConfigError,
    DataError,
    DimensionError,
    NumericalError,
    dtcwt_final_level,
    dtcwt_round_trip,
    extract_lowlevel,
    f_measure,
    fallback_descriptor,
    ingest_features,
    logentropy_weights,
    read_feature_file,
    run_cli,
    svd_values,
    write_feature_file,
)

__all__ = [
    "ConfigError",
    "DataError",
    "DimensionError",
    "NumericalError",
    "dtcwt_final_level",
    "dtcwt_round_trip",
    "extract_lowlevel",
    "f_measure",
    "fallback_descriptor",
    "ingest_features",
    "logentropy_weights",
    "read_feature_file",
    "run_cli",
    "svd_values",
    "write_feature_file",
]
