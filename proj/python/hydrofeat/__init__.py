"""Interpretable time series features for climate and hydrology station data."""

from ._core import (
    HydrofeatError,
    classical_decompose,
    extract_features,
    feature_names,
    fgn_autocorrelation,
    hurst_ml,
    periodogram,
    run_stage,
    sample_acf,
    simulate_fgn,
    spectral_entropy,
    stl_decompose,
)

__all__ = [
    "HydrofeatError",
    "classical_decompose",
    "extract_features",
    "feature_names",
    "fgn_autocorrelation",
    "hurst_ml",
    "periodogram",
    "run_stage",
    "sample_acf",
    "simulate_fgn",
    "spectral_entropy",
    "stl_decompose",
]
