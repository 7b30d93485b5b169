"""Multichannel frequency-domain processing: SCMs, DOA estimation, beamforming."""

from .beamform import BeamformerWeights, apply_beamformer, delay_and_sum, gev, mvdr
from .covariance import SpatialCovariance, compute_scm
from .doa import DoaResult, TdoaEstimate, gcc_phat, music, srp_phat
from .geometry import (
    ArrayGeometry,
    DoaGrid,
    SteeringField,
    azimuth_grid,
    load_geometry,
    sphere_grid,
    steering,
    to_angles,
    unit_vector,
)
from .stft import ColaWarning, Spectrogram, istft, stft

__all__ = [
    "ArrayGeometry",
    "BeamformerWeights",
    "ColaWarning",
    "DoaGrid",
    "DoaResult",
    "SpatialCovariance",
    "Spectrogram",
    "SteeringField",
    "TdoaEstimate",
    "apply_beamformer",
    "azimuth_grid",
    "compute_scm",
    "delay_and_sum",
    "gcc_phat",
    "gev",
    "istft",
    "load_geometry",
    "music",
    "mvdr",
    "sphere_grid",
    "srp_phat",
    "steering",
    "stft",
    "to_angles",
    "unit_vector",
]
