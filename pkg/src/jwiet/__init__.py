"""Joint wireless information and energy transfer in MIMO interference channels.

Submodules: :mod:`~jwiet.channel` (random channels), :mod:`~jwiet.beamform`
(rank-one beams and geodesics), :mod:`~jwiet.reopt` (rate-energy solvers),
:mod:`~jwiet.kuser` (K-user tilt procedure), :mod:`~jwiet.feedback`
(quantized feedback and bit allocation) and :mod:`~jwiet.harness`
(experiments and CSV output).
"""
from . import beamform, channel, feedback, harness, kuser, reopt
from .channel import ChannelMatrix, NetworkRealization, decompose, sample_network
from .errors import (
    ConfigError,
    DegenerateCurveError,
    DomainError,
    InfeasibleError,
    InvalidDimensionError,
    JwietError,
    NumericInputError,
    ResourceError,
)
from .reopt import REBoundary, REPoint, TxCovariance, re_boundary

__version__ = "0.1.0"

__all__ = [
    "ChannelMatrix",
    "ConfigError",
    "DegenerateCurveError",
    "DomainError",
    "InfeasibleError",
    "InvalidDimensionError",
    "JwietError",
    "NetworkRealization",
    "NumericInputError",
    "REBoundary",
    "REPoint",
    "ResourceError",
    "TxCovariance",
    "beamform",
    "channel",
    "decompose",
    "feedback",
    "harness",
    "kuser",
    "re_boundary",
    "reopt",
    "sample_network",
]
