"""Exact-arithmetic Katetov functions, finite universal-space approximants and isometry-group probes."""

from .approximant import Approximant, Grid, build_approximant, check_one_point_property
from .errors import KatetovError
from .functions import KatetovFunction, is_katetov, katetov_extension, sup_metric
from .isometry import IsometryGroup, full_isometry_group, nbhd
from .metric import MetricSpace, Subspace, validate

__all__ = [
    "Approximant",
    "Grid",
    "IsometryGroup",
    "KatetovError",
    "KatetovFunction",
    "MetricSpace",
    "Subspace",
    "build_approximant",
    "check_one_point_property",
    "full_isometry_group",
    "is_katetov",
    "katetov_extension",
    "nbhd",
    "sup_metric",
    "validate",
]
