"""Low-rank support quaternion matrix machine for color image classification."""

__version__ = "0.1.0"

from .errors import DimensionError, NumericError, ParameterError
from .quaternion import Quaternion, QMatrix, conj_transpose, fro_norm, mat_add, mat_mul, qmul, real_inner
from .quaternion import from_real_rep, to_real_rep
from .qsvd import QsvdResult, nuclear_norm, prox_nuclear, qsvd, singular_values
from .trainer import TrainConfig, TrainedModel, decision_value, predict, train

__all__ = [
    "DimensionError",
    "NumericError",
    "ParameterError",
    "Quaternion",
    "QMatrix",
    "QsvdResult",
    "TrainConfig",
    "TrainedModel",
    "conj_transpose",
    "decision_value",
    "from_real_rep",
    "fro_norm",
    "mat_add",
    "mat_mul",
    "nuclear_norm",
    "predict",
    "prox_nuclear",
    "qmul",
    "qsvd",
    "real_inner",
    "singular_values",
    "to_real_rep",
    "train",
]
