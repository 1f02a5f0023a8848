from .dataset import (CollectError, Dataset, InsufficientData, LabeledSample,
                      RUNTIME_CAP, collect)
from .train import TrainReport, predict_json, train_and_export

__all__ = [
    "CollectError", "Dataset", "InsufficientData", "LabeledSample",
    "RUNTIME_CAP", "collect", "TrainReport", "predict_json",
    "train_and_export",
]
