from app.inference.classifier import (StyleClassifier, StyleEstimator, TrainingResult, predict_styles,
                                      train_classifier)
from app.inference.dataset import StyleDataset, generate_dataset, vehicle_features

__all__ = [
    "StyleClassifier", "StyleEstimator", "TrainingResult", "predict_styles", "train_classifier",
    "StyleDataset", "generate_dataset", "vehicle_features",
]
