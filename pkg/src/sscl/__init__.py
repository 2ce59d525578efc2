"""Supervised sparse context learning.

Each point is represented by a sparse linear reconstruction from its k
nearest training neighbours; the reconstruction codes and a max-margin
linear classifier are learned together by alternating between an L1
coding step and a box-constrained dual QP step.
"""

from sscl.data import Dataset, Standardizer, load_csv, gen_synthetic
from sscl.trainer import Hyperparams, train_binary, train_ovr
from sscl.predict import predict, knn_classify, srbc_classify

__all__ = [
    "Dataset",
    "Standardizer",
    "Hyperparams",
    "load_csv",
    "gen_synthetic",
    "train_binary",
    "train_ovr",
    "predict",
    "knn_classify",
    "srbc_classify",
]

__version__ = "0.1.0"
