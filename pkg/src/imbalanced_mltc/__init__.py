"""Multi-label text classification for imbalanced label distributions.

Binary Relevance and Label Powerset baselines, AdaBoost.MH and bagging
ensembles over five weak learners, the text pipeline that feeds them and
the evaluation metrics used to compare them.
"""

from .corpus import (
    Document,
    ImbalanceProfile,
    LabelSpace,
    MultiLabelDataset,
    SparseBinaryVector,
    desk_profile,
    generate_synthetic,
    label_distribution,
    lapor_profile,
    load_documents,
    split,
)
from .errors import (
    ArtifactError,
    ConfigurationError,
    DataError,
    IncompatibleModelError,
    InvariantViolation,
    ModelIntegrityError,
    ParseError,
    ValidationError,
)
from .metrics import evaluate
from .multilabel import (
    train_adaboost_mh,
    train_bagging,
    train_br,
    train_lp,
)
from .preprocess import PipelineConfig, TextPipeline
from .weak_learners import WeakSpec

__version__ = "0.1.0"

__all__ = [
    "ArtifactError",
    "ConfigurationError",
    "DataError",
    "Document",
    "ImbalanceProfile",
    "IncompatibleModelError",
    "InvariantViolation",
    "LabelSpace",
    "ModelIntegrityError",
    "MultiLabelDataset",
    "ParseError",
    "PipelineConfig",
    "SparseBinaryVector",
    "TextPipeline",
    "ValidationError",
    "WeakSpec",
    "desk_profile",
    "evaluate",
    "generate_synthetic",
    "label_distribution",
    "lapor_profile",
    "load_documents",
    "split",
    "train_adaboost_mh",
    "train_bagging",
    "train_br",
    "train_lp",
]
