"""Linear-chain CRF: features, training, Viterbi decoding, marginals."""

from .features import (
    BOS,
    EOS,
    TAG_BIGRAM,
    TOKEN_NGRAM,
    FeatureTemplate,
    default_templates,
    extract_features,
)
from .model import (
    TAGS,
    CrfModel,
    ModelFormatError,
    decode,
    load_model,
    log_partition,
    marginals,
    path_score,
    save_model,
    tag_marginal,
    viterbi,
)
from .train import DegenerateTrainingError, TrainingProblem, train

__all__ = [
    "BOS",
    "EOS",
    "TAG_BIGRAM",
    "TOKEN_NGRAM",
    "FeatureTemplate",
    "default_templates",
    "extract_features",
    "TAGS",
    "CrfModel",
    "ModelFormatError",
    "decode",
    "load_model",
    "log_partition",
    "marginals",
    "path_score",
    "save_model",
    "tag_marginal",
    "viterbi",
    "DegenerateTrainingError",
    "TrainingProblem",
    "train",
]
