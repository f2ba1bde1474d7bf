from .aspects import AspectMention, extract_aspects, mentions_from_labels
from .conll import MalformedTrainingData, parse_conll, read_conll, write_conll
from .crf import (
    LABELS,
    CrfError,
    CrfModel,
    EmptySequence,
    EmptyTrainingSet,
    LabeledSequence,
    LengthMismatch,
    TrainConfig,
    crf_gradient,
    crf_log_likelihood,
    crf_log_partition,
    crf_marginals,
    crf_score,
    crf_train,
    crf_viterbi,
)
from .pos import OPINION_CLASSES, PosClass, PosLexicon, pos_tag, read_pos_lexicon

__all__ = [
    "AspectMention", "extract_aspects", "mentions_from_labels",
    "MalformedTrainingData", "parse_conll", "read_conll", "write_conll",
    "LABELS", "CrfError", "CrfModel", "EmptySequence", "EmptyTrainingSet",
    "LabeledSequence", "LengthMismatch", "TrainConfig", "crf_gradient",
    "crf_log_likelihood", "crf_log_partition", "crf_marginals", "crf_score",
    "crf_train", "crf_viterbi",
    "OPINION_CLASSES", "PosClass", "PosLexicon", "pos_tag", "read_pos_lexicon",
]
