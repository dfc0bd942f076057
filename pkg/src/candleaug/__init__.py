"""Label-preserving candlestick data augmentation toolkit.

Pipeline: rule-label OHLC windows, encode them as four-channel angular-field
tensors, train (or substitute a rule-backed) pattern classifier, generate
synthetic windows by local diagonal perturbation that the classifier still
labels correctly, and evaluate realism with an A/B questionnaire service
plus paired-t-test statistics.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .ohlc import (
    Candle,
    CandleAnatomy,
    CandleWindow,
    Direction,
    PatternLabel,
    RuleParams,
    Trend,
    anatomy,
    detect_trend,
    match_pattern,
    repair,
)
from .gaf import GafTensor, decode_tensor, encode_window, gaf_decode, gaf_encode, normalize
from .classifier import (
    Classifier,
    ClassifierModel,
    CnnClassifier,
    RuleClassifier,
    TrainConfig,
    forward,
    grad_check,
    train,
)
from .sampler import GeneratedSample, SamplerConfig, generate_dataset, perturb_diagonals, run
from .stats import paired_t_test, score_histogram

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Candle",
    "CandleAnatomy",
    "CandleWindow",
    "Direction",
    "PatternLabel",
    "RuleParams",
    "Trend",
    "anatomy",
    "detect_trend",
    "match_pattern",
    "repair",
    "GafTensor",
    "decode_tensor",
    "encode_window",
    "gaf_decode",
    "gaf_encode",
    "normalize",
    "Classifier",
    "ClassifierModel",
    "CnnClassifier",
    "RuleClassifier",
    "TrainConfig",
    "forward",
    "grad_check",
    "train",
    "GeneratedSample",
    "SamplerConfig",
    "generate_dataset",
    "perturb_diagonals",
    "run",
    "paired_t_test",
    "score_histogram",
    "__version__",
]
