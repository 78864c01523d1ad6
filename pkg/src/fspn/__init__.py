"""Factorize-sum-split-product networks: learning, range inference and evaluation."""
__version__ = "0.1.0"

from .events import Event, Interval, VariableMeta
from .inference import infer_evidence, infer_marginal, log_likelihood
from .model import FspnModel, load, save, stats, validate

__all__ = [
    "__version__", "Event", "Interval", "VariableMeta", "FspnModel", "infer_marginal", "infer_evidence",
    "log_likelihood", "load", "save", "stats", "validate",
]
