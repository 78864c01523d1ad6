"""Structure learning: RDC independence oracle, clustering, splitting and Learn-FSPN."""
from .config import LearnConfig
from .learn import fit_multi_leaf, fit_uni_leaf, learn_fspn
from .rdc import CorrelationMatrix, correlation_matrix, rdc
from .split import group_correlated, partition_independent, split_conditional

__all__ = [
    "LearnConfig", "CorrelationMatrix", "rdc", "correlation_matrix", "group_correlated",
    "partition_independent", "split_conditional", "fit_uni_leaf", "fit_multi_leaf", "learn_fspn",
]
