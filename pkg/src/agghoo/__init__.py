"""Aggregated hold-out (Agghoo), hold-out and cross-validation for classification rules."""

__version__ = "0.1.0"

from .core import (
    Classifier,
    ConstantClassifier,
    Dataset,
    FunctionClassifier,
    FunctionRule,
    IndexSet,
    LearningRule,
    empirical_risk,
    excess_risk_estimate,
    test_risk,
)
from .selection import (
    MajorityVoteClassifier,
    agghoo,
    cv_select,
    holdout_risk,
    holdout_select,
    majority_vote,
    score_plan,
    subagged_holdout,
)
from .splits import SplitPlan, monte_carlo_splits, vfold_splits

__all__ = [
    "__version__",
    "Classifier", "ConstantClassifier", "Dataset", "FunctionClassifier", "FunctionRule",
    "IndexSet", "LearningRule", "empirical_risk", "excess_risk_estimate", "test_risk",
    "MajorityVoteClassifier", "agghoo", "cv_select", "holdout_risk", "holdout_select",
    "majority_vote", "score_plan", "subagged_holdout",
    "SplitPlan", "monte_carlo_splits", "vfold_splits",
]
