from .scores import RegressionEval, majority_baseline, mcc, mean_baseline, regression_eval
from .significance import OneSampleTestResult, one_sample_t_test, significance_from_scores

__all__ = [
    "RegressionEval",
    "majority_baseline",
    "mcc",
    "mean_baseline",
    "regression_eval",
    "OneSampleTestResult",
    "one_sample_t_test",
    "significance_from_scores",
]
