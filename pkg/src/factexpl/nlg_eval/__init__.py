from .rouge import RougeScore, corpus_rouge, rouge_l, rouge_n
from .stats import PairedTestResult, paired_t_test

__all__ = [
    "RougeScore",
    "corpus_rouge",
    "rouge_l",
    "rouge_n",
    "PairedTestResult",
    "paired_t_test",
]
