"""Descriptive LDA topic model over the claim texts.

scikit-learn's LatentDirichletAllocation with online variational inference,
10 topics by default; the term-document matrix keeps at most 500 features
and drops words in more than 50% or fewer than 10 documents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.decomposition import LatentDirichletAllocation
from sklearn.feature_extraction.text import CountVectorizer


@dataclass
class TopicModel:
    vocab: list[str]
    topic_term: np.ndarray  # (n_topics, n_terms), each row a probability distribution

    def top_terms(self, topic_id: int, k: int = 10) -> list[tuple[str, float]]:
        row = self.topic_term[topic_id]
        idx = np.argsort(row)[::-1][:k]
        return [(self.vocab[i], float(row[i])) for i in idx]

    def table(self, k: int = 10) -> list[list[tuple[str, float]]]:
        """Per topic: the top-k terms with weights, weight-descending."""
        return [self.top_terms(t, k) for t in range(self.topic_term.shape[0])]


def fit_topic_model(
    claims: list[str],
    n_topics: int = 10,
    max_features: int = 500,
    max_df: float = 0.5,
    min_df: int = 10,
    max_iter: int = 10,
    seed: int = 0,
) -> TopicModel:
    if not claims:
        raise ValueError("empty claim corpus")
    vectorizer = CountVectorizer(max_features=max_features, max_df=max_df, min_df=min_df)
    try:
        doc_term = vectorizer.fit_transform(claims)
    except ValueError as exc:
        raise ValueError(
            f"vocabulary empty after document-frequency filtering (max_df={max_df}, min_df={min_df})"
        ) from exc
    lda = LatentDirichletAllocation(
        n_components=n_topics,
        learning_method="online",
        max_iter=max_iter,
        random_state=seed,
    )
    lda.fit(doc_term)
    topic_term = lda.components_ / lda.components_.sum(axis=1, keepdims=True)
    return TopicModel(vocab=[str(v) for v in vectorizer.get_feature_names_out()], topic_term=topic_term)
