"""LDA topic model: separation on a synthetic two-document corpus."""

from __future__ import annotations

import numpy as np
import pytest

from factexpl.dataset.topics import fit_topic_model

DOC_A = "economy budget deficit spending taxes inflation growth trade"
DOC_B = "vaccine virus hospital symptoms treatment infection dose immunity"


def two_cluster_corpus() -> list[str]:
    return [DOC_A] * 30 + [DOC_B] * 30


def test_topic_rows_are_normalized():
    model = fit_topic_model(two_cluster_corpus(), n_topics=2, seed=0)
    sums = model.topic_term.sum(axis=1)
    assert np.allclose(sums, 1.0, atol=1e-9)


def test_two_topics_separate_disjoint_vocabularies():
    model = fit_topic_model(two_cluster_corpus(), n_topics=2, seed=0)
    vocab_a, vocab_b = set(DOC_A.split()), set(DOC_B.split())
    top_sets = [set(term for term, _ in model.top_terms(t, 5)) for t in range(2)]
    assert top_sets[0].isdisjoint(top_sets[1])
    for terms in top_sets:
        # vocabulary-pure: every top term comes from a single document's vocabulary
        assert terms <= vocab_a or terms <= vocab_b


def test_top_terms_sorted_by_weight():
    model = fit_topic_model(two_cluster_corpus(), n_topics=2, seed=0)
    for topic in range(2):
        weights = [w for _, w in model.top_terms(topic, 8)]
        assert weights == sorted(weights, reverse=True)


def test_empty_vocabulary_error_names_filter_bounds():
    # every word appears in every document -> max_df filter empties the vocabulary
    corpus = ["same words everywhere"] * 40
    with pytest.raises(ValueError, match=r"max_df=0.5.*min_df=10"):
        fit_topic_model(corpus, n_topics=2)


def test_empty_corpus_rejected():
    with pytest.raises(ValueError):
        fit_topic_model([])


def test_default_hyperparameters_match_contract():
    import inspect

    sig = inspect.signature(fit_topic_model)
    assert sig.parameters["n_topics"].default == 10
    assert sig.parameters["max_features"].default == 500
    assert sig.parameters["max_df"].default == 0.5
    assert sig.parameters["min_df"].default == 10
    assert sig.parameters["max_iter"].default == 10
