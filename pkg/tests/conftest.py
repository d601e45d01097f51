import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

sys.path.insert(0, str(Path(__file__).parent))

from imbalanced_mltc.corpus import ImbalanceProfile, MultiLabelDataset, LabelSpace, generate_synthetic
from imbalanced_mltc.preprocess import PipelineConfig, TextPipeline

# Acceptance lines collected by test_acceptance.py, printed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


SMALL_PROFILE = ImbalanceProfile((60, 40, 25, 15, 8, 4), (0.7, 0.25, 0.05), tokens_per_label=8)


@pytest.fixture(scope="session")
def small_corpus():
    return generate_synthetic(SMALL_PROFILE, 120, seed=11)


@pytest.fixture(scope="session")
def small_data(small_corpus):
    """(pipeline, train dataset, test dataset) on a 90/30 split."""
    docs, space = small_corpus
    pipe = TextPipeline.from_config(PipelineConfig(feature_count=40))
    train = pipe.fit(docs[:90], space)
    test = pipe.transform(docs[90:], space)
    return pipe, train, test


def random_dataset(rng, n, d, q, density=0.3, min_labels=0):
    X = sp.csr_matrix((rng.random((n, d)) < density).astype(np.float64))
    sets = []
    for _ in range(n):
        labels = {int(l) for l in np.flatnonzero(rng.random(q) < 0.4)}
        while len(labels) < min_labels:
            labels.add(int(rng.integers(q)))
        sets.append(frozenset(labels))
    return MultiLabelDataset(LabelSpace.anonymous(q), X, tuple(sets))
