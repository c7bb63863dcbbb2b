import numpy as np
import pytest

from fairloop import GenderLabel, ModelArtifact, TrainingStats, initial_label_set

MAN = GenderLabel("man")
WOMAN = GenderLabel("woman")
NON_BINARY = GenderLabel("non-binary")


@pytest.fixture
def label_set():
    return initial_label_set()


@pytest.fixture
def toy_model():
    """Hand-built 2-D binary model: identity stats, centroids at (+-4, 0)."""
    return ModelArtifact(
        model_version=1,
        centroids={MAN: np.array([4.0, 0.0]), WOMAN: np.array([-4.0, 0.0])},
        training_stats=TrainingStats(np.zeros(2), np.ones(2)),
        trained_on={MAN: 10, WOMAN: 10},
    )
