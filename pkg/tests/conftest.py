import numpy as np
import pytest

from mindtrack.corpus import SyntheticConfig, generate_synthetic

# statement type == person type: clean class labels for classifier tests
IDENTITY_MIX = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

SEPARATED_MEANS = ((0.0, 0.0), (8.0, 0.0), (4.0, 6.928203230275509))


def separable_config(persons=(20, 20, 20), quotes=5, seed=0, means=SEPARATED_MEANS):
    return SyntheticConfig(
        statement_given_person=IDENTITY_MIX,
        class_means=means,
        persons_per_type=persons,
        quotes_per_person=quotes,
        seed=seed,
    )


@pytest.fixture(scope="session")
def separable_corpus():
    """Well-separated 3-class corpus shared by classifier-level tests."""
    corpus, embeddings = generate_synthetic(separable_config())
    X = embeddings.matrix([q.id for q in corpus])
    y = np.array([q.label for q in corpus], dtype=object)
    return corpus, embeddings, X, y
