import numpy as np


def as_generator(seed=None) -> np.random.Generator:
    """Coerce an int, SeedSequence, Generator or None into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def trial_generator(seed: int, trial: int) -> np.random.Generator:
    """Generator for one trial of a seeded sweep; independent across trials."""
    return np.random.default_rng([seed, trial])
