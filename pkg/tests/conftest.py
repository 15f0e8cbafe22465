import numpy as np

from cause_sieve.model import Dataset, validate_dataset


def table(y, *cols, names=None) -> Dataset:
    """Build a validated dataset with target column Y."""
    y = np.asarray(y, dtype=float)
    cols = [np.asarray(c, dtype=float) for c in cols]
    names = names or ["Y"] + [f"X{i}" for i in range(1, len(cols) + 1)]
    return validate_dataset(np.column_stack([y, *cols]), names, "Y")
