"""Cold-start viewership prediction toolkit.

Builds episode-level metadata features from CSV inputs, trains a zoo of
from-scratch regressors (CART tree, random forest, gradient-boosted trees,
and coordinate-descent lasso/ridge/elastic net), tunes them with seeded
randomized search over k-fold cross-validation, and combines the top three
by weighted average. Ships a synthetic data generator with known ground
truth so every stage can be verified end to end.
"""

__version__ = "0.1.0"
