"""bellshrink: shrinkage estimation for the Bell count-regression model.

Fits Bell regressions with a log link by iteratively reweighted least
squares and evaluates four coefficient estimators (maximum likelihood,
Liu-type, almost-unbiased Liu-type and its modified variant) together with
their closed-form risks, superiority-condition checks, collinearity
diagnostics and a reproducible Monte Carlo study harness.
"""

from bellshrink.backend import BACKEND
from bellshrink.kernel import Rng, derive_seed

__version__ = "0.1.0"

__all__ = ["BACKEND", "Rng", "derive_seed", "__version__"]
