"""Surrogate-based simulation optimization toolkit.

Subpackages:

- ``simcore``: simulation-model abstraction, replication running and
  aggregation, and the bundled stochastic testbed.
- ``surrogates``: polynomial / basis-function regression surrogates fit by
  OLS, ridge, and gradient-augmented GLS, plus kernel ridge regression.
- ``gp``: Gaussian-process priors, exact posteriors, marginal-likelihood
  hyperparameter selection, and the one-step posterior updating scheme.
- ``lowrank``: large-dataset posterior approximations (Woodbury, Nystrom,
  random Fourier features).
- ``optimizers``: local (RSM, STRONG, SPAS) and global (knowledge gradient,
  UCB, GP-based search) simulation-optimization algorithms.
- ``cli``: benchmark command-line harness.
"""

__version__ = "0.1.0"
