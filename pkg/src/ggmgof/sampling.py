"""Seeded multivariate normal sampling.

Random numbers come from NumPy's counter-based Philox generator, so a
sample is a pure function of ``(sigma, n, seed)`` and replication streams
derived from a master seed are reproducible regardless of how replications
are scheduled.  Normal variates use NumPy's ziggurat method, which is
deterministic for a fixed bit stream.
"""

import numpy as np

from .validation import check_symmetric, spd_cholesky


def replication_seed(master_seed, replication):
    """Independent, deterministic seed stream for one replication.

    Keyed by ``(master_seed, replication)`` so parallel workers draw
    identical streams no matter the execution order.
    """
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(replication),))


def _generator(seed):
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


def sample_mvn(sigma, n, seed):
    """Draw ``n`` i.i.d. mean-zero Gaussian rows with covariance ``sigma``.

    Parameters
    ----------
    sigma : (p, p) array
        Positive-definite covariance matrix.
    n : int
        Number of observations.
    seed : int or numpy.random.SeedSequence
        Stream key; identical ``(sigma, n, seed)`` give bitwise-identical
        output.

    Returns
    -------
    (n, p) array with rows ``X_i = L z_i`` where ``L`` is the lower
    Cholesky factor of ``sigma``.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    sigma = check_symmetric(sigma, "covariance matrix")
    L = spd_cholesky(sigma, "covariance matrix")
    rng = _generator(seed)
    z = rng.standard_normal((int(n), sigma.shape[0]))
    return z @ L.T
