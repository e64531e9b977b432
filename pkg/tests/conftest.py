"""Shared fixtures and independent oracle implementations.

The oracles recompute everything from first principles (explicit selector
matrices, textbook formulas, dense inverses, double loops) so they share
no code path with the package internals they check.
"""

import datetime as dt

import numpy as np
import pytest


def oracle_covariance(X):
    """Two-pass textbook sample covariance with the n - 1 divisor."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    mean = np.zeros(p)
    for row in X:
        mean += row
    mean /= n
    S = np.zeros((p, p))
    for row in X:
        d = row - mean
        S += np.outer(d, d)
    return S / (n - 1)


def oracle_constrained_fit(S, edge_set):
    """Column fits via explicit 0/1 selector matrices and dense inverses."""
    p = edge_set.p
    W = np.zeros((p, p))
    eye = np.eye(p)
    for i in range(p):
        rows = sorted(a for (a, b) in edge_set.edges if b == i)
        B = np.zeros((p, len(rows)))
        for c, r in enumerate(rows):
            B[r, c] = 1.0
        A = B.T @ S @ B
        w1 = np.linalg.inv(A) @ (B.T @ eye[:, i])
        W[:, i] = B @ w1
    return W


def oracle_statistic(X, edge_set):
    """Global statistic by brute force: naive double loop over all pairs."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    S = oracle_covariance(X)
    W = oracle_constrained_fit(S, edge_set)
    best = -np.inf
    best_pair = None
    for i in range(p):
        for j in range(p):
            numer = float(S[j] @ W[:, i]) - (1.0 if i == j else 0.0)
            theta = (W[i, i] * S[j, j] + (1.0 if i == j else 0.0)) / n
            value = numer**2 / theta
            if value > best:
                best, best_pair = value, (i, j)
    return best, best_pair


def oracle_node_statistic(X, edge_set, node):
    """Single-row brute force for the node-local statistic."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    S = oracle_covariance(X)
    W = oracle_constrained_fit(S, edge_set)
    best = -np.inf
    for j in range(p):
        numer = float(S[j] @ W[:, node]) - (1.0 if node == j else 0.0)
        theta = (W[node, node] * S[j, j] + (1.0 if node == j else 0.0)) / n
        best = max(best, numer**2 / theta)
    return best


def oracle_gee(responses, covariates, working_precision):
    """Stacked normal-equations solve with explicit per-subject designs."""
    Y = np.asarray(responses, dtype=float)
    m, T = Y.shape
    Z = np.column_stack([np.ones(m), np.asarray(covariates, dtype=float)])
    q1 = Z.shape[1]
    A = np.zeros((q1, q1))
    rhs = np.zeros(q1)
    for i in range(m):
        Xi = np.kron(np.ones((T, 1)), Z[i][None, :])
        A += Xi.T @ working_precision @ Xi
        rhs += Xi.T @ working_precision @ Y[i]
    return np.linalg.solve(A, rhs)


def dyadic_dataset(rng, n, p, scale=64):
    """Dataset of exact dyadic rationals: every intermediate quantity in
    the covariance is exactly representable, so permutation invariance
    holds bitwise, not just approximately."""
    ints = rng.integers(-512, 512, size=(n, p))
    return ints.astype(float) / scale


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def write_synthetic_nyt(path, states, start=dt.date(2020, 12, 30), days=370,
                        daily=None, extra_rows=()):
    """Cumulative-case CSV in the NYT schema for the given states."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,state,fips,cases,deaths\n")
        for idx, state in enumerate(states):
            cum = 0
            for off in range(days):
                day = start + dt.timedelta(days=off)
                cum += daily(idx, off) if daily is not None else 100
                fh.write(f"{day},{state},{idx:02d},{cum},0\n")
        for row in extra_rows:
            fh.write(row + "\n")
