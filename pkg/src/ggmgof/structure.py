"""Graph structures (edge sets) for hypothesized precision-matrix supports.

An :class:`EdgeSet` is the symmetric support pattern of a precision matrix:
ordered index pairs closed under transposition, always containing every
diagonal pair ``(i, i)``.  Indices are 0-based in memory; the JSON file
format is 1-based (see :func:`save_edge_set` / :func:`load_edge_set`).
"""

import json
from dataclasses import dataclass

import numpy as np

from .validation import check_symmetric


@dataclass(frozen=True)
class EdgeSet:
    """Symmetric support pattern on ``p`` nodes, diagonal always present.

    Immutable and hashable; operations below construct fresh instances.
    """

    p: int
    edges: frozenset

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"node count must be positive, got {self.p}")
        for i, j in self.edges:
            if not (0 <= i < self.p and 0 <= j < self.p):
                raise ValueError(f"edge ({i}, {j}) out of range for p={self.p}")
            if (j, i) not in self.edges:
                raise ValueError(f"edge set not symmetric: ({i}, {j}) lacks its transpose")
        for i in range(self.p):
            if (i, i) not in self.edges:
                raise ValueError(f"diagonal pair ({i}, {i}) missing")

    @classmethod
    def from_pairs(cls, p, pairs):
        """Build an edge set from arbitrary pairs, symmetrizing and
        injecting the diagonal."""
        edges = {(i, i) for i in range(p)}
        for i, j in pairs:
            edges.add((int(i), int(j)))
            edges.add((int(j), int(i)))
        return cls(p, frozenset(edges))

    def to_mask(self):
        """Boolean ``p x p`` support mask."""
        mask = np.zeros((self.p, self.p), dtype=bool)
        for i, j in self.edges:
            mask[i, j] = True
        return mask

    def column_support(self, j):
        """Sorted row indices in the support of column ``j`` (includes ``j``)."""
        return np.array(sorted(i for i, k in self.edges if k == j), dtype=np.intp)

    def column_supports(self):
        """Per-column support index arrays, computed in one pass."""
        cols = [[] for _ in range(self.p)]
        for i, j in self.edges:
            cols[j].append(i)
        return [np.array(sorted(c), dtype=np.intp) for c in cols]

    def neighbors(self, i):
        """Off-diagonal neighbors of node ``i``."""
        return {j for a, j in self.edges if a == i and j != i}

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class StructureStats:
    """Structural statistics of an edge set.

    ``gamma`` is the location correction for the extreme-value limit of
    the global test, ``(1 - beta**2 / 2) ** -2`` with ``beta`` the
    isolated-node fraction ``k / p``.
    """

    column_supports: tuple
    s0: int
    isolated_count: int
    beta: float
    gamma: float


def band_edge_set(p, width):
    """Banded structure ``{(i, j): |i - j| < width}``.

    ``width == 1`` is the diagonal-only (isolated) structure; ``width == p``
    is the complete graph.
    """
    if p < 1:
        raise ValueError(f"node count must be positive, got {p}")
    if not 1 <= width <= p:
        raise ValueError(f"band width must be in [1, {p}], got {width}")
    edges = {
        (i, j)
        for i in range(p)
        for j in range(max(0, i - width + 1), min(p, i + width))
    }
    return EdgeSet(p, frozenset(edges))


def isolated_edge_set(p):
    """Diagonal-only structure: every node isolated."""
    return band_edge_set(p, 1)


def support_edge_set(M, tol=0.0):
    """Support pattern of a symmetric matrix: ``{(i, j): |M_ij| > tol}``
    plus the diagonal.

    ``tol=0.0`` suits generators that place exact zeros; use a small
    positive tolerance (e.g. 1e-12) for numerically computed matrices.
    """
    M = check_symmetric(M, "support matrix")
    if tol < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol}")
    p = M.shape[0]
    mask = np.abs(M) > tol
    np.fill_diagonal(mask, True)
    mask |= mask.T
    ii, jj = np.nonzero(mask)
    return EdgeSet(p, frozenset(zip(ii.tolist(), jj.tolist())))


def structure_stats(edge_set):
    """Column supports, max support ``s0``, isolated-node count, and the
    extreme-value correction ``gamma``."""
    supports = [0] * edge_set.p
    for _, j in edge_set.edges:
        supports[j] += 1
    k = sum(1 for s in supports if s == 1)
    beta = k / edge_set.p
    gamma = (1.0 - beta**2 / 2.0) ** -2
    return StructureStats(
        column_supports=tuple(supports),
        s0=max(supports),
        isolated_count=k,
        beta=beta,
        gamma=gamma,
    )


def node_rewire(edge_set, node, new_neighbors):
    """Replace all off-diagonal edges incident to ``node`` with edges to
    ``new_neighbors``; every other edge is untouched."""
    p = edge_set.p
    if not 0 <= node < p:
        raise ValueError(f"node {node} out of range for p={p}")
    new_neighbors = [int(j) for j in new_neighbors]
    for j in new_neighbors:
        if not 0 <= j < p:
            raise ValueError(f"neighbor {j} out of range for p={p}")
        if j == node:
            raise ValueError(f"node {node} cannot neighbor itself")
    edges = {(i, j) for i, j in edge_set.edges if i != node and j != node}
    edges.add((node, node))
    for j in new_neighbors:
        edges.add((node, j))
        edges.add((j, node))
    return EdgeSet(p, frozenset(edges))


def save_edge_set(edge_set, path):
    """Write the JSON edge-set format: 1-based strict upper triangle plus
    an explicit ``"diagonal": true`` marker."""
    upper = sorted((i + 1, j + 1) for i, j in edge_set.edges if i < j)
    payload = {
        "p": edge_set.p,
        "diagonal": True,
        "edges": [list(pair) for pair in upper],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_edge_set(path):
    """Read the JSON edge-set format.

    Accepts upper-triangle or full 1-based pairs; symmetrizes and injects
    the diagonal regardless of what the file lists.
    """
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        p = int(payload["p"])
        pairs = payload["edges"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed edge-set file {path}: {exc}") from exc
    converted = []
    for pair in pairs:
        i, j = int(pair[0]), int(pair[1])
        if not (1 <= i <= p and 1 <= j <= p):
            raise ValueError(
                f"edge [{i}, {j}] out of range for p={p} (file indices are 1-based)"
            )
        converted.append((i - 1, j - 1))
    return EdgeSet.from_pairs(p, converted)
