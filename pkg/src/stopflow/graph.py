"""Ground-truth model of the k-th power of a directed path.

Vertices sit at positions 1..n; every edge points from a higher position
to a lower one at distance at most k, so position 1 is the unique sink.
The graph is held implicitly as (n, k): all structure is position
arithmetic, so predicates are O(1) and nothing is stored.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PathPower:
    """Directed graph on positions 1..n with an edge i -> j iff 0 < i - j <= k."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need at least 2 vertices, got n={self.n}")
        if not 1 <= self.k <= self.n - 1:
            raise ValueError(f"power must satisfy 1 <= k <= n-1, got k={self.k}, n={self.n}")

    def _check_position(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise ValueError(f"position {i} out of range 1..{self.n}")

    def edge_exists(self, i: int, j: int) -> bool:
        """True iff there is a directed edge from position i to position j."""
        self._check_position(i)
        self._check_position(j)
        return 0 < i - j <= self.k

    def d_value(self, i: int, j: int) -> int:
        """Distance label of the edge i -> j: the count of underlying-path
        vertices strictly between the endpoints."""
        if not self.edge_exists(i, j):
            raise ValueError(f"no edge from {i} to {j} in PathPower(n={self.n}, k={self.k})")
        return i - j - 1

    def is_sink(self, i: int) -> bool:
        """True iff position i has no outgoing edges (i.e. i == 1)."""
        self._check_position(i)
        return i == 1

    def out_degree(self, i: int) -> int:
        self._check_position(i)
        return min(self.k, i - 1)

    def in_degree(self, i: int) -> int:
        self._check_position(i)
        return min(self.k, self.n - i)

    def edge_count(self) -> int:
        return self.n * self.k - self.k * (self.k + 1) // 2

    def positions(self) -> range:
        return range(1, self.n + 1)
