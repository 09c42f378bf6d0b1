"""Two-class K-medoids clustering of pixel triples under the L1 distance.

Class labels are 0 and 1; class ``c`` is the cluster of ``medoids[c]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DegenerateInput, LengthMismatch, TooLarge

MAX_SWEEPS = 100
BRUTE_FORCE_LIMIT = 12
# below this class size a dense pairwise matrix is cheaper than sorting
SMALL_CLASS = 64


@dataclass(frozen=True)
class Assignment:
    """Result of a two-class clustering.

    Attributes
    ----------
    labels : ndarray of int8, shape (n,)
        Class of each point, 0 or 1.
    medoids : tuple of int
        Point index of the medoid for class 0 and class 1.
    cost : float
        Sum of L1 distances from each point to the medoid of its class.
    sweeps : int
        Assign/update sweeps performed (0 for the brute-force search).
    cost_trace : tuple of float
        Cost after each assignment step.
    """

    labels: np.ndarray
    medoids: tuple[int, int]
    cost: float
    sweeps: int = 0
    cost_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def sizes(self) -> tuple[int, int]:
        n1 = int(np.count_nonzero(self.labels))
        return len(self.labels) - n1, n1


def l1_distance(a, b) -> float:
    return float(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)).sum())


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected (n, 3) points, got shape {pts.shape}")
    if len(pts) < 2:
        raise DegenerateInput("need at least 2 points to form two clusters")
    return pts


def _assign(pts, m0, m1):
    d0 = np.abs(pts - pts[m0]).sum(axis=1)
    d1 = np.abs(pts - pts[m1]).sum(axis=1)
    labels = (d1 < d0).astype(np.int8)  # ties go to class 0
    cost = float(np.where(labels == 1, d1, d0).sum())
    return labels, cost


def _summed_l1(members: np.ndarray) -> np.ndarray:
    """Summed L1 distance from each member to all members.

    Large classes take an O(n log n) route: L1 separates over channels, and
    along one channel the sum of absolute deviations from a value follows
    from sorted prefix sums. Points with equal
    coordinates share one computed value so exact ties stay exact.
    """
    n = len(members)
    if n <= SMALL_CLASS:
        return np.abs(members[:, None, :] - members[None, :, :]).sum(axis=(1, 2))
    total = np.zeros(n)
    for k in range(members.shape[1]):
        values, inverse, counts = np.unique(members[:, k], return_inverse=True, return_counts=True)
        weighted = values * counts
        below_sum = np.cumsum(weighted) - weighted
        below_cnt = np.cumsum(counts) - counts
        above_sum = weighted.sum() - below_sum - weighted
        above_cnt = n - below_cnt - counts
        per_value = values * below_cnt - below_sum + above_sum - values * above_cnt
        total += per_value[inverse.ravel()]
    return total


def _best_medoid(pts, labels, cls, current):
    idx = np.flatnonzero(labels == cls)
    if len(idx) == 0:
        return current
    return int(idx[np.argmin(_summed_l1(pts[idx]))])  # argmin keeps the lowest index on ties


def kmedoids_two(points, init=(0, 1), max_sweeps: int = MAX_SWEEPS) -> Assignment:
    """Cluster ``points`` into two classes by alternating assignment and medoid updates.

    Each sweep assigns every point to its nearest medoid (ties to class 0)
    and then moves each medoid to the class member with the smallest summed
    L1 distance to its class (ties to the lowest index). Iteration stops once
    labels repeat or after ``max_sweeps`` sweeps.

    If the two initial medoids coincide while the points do not, medoid 1 is
    re-seeded at the point farthest from medoid 0 so that both classes are
    populated. When every point is identical all points fall in class 0.
    """
    pts = _as_points(points)
    m0, m1 = (int(i) for i in init)
    n = len(pts)
    if not (0 <= m0 < n and 0 <= m1 < n) or m0 == m1:
        raise ValueError(f"init must be two distinct indices in [0, {n}), got {init}")

    if np.array_equal(pts[m0], pts[m1]):
        far = np.abs(pts - pts[m0]).sum(axis=1)
        if far.max() > 0.0:
            m1 = int(np.argmax(far))

    labels, cost = _assign(pts, m0, m1)
    trace = [cost]
    sweeps = 1
    while sweeps < max_sweeps:
        m0 = _best_medoid(pts, labels, 0, m0)
        m1 = _best_medoid(pts, labels, 1, m1)
        new_labels, cost = _assign(pts, m0, m1)
        trace.append(cost)
        sweeps += 1
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return Assignment(labels, (m0, m1), cost, sweeps, tuple(trace))


def brute_force_two(points) -> Assignment:
    """Exhaustive search over all medoid pairs; the oracle for :func:`kmedoids_two`."""
    pts = _as_points(points)
    n = len(pts)
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"brute force is limited to {BRUTE_FORCE_LIMIT} points, got {n}")
    dist = [[sum(abs(pts[i][k] - pts[j][k]) for k in range(3)) for j in range(n)] for i in range(n)]
    best = None
    for a, b in combinations(range(n), 2):
        labels = [0 if dist[j][a] <= dist[j][b] else 1 for j in range(n)]
        cost = sum(dist[j][b] if lab else dist[j][a] for j, lab in enumerate(labels))
        if best is None or cost < best[0]:
            best = (cost, (a, b), labels)
    cost, medoids, labels = best
    return Assignment(np.array(labels, dtype=np.int8), medoids, float(cost))


def mismatches(reference: Assignment, candidate: Assignment) -> int:
    return int(np.count_nonzero(reference.labels != candidate.labels))


def align_labels(reference: Assignment, candidate: Assignment) -> Assignment:
    """Return ``candidate`` with its two labels swapped if that agrees better with ``reference``."""
    if len(reference.labels) != len(candidate.labels):
        raise LengthMismatch(
            f"reference has {len(reference.labels)} points, candidate {len(candidate.labels)}"
        )
    same = mismatches(reference, candidate)
    if len(candidate.labels) - same < same:
        return Assignment(
            (1 - candidate.labels).astype(np.int8),
            candidate.medoids[::-1],
            candidate.cost,
            candidate.sweeps,
            candidate.cost_trace,
        )
    return candidate
