"""Initial suspect partition from reported-vs-measured distance comparison.

Two sparse directed matrices are compared entry by entry: the distances
implied by reported positions and the distances actually claimed.  A pair
whose squared distances disagree by at least (d/2)^2, or that is claimed in
one direction only, puts both endpoints into the suspected set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attacks import AttackedScenario
from .swarm import InvalidParameterError, MeasurementSet


@dataclass(frozen=True)
class ReportedDistanceMatrix:
    """Sparse map (i, j) -> ||reported_i - reported_j|| over measurement adjacency."""

    n: int
    entries: dict[tuple[int, int], float]

    def get(self, i: int, j: int) -> float:
        return self.entries[(i, j)]


@dataclass(frozen=True)
class SuspectSets:
    """Partition of UAV ids into suspected and trusted."""

    suspected: tuple[int, ...]
    trusted: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "suspected", tuple(sorted(self.suspected)))
        object.__setattr__(self, "trusted", tuple(sorted(self.trusted)))
        if set(self.suspected) & set(self.trusted):
            raise InvalidParameterError("suspected and trusted must be disjoint")

    @property
    def n(self) -> int:
        return len(self.suspected) + len(self.trusted)

    def all_ids(self) -> frozenset[int]:
        return frozenset(self.suspected) | frozenset(self.trusted)


def build_reported_matrix(scenario: AttackedScenario) -> ReportedDistanceMatrix:
    """Euclidean distances between reported positions, on the claimed adjacency."""
    pos = scenario.swarm.reported_positions()
    entries = {
        (i, j): float(np.linalg.norm(pos[i] - pos[j]))
        for (i, j) in scenario.measurements.entries
    }
    return ReportedDistanceMatrix(scenario.n, entries)


def violating_pairs(
    e_r: ReportedDistanceMatrix, e_n: MeasurementSet, d: float
) -> list[tuple[int, int]]:
    """Directed pairs failing the element-wise comparison.

    A pair violates when (a) it is claimed in exactly one structure or one
    direction, or (b) |r_claimed^2 - r_reported^2| >= (d/2)^2.
    """
    if e_r.n != e_n.n:
        raise InvalidParameterError("matrix dimensions disagree")
    threshold = (d / 2.0) ** 2
    out = []
    for (i, j) in sorted(set(e_r.entries) | set(e_n.entries)):
        in_r, in_n = (i, j) in e_r.entries, (i, j) in e_n.entries
        if in_r != in_n or (j, i) not in e_n.entries:
            out.append((i, j))
        elif abs(e_n.get(i, j) ** 2 - e_r.get(i, j) ** 2) >= threshold:
            out.append((i, j))
    return out


def violation_counts(
    e_r: ReportedDistanceMatrix, e_n: MeasurementSet, d: float
) -> dict[int, int]:
    """Per-UAV count of incident violating pairs (0 for clean ids)."""
    counts = {k: 0 for k in range(e_n.n)}
    for (i, j) in violating_pairs(e_r, e_n, d):
        counts[i] += 1
        counts[j] += 1
    return counts


def initial_suspects(
    e_r: ReportedDistanceMatrix, e_n: MeasurementSet, d: float
) -> SuspectSets:
    """Both endpoints of every violating pair are suspected; the detectors
    later reduce the overreach."""
    suspected: set[int] = set()
    for (i, j) in violating_pairs(e_r, e_n, d):
        suspected.update((i, j))
    trusted = [k for k in range(e_n.n) if k not in suspected]
    return SuspectSets(tuple(sorted(suspected)), tuple(trusted))
