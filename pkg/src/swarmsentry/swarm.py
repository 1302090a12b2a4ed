"""Swarm generation, noise models, and pairwise distance measurement.

A swarm is a set of UAVs with true 3-D positions (what physics sees) and
reported positions (what each UAV broadcasts).  Distance measurements are
taken against true geometry and gated by the communication range, producing a
sparse directed measurement map that doubles as the neighbor graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import seeds

# Floor for stored distances: keeps every entry strictly positive so that
# "an entry exists iff r > 0" stays a valid adjacency convention.
DISTANCE_FLOOR = 1e-12


class InvalidParameterError(ValueError):
    """Raised when an operation receives out-of-contract parameters."""


@dataclass(frozen=True)
class Uav:
    """One swarm member.

    ``true_pos`` is the physical location; ``reported_pos`` is what the UAV
    broadcasts.  They differ by measurement noise for benign UAVs and by an
    arbitrary spoof for malicious ones.
    """

    id: int
    true_pos: np.ndarray
    reported_pos: np.ndarray
    ground_truth_malicious: bool = False

    def __post_init__(self):
        object.__setattr__(self, "true_pos", _as_position(self.true_pos))
        object.__setattr__(self, "reported_pos", _as_position(self.reported_pos))


def _as_position(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,):
        raise InvalidParameterError(f"position must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError("position must be finite in every coordinate")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Swarm:
    uavs: tuple[Uav, ...]
    comm_range: float
    cube_half_width: float
    rng_seed: int

    def __post_init__(self):
        object.__setattr__(self, "uavs", tuple(self.uavs))
        if len(self.uavs) < 2:
            raise InvalidParameterError("a swarm needs at least 2 UAVs")
        if self.comm_range <= 0 or self.cube_half_width <= 0:
            raise InvalidParameterError("comm_range and cube_half_width must be positive")
        ids = [u.id for u in self.uavs]
        if ids != list(range(len(self.uavs))):
            raise InvalidParameterError("UAV ids must be 0..N-1 in order")

    @property
    def n(self) -> int:
        return len(self.uavs)

    def true_positions(self) -> np.ndarray:
        """(N, 3) array of true positions."""
        return np.array([u.true_pos for u in self.uavs])

    def reported_positions(self) -> np.ndarray:
        """(N, 3) array of reported positions."""
        return np.array([u.reported_pos for u in self.uavs])

    def malicious_ids(self) -> frozenset[int]:
        return frozenset(u.id for u in self.uavs if u.ground_truth_malicious)


@dataclass(frozen=True)
class NoiseParams:
    """Per-axis position noise variance and pairwise distance noise variance."""

    pos_var: float = 1e-6
    dist_var: float = 1e-6

    def __post_init__(self):
        if self.pos_var < 0 or self.dist_var < 0:
            raise InvalidParameterError("noise variances must be nonnegative")


@dataclass(frozen=True)
class MeasurementSet:
    """Sparse directed map (i, j) -> measured/claimed distance.

    An entry (i, j) means UAV i reports a ranging measurement to UAV j.  The
    adjacency indicator is entry presence; ``neighbor_set`` symmetrizes it.
    """

    n: int
    entries: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        for (i, j), r in self.entries.items():
            if i == j or not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidParameterError(f"bad measurement pair ({i}, {j})")
            if r <= 0:
                raise InvalidParameterError(f"measurement ({i}, {j}) must be positive, got {r}")

    def has(self, i: int, j: int) -> bool:
        return (i, j) in self.entries

    def get(self, i: int, j: int) -> float:
        return self.entries[(i, j)]

    def directed_pairs(self) -> list[tuple[int, int, float]]:
        """All (i, j, r) triplets in sorted pair order."""
        return [(i, j, self.entries[(i, j)]) for (i, j) in sorted(self.entries)]

    def replace_outgoing(self, source: int, new_claims: dict[int, float]) -> "MeasurementSet":
        """Return a copy where all (source, *) entries are replaced by new_claims."""
        entries = {k: v for k, v in self.entries.items() if k[0] != source}
        for j, r in new_claims.items():
            entries[(source, j)] = max(r, DISTANCE_FLOOR)
        return MeasurementSet(self.n, entries)


def generate_swarm(n: int, cube_half_width: float, comm_range: float, seed: int) -> Swarm:
    """Generate n UAVs uniformly in the cube [-w, +w]^3.

    Reported positions start equal to true positions and every UAV is benign;
    noise and attacks are applied by later pipeline stages.
    """
    if n < 2:
        raise InvalidParameterError(f"need n >= 2, got {n}")
    if cube_half_width <= 0 or comm_range <= 0:
        raise InvalidParameterError("cube_half_width and comm_range must be positive")
    rng = seeds.stream(seed, seeds.SWARM)
    pts = rng.uniform(-cube_half_width, cube_half_width, size=(n, 3))
    uavs = tuple(Uav(i, pts[i], pts[i]) for i in range(n))
    return Swarm(uavs, comm_range, cube_half_width, seed)


def apply_position_noise(swarm: Swarm, params: NoiseParams, seed: int) -> Swarm:
    """Corrupt benign UAVs' reported positions with zero-mean Gaussian noise.

    Malicious UAVs are untouched here: the attack engine overwrites their
    reports anyway.
    """
    if params.pos_var == 0:
        return swarm
    rng = seeds.stream(seed, seeds.POS_NOISE)
    noise = rng.normal(0.0, np.sqrt(params.pos_var), size=(swarm.n, 3))
    uavs = []
    for u in swarm.uavs:
        if u.ground_truth_malicious:
            uavs.append(u)
        else:
            uavs.append(replace(u, reported_pos=u.true_pos + noise[u.id]))
    return replace(swarm, uavs=tuple(uavs))


def measure_distances(swarm: Swarm, params: NoiseParams, seed: int) -> MeasurementSet:
    """Measure every directed pair whose true distance is within comm range.

    Measurements are taken against true geometry (a ranging signal reflects
    where the counterpart physically is, not where it claims to be).  The
    (i, j) and (j, i) noise draws are independent, so directed entries may
    disagree slightly.
    """
    rng = seeds.stream(seed, seeds.DIST_NOISE)
    pos = swarm.true_positions()
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    noise = rng.normal(0.0, np.sqrt(params.dist_var), size=(swarm.n, swarm.n)) if params.dist_var > 0 else np.zeros((swarm.n, swarm.n))
    entries: dict[tuple[int, int], float] = {}
    for i in range(swarm.n):
        for j in range(swarm.n):
            if i == j:
                continue
            if dist[i, j] <= swarm.comm_range:
                entries[(i, j)] = max(dist[i, j] + noise[i, j], DISTANCE_FLOOR)
    return MeasurementSet(swarm.n, entries)


def neighbor_set(measurements: MeasurementSet, k: int) -> frozenset[int]:
    """One-hop neighbors of k: union of both measurement directions."""
    if not 0 <= k < measurements.n:
        raise InvalidParameterError(f"UAV id {k} out of range [0, {measurements.n})")
    out = set()
    for (i, j) in measurements.entries:
        if i == k:
            out.add(j)
        elif j == k:
            out.add(i)
    return frozenset(out)
