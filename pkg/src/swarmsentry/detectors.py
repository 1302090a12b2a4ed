"""Iterative suspect-set reduction and the sampling baselines.

Both proposed detectors start from the initial suspect partition and try to
exonerate suspects through feasibility checks on sub-networks:

* the neighborhood detector tests each suspect together with its one-hop
  neighbors against the trusted set, clearing the whole neighborhood when it
  localizes consistently;
* the refined detector additionally tests the members of a failed
  neighborhood one by one, which is what makes framed targets recoverable and
  colluders individually attributable.

The two baselines mirror common practice: rank pairs by distance discrepancy
and sample endpoints, or sample uniformly from the initial suspects.  Both
receive the true attacker count; the proposed detectors never do.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import sdp, seeds
from .attacks import AttackedScenario
from .metrics import precision_recall_f1
from .suspects import (
    ReportedDistanceMatrix,
    SuspectSets,
    build_reported_matrix,
    initial_suspects,
    violation_counts,
)
from .swarm import MeasurementSet, neighbor_set
from .validation import check_is_fitted, check_partition, check_scenario

CDI = "cdi"
ECDI = "ecdi"
NLOS = "nlos"
RANDOM = "random"
ALGORITHMS = (CDI, ECDI, NLOS, RANDOM)


@dataclass(frozen=True)
class DetectorOptions:
    """Knobs shared by the feasibility-check detectors."""

    oracle: sdp.OracleOptions = field(default_factory=sdp.OracleOptions)
    eps: float | None = None
    delta: float = sdp.DEFAULT_DELTA
    window_sq: float | None = None
    paper_replication: bool = False
    # Unknown oracle verdicts keep ids suspected when True (conservative);
    # when False the assessment is skipped and naturally retried next pass.
    unknown_as_infeasible: bool = True


@dataclass(frozen=True)
class DetectionResult:
    predicted_malicious: frozenset[int]
    iterations: int
    oracle_calls: int
    per_iteration_trace: tuple[tuple[int, int, str], ...]
    passes: int = 0
    flags: tuple[str, ...] = ()

    def to_labels(self, n: int) -> np.ndarray:
        labels = np.zeros(n, dtype=int)
        labels[sorted(self.predicted_malicious)] = 1
        return labels


class _Run:
    """Shared state of one detection run."""

    def __init__(self, initial: SuspectSets, scenario: AttackedScenario, options: DetectorOptions):
        self.scenario = scenario
        self.options = options
        self.suspected = set(initial.suspected)
        self.trusted = set(initial.trusted)
        self.oracle_calls = 0
        self.iterations = 0
        self.passes = 0
        self.trace: list[tuple[int, int, str]] = []
        self.flags: set[str] = set()
        # Initial evidence against each id, used to order per-UAV refinement:
        # lightly-implicated members are assessed first so exonerations
        # accumulate benign context before heavily-implicated ones are tried.
        e_r = build_reported_matrix(scenario)
        self.evidence = violation_counts(e_r, scenario.measurements, scenario.swarm.comm_range)
        # Who claims a measurement about each id: a singleton check of id is
        # conclusive only once these counterparties have been assessed.
        self.accusers: dict[int, set[int]] = {u.id: set() for u in scenario.swarm.uavs}
        claimants: set[int] = set()
        for (i, j) in scenario.measurements.entries:
            self.accusers[j].add(i)
            claimants.add(i)
        # Value-conflicting testimony: claims whose distance disagrees with
        # the reported geometry of the pair beyond the acceptance window.
        # Fabricated claims are value-consistent with their subject's report
        # by construction (that is what makes framing work), so a conflicting
        # claim about an id is evidence that must be heard before the id can
        # be cleared.  Borderline range pairs (honest noise tails) stay below
        # the window and do not count.
        d = scenario.swarm.comm_range
        window = (d / 2.0) ** 2
        pos = scenario.swarm.reported_positions()
        self.conflicting_accusers: dict[int, set[int]] = {u.id: set() for u in scenario.swarm.uavs}
        for (i, j), r in scenario.measurements.entries.items():
            gap_sq = float(((pos[i] - pos[j]) ** 2).sum())
            if gap_sq >= d * d + window or abs(r * r - gap_sq) >= window:
                self.conflicting_accusers[j].add(i)
        # Ids whose reported position some claim contradicts: their own
        # testimony about others carries no exonerating weight.
        self.discredited = {k for k, who in self.conflicting_accusers.items() if who}
        accusing_anyone = set().union(*self.conflicting_accusers.values()) if self.conflicting_accusers else set()
        # A self-consistent claimant that no credible witness reciprocates
        # can never be exonerated: honest measurement presence is symmetric
        # (both directions gate on true distance), so such a node is either
        # lying or confirmed only by liars.  Claimants holding a conflicting
        # claim are different: they are accusing someone, and clearing them
        # (once they reconcile with the trusted set) puts their testimony to
        # work against the accused.
        self.unvouched = {
            k for k in claimants
            if not (self.accusers[k] - self.discredited - {k}) and k not in accusing_anyone
        }

    def check(self, sub_ids, assessed: int) -> str:
        problem = sdp.assemble(
            sub_ids,
            self.scenario,
            eps=self.options.eps,
            delta=self.options.delta,
            window_sq=self.options.window_sq,
            paper_replication=self.options.paper_replication,
        )
        res = sdp.check_feasibility(problem, self.options.oracle)
        self.oracle_calls += 1
        self.trace.append((assessed, problem.n_sub, res.status))
        if res.status == sdp.UNKNOWN:
            self.flags.add("oracle-unknown")
        return res.status

    def exonerate(self, ids) -> None:
        moved = set(ids) & self.suspected
        self.suspected -= moved
        self.trusted |= moved

    def result(self) -> DetectionResult:
        return DetectionResult(
            predicted_malicious=frozenset(self.suspected),
            iterations=self.iterations,
            oracle_calls=self.oracle_calls,
            per_iteration_trace=tuple(self.trace),
            passes=self.passes,
            flags=tuple(sorted(self.flags)),
        )


def _trusted_base_ok(run: _Run) -> bool:
    """Pre-check the trusted set itself; a failing base poisons every test."""
    if not run.trusted:
        run.flags.add("trusted-set-empty")
        return False
    ok = run.check(run.trusted, assessed=-1) == sdp.FEASIBLE
    if not ok:
        run.flags.add("trusted-set-infeasible")
    return ok


def _singleton_sweep(run: _Run) -> bool:
    """Assess every remaining suspect alone against the trusted set.

    Lightly-implicated ids go first: each exoneration enlarges the trusted
    base that the heavily-implicated ids (attackers, if anyone) must then
    reconcile with.
    """
    changed = False
    for k in sorted(run.suspected, key=lambda v: (run.evidence.get(v, 0), v)):
        if k in run.unvouched or (run.conflicting_accusers[k] & run.suspected) - {k}:
            continue
        run.iterations += 1
        if run.check(run.trusted | {k}, assessed=k) == sdp.FEASIBLE:
            run.exonerate({k})
            changed = True
    return changed


def _neighborhood(run: _Run, k: int) -> frozenset[int]:
    return neighbor_set(run.scenario.measurements, k)


def cdi(
    initial: SuspectSets,
    scenario: AttackedScenario,
    options: DetectorOptions | None = None,
) -> DetectionResult:
    """Neighborhood-granularity exoneration.

    Suspects are assessed in ascending-id circular order; each one is tested
    together with its one-hop neighbors on top of the trusted set, and the
    whole neighborhood is cleared when the sub-network localizes.  Stops after
    the first full pass without a change.
    """
    return _iterate(initial, scenario, options or DetectorOptions(), refine=False)


def ecdi(
    initial: SuspectSets,
    scenario: AttackedScenario,
    options: DetectorOptions | None = None,
) -> DetectionResult:
    """Neighborhood exoneration with per-UAV refinement on failure.

    Like the neighborhood detector, but when a neighborhood fails its check,
    each suspected member is re-assessed alone against the trusted set.  The
    per-UAV step is what clears framed targets while keeping the colluders.
    """
    return _iterate(initial, scenario, options or DetectorOptions(), refine=True)


def _iterate(
    initial: SuspectSets,
    scenario: AttackedScenario,
    options: DetectorOptions,
    refine: bool,
) -> DetectionResult:
    scenario = check_scenario(scenario)
    initial = check_partition(initial, scenario.n)
    run = _Run(initial, scenario, options)
    if not run.suspected:
        return run.result()

    if not _trusted_base_ok(run):
        # Heavy-attack fallback: with no usable trusted base the neighborhood
        # test is meaningless.  Assess singletons if a base exists at all,
        # else keep the whole suspect set.
        if run.trusted:
            run.passes = 1
            _singleton_sweep(run)
        return run.result()

    max_passes = 2 * len(run.suspected) + 3
    while run.passes < max_passes:
        run.passes += 1
        changed = False
        for k in sorted(run.suspected):
            if k not in run.suspected:
                continue
            run.iterations += 1
            hood = _neighborhood(run, k)
            tested = run.trusted | {k} | hood
            status = run.check(tested, assessed=k)
            if status == sdp.FEASIBLE:
                # A feasible sub-network certifies its members consistent with
                # each other; a neighbor is cleared wholesale only when all of
                # its own evidence was inside the tested set, otherwise it
                # must earn exoneration through its own assessment.
                movable = ({k} | {v for v in hood if _neighborhood(run, v) <= tested}) - run.unvouched
                if movable & run.suspected:
                    run.exonerate(movable)
                    changed = True
            elif status == sdp.UNKNOWN and not options.unknown_as_infeasible:
                continue  # skip; naturally retried on the next pass
            elif refine:
                # Per-UAV refinement of the failed neighborhood.  An id still
                # accused by another suspect is deferred: its singleton check
                # would not see the accuser's claims and could clear it on
                # incomplete evidence.
                members = sorted(
                    ({k} | hood) & run.suspected - run.unvouched,
                    key=lambda v: (run.evidence.get(v, 0), v),
                )
                for member in members:
                    if (run.accusers[member] & run.suspected) - {member}:
                        continue
                    run.iterations += 1
                    if run.check(run.trusted | {member}, assessed=member) == sdp.FEASIBLE:
                        run.exonerate({member})
                        changed = True
        if changed:
            continue
        if refine and run.suspected:
            # Deadlocked: mutually-accusing suspects remain (framed victims
            # and their framers accuse each other).  One global singleton
            # sweep, least-implicated first, resolves them against the
            # now-maximal trusted base.
            run.passes += 1
            if _singleton_sweep(run):
                continue
        break
    return run.result()


def nlos_baseline(
    e_r: ReportedDistanceMatrix,
    e_n: MeasurementSet,
    m: int,
    seed: int,
) -> frozenset[int]:
    """Rank pairs by squared-distance discrepancy and sample endpoints.

    Endpoint ids enter a candidate pool in rank order; m distinct ids are
    drawn with probability proportional to the reciprocal of the rank at
    which each id first appeared, keeping the largest-error spirit while
    matching the requested sample size.
    """
    if m <= 0:
        return frozenset()
    scored = []
    for (i, j), r in e_n.entries.items():
        gap = abs(r * r - e_r.entries[(i, j)] ** 2) if (i, j) in e_r.entries else np.inf
        scored.append((-gap, i, j))
    scored.sort()
    pool: list[int] = []
    first_rank: dict[int, int] = {}
    for rank, (_, i, j) in enumerate(scored, start=1):
        for v in (i, j):
            if v not in first_rank:
                first_rank[v] = rank
                pool.append(v)
    if m >= len(pool):
        return frozenset(pool)
    weights = np.array([1.0 / first_rank[v] for v in pool])
    rng = seeds.stream(seed, seeds.NLOS_BASELINE)
    picked = rng.choice(len(pool), size=m, replace=False, p=weights / weights.sum())
    return frozenset(pool[int(k)] for k in picked)


def random_baseline(initial_suspected, m: int, seed: int) -> frozenset[int]:
    """Uniform sample of min(m, |suspects|) ids from the initial suspects."""
    ordered = sorted(initial_suspected)
    if m <= 0 or not ordered:
        return frozenset()
    if m >= len(ordered):
        return frozenset(ordered)
    rng = seeds.stream(seed, seeds.RANDOM_BASELINE)
    picked = rng.choice(len(ordered), size=m, replace=False)
    return frozenset(ordered[int(k)] for k in picked)


# ---------------------------------------------------------------------------
# Estimator-style wrappers
# ---------------------------------------------------------------------------

class BaseDetector:
    """Estimator-flavored interface: parameters in the constructor, derived
    state in trailing-underscore attributes, fit/predict verbs.

    ``fit`` runs detection on a scenario; ``predict`` returns one 0/1 label
    per UAV (1 = flagged malicious).  Inputs are scenario graphs rather than
    feature matrices, so validation is done by the package's own helpers.
    """

    _params: tuple[str, ...] = ()

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._params}

    def set_params(self, **params) -> "BaseDetector":
        for name, value in params.items():
            if name not in self._params:
                raise ValueError(f"unknown parameter {name!r} for {type(self).__name__}")
            setattr(self, name, value)
        return self

    def _detect(self, scenario: AttackedScenario, initial: SuspectSets) -> DetectionResult:
        raise NotImplementedError

    def fit(self, scenario: AttackedScenario, initial: SuspectSets | None = None) -> "BaseDetector":
        scenario = check_scenario(scenario)
        if initial is None:
            e_r = build_reported_matrix(scenario)
            initial = initial_suspects(e_r, scenario.measurements, scenario.swarm.comm_range)
        self.initial_ = initial
        self.result_ = self._detect(scenario, initial)
        self.predicted_malicious_ = self.result_.predicted_malicious
        self.n_ = scenario.n
        return self

    def predict(self, scenario: AttackedScenario | None = None) -> np.ndarray:
        if scenario is not None and not hasattr(self, "result_"):
            self.fit(scenario)
        check_is_fitted(self)
        return self.result_.to_labels(self.n_)

    def fit_predict(self, scenario: AttackedScenario, initial: SuspectSets | None = None) -> np.ndarray:
        return self.fit(scenario, initial).predict()

    def score(self, scenario: AttackedScenario) -> float:
        """F1 against the scenario's ground-truth attacker set."""
        check_is_fitted(self)
        return precision_recall_f1(self.predicted_malicious_, check_scenario(scenario).truth())[2]


class _FeasibilityDetector(BaseDetector):
    _params = ("eps", "delta", "window_sq", "paper_replication", "unknown_as_infeasible", "oracle_options")

    def __init__(
        self,
        eps: float | None = None,
        delta: float = sdp.DEFAULT_DELTA,
        window_sq: float | None = None,
        paper_replication: bool = False,
        unknown_as_infeasible: bool = True,
        oracle_options: sdp.OracleOptions | None = None,
    ):
        self.eps = eps
        self.delta = delta
        self.window_sq = window_sq
        self.paper_replication = paper_replication
        self.unknown_as_infeasible = unknown_as_infeasible
        self.oracle_options = oracle_options

    def _options(self) -> DetectorOptions:
        return DetectorOptions(
            oracle=self.oracle_options or sdp.OracleOptions(),
            eps=self.eps,
            delta=self.delta,
            window_sq=self.window_sq,
            paper_replication=self.paper_replication,
            unknown_as_infeasible=self.unknown_as_infeasible,
        )


class CdiDetector(_FeasibilityDetector):
    """Neighborhood-granularity feasibility detector."""

    def _detect(self, scenario, initial):
        return cdi(initial, scenario, self._options())


class EcdiDetector(_FeasibilityDetector):
    """Feasibility detector with per-UAV refinement of failed neighborhoods."""

    def _detect(self, scenario, initial):
        return ecdi(initial, scenario, self._options())


class _SamplingDetector(BaseDetector):
    _params = ("n_malicious", "seed")

    def __init__(self, n_malicious: int, seed: int = 0):
        self.n_malicious = n_malicious
        self.seed = seed


class NlosDetector(_SamplingDetector):
    """Discrepancy-ranked sampling baseline (receives the true attacker count)."""

    def _detect(self, scenario, initial):
        e_r = build_reported_matrix(scenario)
        picked = nlos_baseline(e_r, scenario.measurements, self.n_malicious, self.seed)
        return DetectionResult(picked, iterations=0, oracle_calls=0, per_iteration_trace=())


class RandomDetector(_SamplingDetector):
    """Uniform-sampling baseline over the initial suspects."""

    def _detect(self, scenario, initial):
        picked = random_baseline(initial.suspected, self.n_malicious, self.seed)
        return DetectionResult(picked, iterations=0, oracle_calls=0, per_iteration_trace=())
