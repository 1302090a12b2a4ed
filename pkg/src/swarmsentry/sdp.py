"""Assembly and feasibility checking of the lifted localization problem.

For a chosen sub-network, the question is whether some assignment of actual
positions is simultaneously consistent with every reported position (within a
small displacement budget) and every claimed pairwise distance (within range
and window bounds).  The nonconvex coupling between positions is relaxed by
lifting to a PSD matrix with an identity corner block, turning each distance
expression into a linear trace functional; an infeasible relaxation certifies
the original system infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import conic
from .attacks import AttackedScenario
from .swarm import InvalidParameterError

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
UNKNOWN = "unknown"

# Displacement budget between a UAV's actual and reported position.  The base
# value matches the position-noise variance scale; the default multiplier
# gives honest swarms headroom against their own noise.  Paper-replication
# mode keeps the budget at the base value.
EPSILON_BASE = 1e-6
EPSILON_MULTIPLIER = 10.0

DEFAULT_DELTA = 1e-9


@dataclass(frozen=True)
class OracleOptions:
    max_iterations: int = 20000
    tol_feas: float = 1e-6
    tol_infeas: float = 1e-4
    tol_res: float = 1e-7
    check_every: int = 50


@dataclass(frozen=True)
class FeasibilityProblem:
    """One assembled feasibility instance over a sub-network.

    ``node_order`` fixes the local column mapping (sorted UAV ids);
    ``constraint_pairs`` holds directed claimed measurements with both
    endpoints inside the sub-network, in global ids.
    """

    node_order: tuple[int, ...]
    reported_positions: dict[int, np.ndarray]
    constraint_pairs: tuple[tuple[int, int, float], ...]
    comm_range: float
    epsilon: float
    strictness_margin: float
    window_sq: float

    def __post_init__(self):
        if not self.node_order:
            raise InvalidParameterError("sub-network must be nonempty")
        if self.epsilon < 0 or self.strictness_margin <= 0 or self.comm_range <= 0:
            raise InvalidParameterError("need epsilon >= 0, margin > 0, range > 0")
        members = set(self.node_order)
        for (i, j, r) in self.constraint_pairs:
            if i not in members or j not in members:
                raise InvalidParameterError(f"constraint pair ({i}, {j}) leaves the sub-network")
            if r <= 0:
                raise InvalidParameterError("claimed distances must be positive")

    @property
    def n_sub(self) -> int:
        return len(self.node_order)

    def dimension(self) -> int:
        return 3 + self.n_sub

    def constraint_counts(self) -> dict[str, int]:
        p = len(self.constraint_pairs)
        return {
            "range_upper": p,
            "window_upper": p,
            "window_lower": p,
            "self_upper": self.n_sub,
            "identity_block": 1,
        }

    def compiled(self) -> conic.CompiledConstraints:
        local = {uid: k for k, uid in enumerate(self.node_order)}
        positions = np.array([self.reported_positions[uid] for uid in self.node_order])
        pairs = [(local[i], local[j], r) for (i, j, r) in self.constraint_pairs]
        return conic.compile_constraints(
            positions, pairs, self.comm_range, self.epsilon, self.strictness_margin, self.window_sq
        )


@dataclass(frozen=True)
class OracleResult:
    status: str
    phase1_slack: float
    max_residual: float
    iterations: int
    recovered_positions: dict[int, np.ndarray] | None = None
    rank_gap: float | None = None
    diagnostics: dict[str, float | str] = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


def pair_constraint_matrix(reported_pos: np.ndarray, local_index: int, n_sub: int) -> np.ndarray:
    """Rank-one matrix whose trace product with a lifted matrix evaluates
    the squared distance between column ``local_index`` and ``reported_pos``."""
    if not 0 <= local_index < n_sub:
        raise InvalidParameterError(f"local index {local_index} out of range [0, {n_sub})")
    v = np.zeros(3 + n_sub)
    v[:3] = np.asarray(reported_pos, dtype=float)
    v[3 + local_index] = -1.0
    return np.outer(v, v)


def lift_positions(X: np.ndarray, gram_surplus: np.ndarray | None = None) -> np.ndarray:
    """Lifted matrix [[I3, X^T], [X, X X^T + diag(surplus)]] for positions X (n, 3)."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    Z = np.zeros((3 + n, 3 + n))
    Z[:3, :3] = np.eye(3)
    Z[:3, 3:] = X.T
    Z[3:, :3] = X
    Z[3:, 3:] = X @ X.T
    if gram_surplus is not None:
        Z[3:, 3:][np.diag_indices(n)] += np.maximum(np.asarray(gram_surplus, dtype=float), 0.0)
    return Z


def default_epsilon(paper_replication: bool = False) -> float:
    return EPSILON_BASE if paper_replication else EPSILON_BASE * EPSILON_MULTIPLIER


def assemble(
    sub_ids,
    scenario: AttackedScenario,
    eps: float | None = None,
    delta: float = DEFAULT_DELTA,
    window_sq: float | None = None,
    paper_replication: bool = False,
) -> FeasibilityProblem:
    """Build the feasibility instance for a sub-network of a scenario.

    Constraints cover every directed claimed measurement whose endpoints both
    lie in the sub-network: the claimed distance must sit within the
    acceptance window of the distance to the counterpart's report, and that
    distance must stay within communication range.
    """
    ids = tuple(sorted(set(int(i) for i in sub_ids)))
    if not ids:
        raise InvalidParameterError("sub-network must be nonempty")
    d = scenario.swarm.comm_range
    if eps is None:
        eps = default_epsilon(paper_replication)
    if window_sq is None:
        window_sq = (d / 2.0) ** 2
    members = set(ids)
    pos = {u.id: u.reported_pos for u in scenario.swarm.uavs if u.id in members}
    pairs = tuple(
        (i, j, r)
        for (i, j, r) in scenario.measurements.directed_pairs()
        if i in members and j in members
    )
    return FeasibilityProblem(
        node_order=ids,
        reported_positions=pos,
        constraint_pairs=pairs,
        comm_range=d,
        epsilon=eps,
        strictness_margin=delta,
        window_sq=window_sq,
    )


def check_feasibility(problem: FeasibilityProblem, opts: OracleOptions | None = None) -> OracleResult:
    """Decide feasibility of the lifted relaxation with certified slack bounds.

    The verdict compares two-sided bounds on the optimal phase-I slack (the
    minimal uniform relaxation of all inequality constraints) against the
    tolerances: a witness below ``tol_feas`` proves feasibility, a dual
    certificate above ``tol_infeas`` proves infeasibility, anything else is
    unknown.  Numerical breakdown degrades to unknown, never an exception.
    """
    opts = opts or OracleOptions()
    cons = problem.compiled()
    try:
        state = conic.solve_phase1(
            cons,
            max_iterations=opts.max_iterations,
            tol_feas=opts.tol_feas,
            tol_infeas=opts.tol_infeas,
            check_every=opts.check_every,
        )
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        return OracleResult(
            status=UNKNOWN,
            phase1_slack=np.inf,
            max_residual=np.inf,
            iterations=0,
            diagnostics={"reason": f"numerical breakdown: {exc}"},
        )

    witness = state.witness
    Z = conic.complete_lift(cons, witness.X, witness.s) if witness is not None else None
    max_residual, rank_gap = _residuals(Z)
    diagnostics: dict[str, float | str] = {
        "slack_upper": float(state.upper),
        "slack_lower": float(state.lower),
    }
    if state.notes:
        diagnostics["reason"] = "; ".join(state.notes)

    if state.upper <= opts.tol_feas:
        recovered = {
            uid: witness.X[k].copy() for k, uid in enumerate(problem.node_order)
        }
        return OracleResult(
            status=FEASIBLE,
            phase1_slack=float(state.upper),
            max_residual=max_residual,
            iterations=state.iterations,
            recovered_positions=recovered,
            rank_gap=rank_gap,
            diagnostics=diagnostics,
        )
    if state.lower >= opts.tol_infeas:
        return OracleResult(
            status=INFEASIBLE,
            phase1_slack=float(state.lower),
            max_residual=max_residual,
            iterations=state.iterations,
            rank_gap=rank_gap,
            diagnostics=diagnostics,
        )
    return OracleResult(
        status=UNKNOWN,
        phase1_slack=float(state.upper),
        max_residual=max_residual,
        iterations=state.iterations,
        rank_gap=rank_gap,
        diagnostics=diagnostics,
    )


def _residuals(Z: np.ndarray | None) -> tuple[float, float | None]:
    if Z is None:
        return np.inf, None
    sym = float(np.max(np.abs(Z - Z.T)))
    block = float(np.max(np.abs(Z[:3, :3] - np.eye(3))))
    eigvals = np.linalg.eigvalsh(Z)
    neg = float(max(0.0, -eigvals[0]))
    rank_gap = None
    if len(eigvals) >= 4:
        desc = eigvals[::-1]
        rank_gap = float(desc[3] / desc[2]) if desc[2] > 1e-12 else None
    return max(sym, block, neg), rank_gap
