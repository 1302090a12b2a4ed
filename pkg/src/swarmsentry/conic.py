"""Operator-splitting engine for the lifted localization feasibility problem.

The problem family: find a symmetric PSD matrix Z of size (3 + n) whose
top-left 3x3 block is the identity, subject to interval bounds on the trace
functionals <v v^T, Z> with v = [p_j; -e_i] (p_j a reported position, e_i a
local basis vector).  Functional values equal ||x_i - p_j||^2 + s_i under the
lifting, where x_i is column i of the position block and s_i >= 0 is the
Gram-diagonal surplus, so everything reduces to noisy ball geometry.

The phase-I question "what is the minimal uniform relaxation t that makes the
system feasible" is answered with certified two-sided bounds:

* upper bounds come from explicit witnesses: positions found by cyclic
  projection sweeps, evaluated exactly and completed to an exactly-PSD Z;
* lower bounds come from dual certificates: any nonnegative constraint
  weights summing to one yield, in closed form, a PSD-completable dual
  matrix and therefore a valid bound on the optimal slack;
* in between, a parameter-free consensus ADMM on Z (parallel projections
  onto the PSD cone, the identity block, and each slab, with dual updates)
  refines both sides.

Everything is deterministic: fixed iteration counts, fixed sweep orders, no
time-based decisions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_BISECT_STEPS = 80
_POCS_SWEEPS = 150
_ASCENT_STEPS = 300


@dataclass
class CompiledConstraints:
    """Local-index constraint family for one sub-network.

    Functionals are ordered pairs first, then one self functional per node.
    ``anchor[q]`` is the position the functional measures against (reported
    position of the pair counterpart, or the node's own report), ``owner[q]``
    the local index of the node whose position enters the functional.
    """

    n: int                      # sub-network size
    positions: np.ndarray       # (n, 3) reported positions, local order
    owner: np.ndarray           # (q,) int
    anchor: np.ndarray          # (q, 3)
    hi: np.ndarray              # (q,) upper bounds
    lo: np.ndarray              # (q,) lower bounds (-inf where absent)
    epsilon: float
    n_pairs: int

    @property
    def q(self) -> int:
        return len(self.owner)

    def dim(self) -> int:
        return 3 + self.n

    def functional_vectors(self) -> np.ndarray:
        """(q, 3+n) stacked v = [anchor; -e_owner] vectors."""
        V = np.zeros((self.q, self.dim()))
        V[:, :3] = self.anchor
        V[np.arange(self.q), 3 + self.owner] = -1.0
        return V

    def values_at(self, X: np.ndarray, s: np.ndarray | None = None) -> np.ndarray:
        """Functional values ||x_owner - anchor||^2 (+ s_owner) for positions X (n,3)."""
        diff = X[self.owner] - self.anchor
        vals = (diff * diff).sum(axis=1)
        if s is not None:
            vals = vals + s[self.owner]
        return vals

    def max_violation(self, X: np.ndarray, s: np.ndarray | None = None) -> float:
        vals = self.values_at(X, s)
        over = vals - self.hi
        under = self.lo - vals
        return float(np.max(np.maximum(over, under)))


def compile_constraints(
    positions: np.ndarray,
    pairs: list[tuple[int, int, float]],
    comm_range: float,
    epsilon: float,
    delta: float,
    window_sq: float,
) -> CompiledConstraints:
    """Build the slab family: range and window bounds per measured pair, a
    displacement bound per node."""
    n = len(positions)
    owner, anchor, hi, lo = [], [], [], []
    for (i, j, r) in pairs:
        owner.append(i)
        anchor.append(positions[j])
        hi.append(min(comm_range**2 - delta, r * r + window_sq - delta))
        lo.append(r * r - window_sq + delta)
    for i in range(n):
        owner.append(i)
        anchor.append(positions[i])
        hi.append(epsilon)
        lo.append(-np.inf)
    return CompiledConstraints(
        n=n,
        positions=np.asarray(positions, dtype=float),
        owner=np.asarray(owner, dtype=int),
        anchor=np.asarray(anchor, dtype=float) if anchor else np.zeros((0, 3)),
        hi=np.asarray(hi, dtype=float),
        lo=np.asarray(lo, dtype=float),
        epsilon=epsilon,
        n_pairs=len(pairs),
    )


# ---------------------------------------------------------------------------
# Lower bounds on the phase-I slack
# ---------------------------------------------------------------------------

def pairwise_slack_bound(cons: CompiledConstraints) -> float:
    """Certified lower bound on the optimal slack from single-pair analysis.

    Nonnegative by construction; zero is vacuous (no violation provable this
    way), any positive value is a valid bound.

    For a relaxation t, any lifted solution confines x_i to a ball of radius
    sqrt(eps + t) around the node's report and allows a Gram surplus of at
    most eps + t, so each pair functional is boxed into an interval around
    the reported separation.  The minimal t making every such interval meet
    its [lo, hi] slab (and the slab nonempty) is a valid bound.  Vectorized
    bisection; exact monotonicity makes the result certified.
    """
    if cons.n_pairs == 0:
        return 0.0
    sl = slice(0, cons.n_pairs)
    D = np.linalg.norm(cons.positions[cons.owner[sl]] - cons.anchor[sl], axis=1)
    hi, lo = cons.hi[sl], cons.lo[sl]
    eps = cons.epsilon

    def satisfied(t: np.ndarray) -> np.ndarray:
        radius = np.sqrt(eps + t)
        amin = np.maximum(0.0, D - radius) ** 2
        amax = (D + radius) ** 2 + eps + t
        ok_upper = amin <= hi + t
        ok_lower = amax >= lo - t
        ok_nonempty = lo - t <= hi + t
        return ok_upper & ok_lower & ok_nonempty

    t_lo = np.zeros_like(D)
    if bool(np.all(satisfied(t_lo))):
        return 0.0
    t_hi = np.full_like(D, 10.0 * (1.0 + float(np.max(np.abs(lo))) + float(np.max(D)) ** 2))
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (t_lo + t_hi)
        ok = satisfied(mid)
        t_lo = np.where(ok, t_lo, mid)
        t_hi = np.where(ok, mid, t_hi)
    # t_lo is infeasible-side everywhere it moved: a valid lower bound.
    return float(np.max(t_lo))


def _node_functionals(cons: CompiledConstraints, node: int) -> np.ndarray:
    return np.nonzero(cons.owner == node)[0]


def _dual_bound_for_weights(
    cons: CompiledConstraints, idx: np.ndarray, w_up: np.ndarray, w_lo: np.ndarray
) -> float:
    """Evaluate the certified slack bound for one node's dual weights.

    Weights must be nonnegative and sum to one.  The bound comes from the
    rank-one PSD completion of the compressed 4x4 dual matrix; validity needs
    only the weight normalization and a positive corner coefficient.
    """
    anchors = cons.anchor[idx]
    sq = (anchors * anchors).sum(axis=1)
    sigma = w_up - w_lo
    c = float(np.sum(sigma))
    if c <= 1e-14:
        return -np.inf
    b = -(sigma[:, None] * anchors).sum(axis=0)
    trace_a = float(np.dot(sigma, sq))
    lin = float(np.dot(w_lo, np.where(np.isfinite(cons.lo[idx]), cons.lo[idx], 0.0))
                - np.dot(w_up, cons.hi[idx]))
    return lin + trace_a - float(np.dot(b, b)) / c


def _ascend_node_weights(
    cons: CompiledConstraints, idx: np.ndarray, w0: np.ndarray, steps: int
) -> float:
    """Exponentiated-gradient ascent of the concave node dual from one start.

    The gradient of the bound at weights w is exactly the vector of
    constraint violations evaluated at the implied position p = -b/c, so the
    multiplicative update concentrates weight on conflicting constraints.
    """
    k = len(idx)
    has_lo = np.isfinite(cons.lo[idx])
    anchors = cons.anchor[idx]
    lo = np.where(has_lo, cons.lo[idx], 0.0)
    hi = cons.hi[idx]
    mask = np.concatenate([np.ones(k, bool), has_lo])

    def rebalance(w: np.ndarray) -> np.ndarray:
        """Keep the corner coefficient positive by topping up the self weight."""
        w = np.where(mask, np.maximum(w, 0.0), 0.0)
        total = float(w.sum())
        if total <= 0:
            w = mask.astype(float)
            total = float(w.sum())
        w /= total
        c = float(w[:k].sum() - w[k:].sum())
        if c < 0.02:
            w[k - 1] += 0.02 - c  # self functional is always index k-1 of the ups
            w /= w.sum()
        return w

    w = rebalance(w0.copy())
    best = _dual_bound_for_weights(cons, idx, w[:k], w[k:])
    for it in range(steps):
        sigma = w[:k] - w[k:]
        c = float(np.sum(sigma))
        if c <= 1e-14:
            w = rebalance(w)
            continue
        b = -(sigma[:, None] * anchors).sum(axis=0)
        p = -b / c
        dist_sq = ((anchors - p) ** 2).sum(axis=1)
        grad = np.concatenate([dist_sq - hi, np.where(has_lo, lo - dist_sq, -np.inf)])
        finite = np.isfinite(grad)
        scale = float(np.max(np.abs(grad[finite]), initial=0.0))
        if scale <= 0:
            break
        eta = 1.0 / (scale * (1.0 + it / 60.0))
        w = w * np.exp(np.clip(eta * np.where(finite, grad, -50.0 * scale), -0.3, 0.3))
        w = rebalance(w)
        cand = _dual_bound_for_weights(cons, idx, w[:k], w[k:])
        if cand > best:
            best = cand
    return best


def node_dual_bound(
    cons: CompiledConstraints,
    node: int,
    seed_weights: np.ndarray | None = None,
    steps: int = _ASCENT_STEPS,
) -> float:
    """Best certified slack bound for one node's constraint family.

    Runs the concave ascent from a few deterministic starts (uniform, the
    lower-bound-heavy corner, and optionally weights harvested from the
    matrix iteration's duals) and keeps the best certified value.
    """
    idx = _node_functionals(cons, node)
    k = len(idx)
    has_lo = np.isfinite(cons.lo[idx])
    # Violation profile at the node's own report: the natural certificate point.
    anchors = cons.anchor[idx]
    here = cons.positions[node]
    dist_sq = ((anchors - here) ** 2).sum(axis=1)
    up_viol = np.maximum(dist_sq - cons.hi[idx], 0.0)
    lo_viol = np.maximum(np.where(has_lo, cons.lo[idx] - dist_sq, -np.inf), 0.0)

    starts = [np.ones(2 * k)]
    profile = np.concatenate([up_viol, lo_viol]) + 1e-3 * max(
        1e-12, float(up_viol.max(initial=0.0)), float(lo_viol.max(initial=0.0))
    )
    # Give the self functional enough mass that the corner coefficient starts
    # positive regardless of how lower-bound-heavy the profile is.
    profile[k - 1] = max(profile[k - 1], float(profile[k:].sum()) * 1.1 - float(profile[:k].sum()))
    starts.append(profile)
    if seed_weights is not None and float(seed_weights.sum()) > 0:
        seeded = seed_weights.copy()
        seeded[k - 1] = max(
            seeded[k - 1], float(seeded[k:].sum()) * 1.1 - float(seeded[:k].sum())
        )
        starts.append(seeded)
    best = -np.inf
    for w0 in starts:
        best = max(best, _ascend_node_weights(cons, idx, w0, steps))
    return best


def dual_slack_bound(
    cons: CompiledConstraints,
    nodes: np.ndarray | None = None,
    slab_duals: np.ndarray | None = None,
    steps: int = _ASCENT_STEPS,
) -> float:
    """Certified lower bound on the optimal slack: best single-node certificate.

    Floored at zero like the pairwise bound: only positive values carry
    information.

    ``slab_duals`` optionally carries the per-functional displacement scalars
    from the consensus iteration; their signs indicate which bound of each
    slab is active and seed the ascent.
    """
    if nodes is None:
        nodes = np.arange(cons.n)
    best = 0.0
    for node in nodes:
        seed = None
        if slab_duals is not None:
            idx = _node_functionals(cons, int(node))
            seed = np.concatenate([
                np.maximum(-slab_duals[idx], 0.0),
                np.maximum(slab_duals[idx], 0.0),
            ])
        best = max(best, node_dual_bound(cons, int(node), seed, steps))
    return best


# ---------------------------------------------------------------------------
# Witness search (upper bounds)
# ---------------------------------------------------------------------------

def refine_witness(cons: CompiledConstraints, X0: np.ndarray) -> np.ndarray:
    """Cyclic projection sweeps, per node, toward constraint satisfaction.

    Each node's feasible region is (ball around its report) intersected with
    spherical shells around pair anchors.  Shell projections are radial and
    closed-form; the outer-ball part of a shell is nonconvex, so this is a
    heuristic search whose output is only ever used after exact evaluation.
    """
    X = np.array(X0, dtype=float)
    eps_r = np.sqrt(cons.epsilon)
    for node in range(cons.n):
        idx = [int(q) for q in _node_functionals(cons, node) if q < cons.n_pairs]
        if not idx:
            X[node] = cons.positions[node]
            continue
        center = cons.positions[node]
        x = X[node].copy()
        anchors = cons.anchor[idx]
        rmin = np.sqrt(np.maximum(0.0, cons.lo[idx]))
        rmax = np.sqrt(np.maximum(0.0, cons.hi[idx]))
        for _ in range(_POCS_SWEEPS):
            moved = 0.0
            # own displacement ball
            delta = x - center
            dist = np.linalg.norm(delta)
            if dist > eps_r:
                x = center + delta * (eps_r / dist)
                moved = max(moved, dist - eps_r)
            # pair shells
            for a, r0, r1 in zip(anchors, rmin, rmax):
                u = x - a
                r = np.linalg.norm(u)
                if r > r1:
                    x = a + u * (r1 / r)
                    moved = max(moved, r - r1)
                elif r < r0:
                    if r < 1e-15:
                        direction = center - a
                        norm = np.linalg.norm(direction)
                        direction = direction / norm if norm > 1e-15 else np.array([1.0, 0.0, 0.0])
                    else:
                        direction = u / r
                    x = a + direction * r0
                    moved = max(moved, r0 - r)
            if moved < 1e-15:
                break
        # Retract toward the node's report as far as its constraints allow:
        # cyclic projection can settle deeper into the displacement ball than
        # necessary, and recovered positions should hug the reports.
        offset = x - center
        length = np.linalg.norm(offset)
        if length > 1e-15:
            taus = np.linspace(0.0, 1.0, 33)
            cands = center + taus[:, None] * offset
            d_anchor = np.linalg.norm(cands[:, None, :] - anchors[None, :, :], axis=2)
            ok = np.all((d_anchor >= rmin - 1e-15) & (d_anchor <= rmax + 1e-15), axis=1)
            ok &= taus * length <= eps_r + 1e-15
            hit = np.nonzero(ok)[0]
            if len(hit):
                x = cands[hit[0]]
        X[node] = x
    return X


def best_gram_surplus(cons: CompiledConstraints, X: np.ndarray) -> np.ndarray:
    """Per-node Gram surplus minimizing the worst violation at positions X.

    Violations are piecewise linear in the surplus s_i: upper ones grow,
    lower ones shrink, and s_i is capped by the node's displacement budget.
    The minimizer of the max is the midpoint of the binding envelope, clamped
    to the budget.
    """
    vals = cons.values_at(X)
    over = vals - cons.hi
    under = np.where(np.isfinite(cons.lo), cons.lo - vals, -np.inf)
    s = np.zeros(cons.n)
    for node in range(cons.n):
        idx = _node_functionals(cons, node)
        if len(idx) < 2:
            continue
        # All upper-side terms (including the node's own displacement bound)
        # grow with s, the lower-side terms shrink; the minimizer of the max
        # is the midpoint of the two envelopes.
        upper_env = float(np.max(over[idx]))
        lower_env = float(np.max(under[idx]))
        if np.isfinite(lower_env) and lower_env > upper_env:
            s[node] = (lower_env - upper_env) / 2.0
    return s


def complete_lift(cons: CompiledConstraints, X: np.ndarray, s: np.ndarray | None = None) -> np.ndarray:
    """Exactly-PSD lifted matrix with identity block, from explicit positions.

    The Gram block is X X^T plus a nonnegative diagonal, so positive
    semidefiniteness holds by construction (Schur complement is diag(s)).
    """
    n = cons.n
    Z = np.zeros((3 + n, 3 + n))
    Z[:3, :3] = np.eye(3)
    Z[:3, 3:] = X.T
    Z[3:, :3] = X
    Z[3:, 3:] = X @ X.T
    if s is not None:
        Z[3:, 3:][np.diag_indices(n)] += np.maximum(s, 0.0)
    return Z


@dataclass
class WitnessResult:
    X: np.ndarray
    s: np.ndarray
    slack: float          # exact max violation with the surplus applied

    def violated_nodes(self, cons: CompiledConstraints, cut: float = 0.0) -> np.ndarray:
        vals = cons.values_at(self.X, self.s)
        bad = (vals - cons.hi > cut) | (cons.lo - vals > cut)
        return np.unique(cons.owner[bad])


def evaluate_witness(cons: CompiledConstraints, X: np.ndarray) -> WitnessResult:
    s = best_gram_surplus(cons, X)
    return WitnessResult(X=X, s=s, slack=cons.max_violation(X, s))


# ---------------------------------------------------------------------------
# Consensus ADMM on the lifted matrix
# ---------------------------------------------------------------------------

@dataclass
class SolveState:
    """Bookkeeping for a phase-I solve."""

    iterations: int = 0
    upper: float = np.inf
    lower: float = 0.0
    witness: WitnessResult | None = None
    stalled: bool = False
    notes: list[str] = field(default_factory=list)


class ConsensusSolver:
    """Parallel-projection ADMM over (PSD cone, identity block, slabs).

    The consensus variable is the lifted matrix itself.  Each slab set only
    ever moves the iterate along its rank-one functional direction, so the
    per-set dual states reduce to one scalar each; the PSD cone and the
    identity block keep dense dual blocks.  The scheme is parameter-free in
    its scaled-dual form.
    """

    def __init__(self, cons: CompiledConstraints):
        self.cons = cons
        self.dim = cons.dim()
        self.V = cons.functional_vectors()
        self.gnorm = (self.V * self.V).sum(axis=1)       # ||v||^2 = Frobenius norm of v v^T
        self.lo_z = np.where(np.isfinite(cons.lo), cons.lo, -np.inf) / self.gnorm
        self.hi_z = cons.hi / self.gnorm
        self.K = cons.q + 2
        X0 = cons.positions
        self.Z = complete_lift(cons, X0)
        self.Z_prev = self.Z.copy()
        self.s_slab = np.zeros(cons.q)                   # scalar dual per slab
        self.S_psd = np.zeros((self.dim, self.dim))
        self.S_block = np.zeros((3, 3))

    def iterate(self, steps: int) -> None:
        for _ in range(steps):
            C = 2.0 * self.Z - self.Z_prev

            # PSD cone projection (eigenvalue clipping) of C - S_psd.
            arg = C - self.S_psd
            arg = 0.5 * (arg + arg.T)
            vals, vecs = np.linalg.eigh(arg)
            clipped = np.maximum(vals, 0.0)
            x_psd = (vecs * clipped) @ vecs.T
            p_psd = x_psd - arg

            # Identity block projection.
            arg_blk = C[:3, :3] - self.S_block
            p_blk = np.eye(3) - arg_blk

            # Slab projections along each functional direction.
            zeta = np.einsum("qi,ij,qj->q", self.V, C, self.V) / self.gnorm - self.s_slab
            target = np.clip(zeta, self.lo_z, self.hi_z)
            p_slab = target - zeta

            # Consensus average of the projection displacements.
            mean_p = p_psd.copy()
            mean_p[:3, :3] += p_blk
            scaled = self.V * (p_slab / self.gnorm)[:, None]
            mean_p += scaled.T @ self.V
            mean_p /= self.K
            mean_p = 0.5 * (mean_p + mean_p.T)

            self.Z_prev = self.Z
            self.Z = self.Z + mean_p
            self.S_psd = p_psd
            self.S_block = p_blk
            self.s_slab = p_slab

    def movement(self) -> float:
        return float(np.max(np.abs(self.Z - self.Z_prev)))

    def position_estimate(self) -> np.ndarray:
        return self.Z[3:, :3].copy()

    def active_nodes(self) -> np.ndarray:
        """Nodes whose slab duals are non-negligible: dual certificate candidates."""
        weight = np.abs(self.s_slab)
        if float(np.max(weight, initial=0.0)) <= 0.0:
            return np.arange(self.cons.n)
        cutoff = 1e-6 * float(np.max(weight))
        nodes = np.unique(self.cons.owner[weight > cutoff])
        return nodes if len(nodes) else np.arange(self.cons.n)


def solve_phase1(
    cons: CompiledConstraints,
    max_iterations: int,
    tol_feas: float,
    tol_infeas: float,
    check_every: int = 50,
) -> SolveState:
    """Two-sided phase-I solve: certified upper/lower slack bounds with early exit."""
    state = SolveState()

    state.lower = pairwise_slack_bound(cons)
    witness = evaluate_witness(cons, refine_witness(cons, cons.positions))
    state.witness = witness
    state.upper = witness.slack
    if state.lower >= tol_infeas or state.upper <= tol_feas:
        return state
    # Per-node certificates for the nodes the witness search failed on: cheap
    # relative to the matrix iteration.
    state.lower = max(state.lower, dual_slack_bound(cons, witness.violated_nodes(cons)))
    if state.lower >= tol_infeas:
        return state
    if state.lower > tol_feas and state.upper < tol_infeas:
        state.notes.append("slack bracketed inside tolerance gap")
        return state

    solver = ConsensusSolver(cons)
    while state.iterations < max_iterations:
        steps = min(check_every, max_iterations - state.iterations)
        solver.iterate(steps)
        state.iterations += steps

        cand = evaluate_witness(cons, refine_witness(cons, solver.position_estimate()))
        if cand.slack < state.upper:
            state.upper = cand.slack
            state.witness = cand
        state.lower = max(
            state.lower,
            dual_slack_bound(cons, solver.active_nodes(), slab_duals=solver.s_slab, steps=120),
        )

        if state.upper <= tol_feas or state.lower >= tol_infeas:
            return state
        if state.lower > tol_feas and state.upper < tol_infeas:
            state.notes.append("slack bracketed inside tolerance gap")
            return state
        if solver.movement() < 1e-14:
            state.stalled = True
            state.notes.append("consensus iteration stalled")
            return state
    state.notes.append("iteration budget exhausted")
    return state
