"""Detection quality metrics."""

from __future__ import annotations

from .suspects import SuspectSets


def precision_recall_f1(predicted: frozenset[int] | set[int], truth: frozenset[int] | set[int]) -> tuple[float, float, float]:
    """Precision, recall, and F1 of a predicted attacker set.

    Empty-set conventions: both empty -> (1, 1, 1); empty prediction against a
    nonempty truth -> (1, 0, 0); nonempty prediction against empty truth ->
    (0, 1, 0).  F1 is 0 whenever P + R is 0.
    """
    predicted, truth = set(predicted), set(truth)
    hit = len(predicted & truth)
    if not predicted and not truth:
        return 1.0, 1.0, 1.0
    precision = hit / len(predicted) if predicted else 1.0
    recall = hit / len(truth) if truth else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def malicious_ratio(initial: SuspectSets) -> float:
    """Fraction of the swarm suspected at initialization."""
    return len(initial.suspected) / initial.n
