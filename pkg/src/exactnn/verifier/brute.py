"""Exhaustive epsilon-ball verification for binary input domains."""

from __future__ import annotations

from itertools import combinations

from ..layers import Network, Tensor, as_tensor, flatten, unflatten
from ..properties import L0, RobustnessSpec, eval_robustness
from .verdict import Budget, PROVED, REFUTED, SearchStats, TIMEOUT, Verdict


def enumerate_ball(reference, epsilon: int, norm: str = L0):
    """All inputs within L0 distance epsilon of a binary reference, each once.

    Yields tensors of the reference's shape, in deterministic order: flip-set
    size ascending, flip positions lexicographic. The reference itself comes
    first.
    """
    if norm != L0:
        raise ValueError(f"only the L0 ball is enumerable, got {norm!r}")
    if epsilon < 0 or epsilon != int(epsilon):
        raise ValueError(f"epsilon must be a nonnegative integer: {epsilon!r}")
    tensor = as_tensor(reference)
    ref = flatten(tensor)
    if any(v not in (0, 1) for v in ref):
        raise ValueError("reference must be binary")
    shape = tensor.shape
    for size in range(int(epsilon) + 1):
        for flips in combinations(range(len(ref)), size):
            x = list(ref)
            for i in flips:
                x[i] = 1 - x[i]
            yield unflatten(x, shape)


def verify_robustness_brute(net: Network, reference, spec: RobustnessSpec,
                            timeout_ms=None) -> Verdict:
    """Check the robustness implication at every point of the epsilon ball.

    Proved iff the implication holds everywhere; otherwise refuted with the
    first violating input (which concretely violates by construction).
    """
    budget = Budget(timeout_ms)
    stats = SearchStats()
    for candidate in enumerate_ball(reference, int(spec.epsilon), spec.norm):
        if budget.exhausted():
            stats.elapsed_ms = budget.elapsed_ms()
            return Verdict(status=TIMEOUT, stats=stats)
        stats.nodes_explored += 1
        if not eval_robustness(net, reference, spec, candidate):
            stats.elapsed_ms = budget.elapsed_ms()
            return Verdict(
                status=REFUTED, stats=stats, witness=tuple(flatten(candidate))
            )
    stats.elapsed_ms = budget.elapsed_ms()
    return Verdict(status=PROVED, stats=stats)
