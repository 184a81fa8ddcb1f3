"""Complete branch-and-bound over relu phases with exact feasibility leaves.

A counterexample query is an input box plus a conjunction of linear output
constraints a violating point must satisfy. The search keeps a per-relu
phase assignment; interval propagation fixes stable phases and prunes, and
branching picks the unstable node with the widest pre-activation interval
(ties to the lowest node index). Once every phase is fixed the network is
affine, so the query becomes exact rational feasibility; any feasible point
is re-executed through the concrete network before a refutation is issued.

Degenerate (single-point) boxes are decided by direct concrete evaluation,
which is what makes L0 robustness queries work on pooling networks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from ..layers import Network, argmax, as_tensor, flatten, run, unflatten
from ..matrix import DimensionError
from ..properties import (
    ACR,
    CR,
    L0,
    LINF,
    LR,
    LinearPredicate,
    ReachSpec,
    RobustnessSpec,
    SR,
    norm_dist,
)
from .feasibility import LinearConstraint, find_feasible_point
from .intervals import Box, propagate
from .lowering import ACTIVE, INACTIVE, affine_forms, lower_network, relu_nodes
from .verdict import Budget, PROVED, REFUTED, SearchStats, TIMEOUT, Verdict


class UnsupportedQueryError(Exception):
    """Robustness/reach query outside the engine's encodable fragment."""


@dataclass(frozen=True)
class _Query:
    """One counterexample search region.

    ``constraints`` is the conjunction of linear output constraints a
    counterexample must satisfy. ``point_check`` replaces the constraints
    for degenerate boxes whose violation condition is not linear (it maps
    concrete outputs to True when they violate the property).
    """

    box: Box
    constraints: tuple = ()
    point_check: object = None
    description: str = ""


def _violates(query: _Query, outputs) -> bool:
    if query.point_check is not None:
        return query.point_check(outputs)
    return all(c.holds(outputs) for c in query.constraints)


def _check_witness(net: Network, query: _Query, point) -> tuple:
    outputs = run(net, unflatten(list(point), net.input_shape))
    if not query.box.contains(point) or not _violates(query, outputs):
        raise RuntimeError("search produced a witness that does not violate the property")
    return tuple(point)


def _constraint_possible(con: LinearConstraint, output_bounds) -> bool:
    lo = hi = Fraction(0)
    for c, (blo, bhi) in zip(con.coeffs, output_bounds):
        if c > 0:
            lo += c * blo
            hi += c * bhi
        elif c < 0:
            lo += c * bhi
            hi += c * blo
    return {
        "<=": lo <= con.rhs,
        "<": lo < con.rhs,
        ">=": hi >= con.rhs,
        ">": hi > con.rhs,
        "==": lo <= con.rhs <= hi,
    }[con.comparator]


def _leaf_constraints(lowered, input_size, box, phases, query):
    pre_forms, out_forms = affine_forms(lowered, input_size, phases)
    cons = []
    for i, (lo, hi) in enumerate(box.bounds):
        unit = tuple(1 if k == i else 0 for k in range(input_size))
        cons.append(LinearConstraint(unit, ">=", lo))
        cons.append(LinearConstraint(unit, "<=", hi))
    for (li, u), phase in phases.items():
        form = pre_forms[li][u]
        cons.append(
            LinearConstraint(form.coeffs, ">=" if phase == ACTIVE else "<=", -form.constant)
        )
    for con in query.constraints:
        coeffs = [Fraction(0)] * input_size
        rhs = Fraction(con.rhs)
        for c, form in zip(con.coeffs, out_forms):
            if c == 0:
                continue
            rhs -= c * form.constant
            for k, ck in enumerate(form.coeffs):
                if ck != 0:
                    coeffs[k] += c * ck
        cons.append(LinearConstraint(tuple(coeffs), con.comparator, rhs))
    return cons


def _solve_query(net: Network, query: _Query, stats: SearchStats, budget: Budget,
                 max_depth=None):
    """Returns (status, witness) with witness set only on a refutation."""
    if budget.exhausted():
        return TIMEOUT, None
    if query.box.is_degenerate:
        stats.nodes_explored += 1
        point = query.box.point()
        outputs = run(net, unflatten(list(point), net.input_shape))
        if _violates(query, outputs):
            return REFUTED, tuple(point)
        return PROVED, None
    if query.point_check is not None:
        raise UnsupportedQueryError("non-linear violation checks need a single-point box")

    lowered, input_size = lower_network(net)
    if len(query.box) != input_size:
        raise DimensionError("verify_reach", f"{input_size} inputs", len(query.box))
    nodes = relu_nodes(lowered)

    stack = [({}, 0)]
    exhausted = False
    while stack:
        if budget.exhausted():
            return TIMEOUT, None
        phases, depth = stack.pop()
        stats.nodes_explored += 1
        stats.max_depth = max(stats.max_depth, depth)
        bounds = propagate(lowered, query.box, phases)
        if bounds.infeasible:
            continue
        if not all(
            _constraint_possible(c, bounds.output_bounds) for c in query.constraints
        ):
            continue
        # Fix phases implied by the bounds, then look for an unstable node.
        phases = dict(phases)
        branch_node = None
        branch_width = None
        for li, u in nodes:
            if (li, u) in phases:
                continue
            lo, hi = bounds.pre_bounds[li][u]
            if lo >= 0:
                phases[(li, u)] = ACTIVE
            elif hi <= 0:
                phases[(li, u)] = INACTIVE
            else:
                width = hi - lo
                if branch_width is None or width > branch_width:
                    branch_width = width
                    branch_node = (li, u)
        if branch_node is None:
            point = find_feasible_point(
                input_size, _leaf_constraints(lowered, input_size, query.box, phases, query)
            )
            if point is not None:
                return REFUTED, _check_witness(net, query, point)
            continue
        if max_depth is not None and depth + 1 > max_depth:
            exhausted = True
            continue
        stats.splits += 1
        inactive = dict(phases)
        inactive[branch_node] = INACTIVE
        active = dict(phases)
        active[branch_node] = ACTIVE
        stack.append((inactive, depth + 1))
        stack.append((active, depth + 1))
    return (TIMEOUT if exhausted else PROVED), None


def _solve(net: Network, queries, timeout_ms=None, max_depth=None) -> Verdict:
    budget = Budget(timeout_ms)
    stats = SearchStats()
    timed_out = False
    for query in queries:
        status, witness = _solve_query(net, query, stats, budget, max_depth)
        if status == REFUTED:
            stats.elapsed_ms = budget.elapsed_ms()
            return Verdict(status=REFUTED, stats=stats, witness=witness)
        if status == TIMEOUT:
            timed_out = True
            break
    stats.elapsed_ms = budget.elapsed_ms()
    return Verdict(status=TIMEOUT if timed_out else PROVED, stats=stats)


def verify_reach_bab(net: Network, spec: ReachSpec, timeout_ms=None, max_depth=None,
                     workers: int = 1) -> Verdict:
    """Decide whether the output predicate holds throughout the input box.

    Complete on termination: proved means no counterexample exists, refuted
    carries a concrete witness, and an exhausted budget yields timeout,
    never a wrong verdict. ``workers`` is validated for interface parity;
    the deterministic work queue runs single-threaded at these scales.
    """
    _check_workers(workers)
    query = _Query(
        box=Box(tuple(spec.bounds)),
        constraints=(_predicate_negation(spec.predicate),),
        description="reach",
    )
    return _solve(net, [query], timeout_ms, max_depth)


def _check_workers(workers: int) -> None:
    if workers < 1:
        raise ValueError(f"workers must be >= 1: {workers}")


def _predicate_negation(predicate: LinearPredicate) -> LinearConstraint:
    neg = predicate.negation()
    return LinearConstraint(neg.coeffs, neg.comparator, neg.threshold)


def _standard_basis(n, i):
    return tuple(1 if k == i else 0 for k in range(n))


def _class_queries(box, n_out, target):
    """Counterexample regions for 'argmax != target' (ties go to low indices)."""
    queries = []
    for j in range(n_out):
        if j == target:
            continue
        diff = tuple(
            (1 if k == j else 0) - (1 if k == target else 0) for k in range(n_out)
        )
        comparator = ">=" if j < target else ">"
        queries.append(
            _Query(
                box=box,
                constraints=(LinearConstraint(diff, comparator, 0),),
                description=f"class {j} overtakes {target}",
            )
        )
    return queries


def _linf_queries(net, ref_flat, spec, box):
    n_out = len(run(net, unflatten(list(ref_flat), net.input_shape)))
    if spec.variant == CR:
        return _class_queries(box, n_out, spec.target_class)
    if spec.variant == ACR:
        target = _standard_basis(n_out, spec.target_class)
        return [
            _Query(box=box, constraints=(LinearConstraint(target, "<", spec.eta),),
                   description="score below eta")
        ]
    if spec.variant == SR:
        if spec.norm != LINF:
            raise UnsupportedQueryError("box-encoded standard robustness needs the linf norm")
        f_ref = run(net, unflatten(list(ref_flat), net.input_shape))
        queries = []
        for i in range(n_out):
            unit = _standard_basis(n_out, i)
            queries.append(
                _Query(box=box, constraints=(LinearConstraint(unit, ">", f_ref[i] + spec.delta),),
                       description=f"output {i} above reference + delta")
            )
            queries.append(
                _Query(box=box, constraints=(LinearConstraint(unit, "<", f_ref[i] - spec.delta),),
                       description=f"output {i} below reference - delta")
            )
        return queries
    raise UnsupportedQueryError(
        "Lipschitz robustness over a box has a non-affine bound; use the L0 route"
    )


def _point_violation_check(net, ref_flat, f_ref, spec, x_flat):
    dist = norm_dist(list(x_flat), list(ref_flat), spec.norm)

    def check(outputs):
        if spec.variant == CR:
            return argmax(list(outputs)) != spec.target_class
        if spec.variant == SR:
            return norm_dist(list(outputs), f_ref, spec.norm) > spec.delta
        if spec.variant == LR:
            return norm_dist(list(outputs), f_ref, spec.norm) > spec.lipschitz_bound * dist
        if spec.variant == ACR:
            return outputs[spec.target_class] < spec.eta
        raise AssertionError(spec.variant)

    return check


def verify_robustness_bab(net: Network, reference, spec: RobustnessSpec,
                          timeout_ms=None, max_depth=None, workers: int = 1) -> Verdict:
    """Reduce a robustness goal to reach queries and run the search.

    Under L0 the epsilon-ball of a binary reference is a finite set of
    flip-sets, each a single-point query; under Linf the ball is one box and
    the variant's negation must be linear (classification, approximate
    classification, standard robustness).
    """
    _check_workers(workers)
    ref_flat = flatten(as_tensor(reference))
    if spec.norm == L0:
        if any(v not in (0, 1) for v in ref_flat):
            raise UnsupportedQueryError("L0 flip-set enumeration needs a binary reference")
        if spec.epsilon != int(spec.epsilon):
            raise UnsupportedQueryError("L0 radius must be an integer flip count")
        f_ref = run(net, reference)
        queries = []
        indices = range(len(ref_flat))
        for size in range(int(spec.epsilon) + 1):
            for flips in combinations(indices, size):
                x = list(ref_flat)
                for i in flips:
                    x[i] = 1 - x[i]
                if not spec.constraint_holds(x):
                    continue
                queries.append(
                    _Query(
                        box=Box(tuple((v, v) for v in x)),
                        point_check=_point_violation_check(net, ref_flat, f_ref, spec, x),
                        description=f"flips {flips}",
                    )
                )
        return _solve(net, queries, timeout_ms, max_depth)
    if spec.input_constraint is not None:
        raise UnsupportedQueryError(
            "discrete input constraints are not box-encodable; use the L0 route"
        )
    box = Box(tuple((v - spec.epsilon, v + spec.epsilon) for v in ref_flat))
    queries = _linf_queries(net, ref_flat, spec, box)
    return _solve(net, queries, timeout_ms, max_depth)
