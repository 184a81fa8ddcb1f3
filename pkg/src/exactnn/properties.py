"""Executable verification properties.

Covers the four robustness variants (classification, standard, Lipschitz,
approximate-classification), reachability specs over input boxes with linear
output predicates, pointwise order/positivity predicates, pooling-pattern
predicates, and the extreme-values machinery relating classifier weight rows
to dot-product ordering.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .layers import Network, Tensor, argmax, as_tensor, flatten, run
from .matrix import DimensionError, Matrix, Scalar, Vector, dot_product, parse_scalar, scalar_to_text

L0 = "l0"
LINF = "linf"
NORMS = (L0, LINF)

CR = "cr"
SR = "sr"
LR = "lr"
ACR = "acr"
VARIANTS = (CR, SR, LR, ACR)

ACAS_INPUT_NAMES = ("dist", "angle", "angle_int", "vown", "vint")


def norm_dist(x: Vector, y: Vector, norm: str = L0) -> Scalar:
    """L0 = number of differing coordinates; Linf = max absolute difference."""
    if len(x) != len(y):
        raise DimensionError("norm_dist", f"length {len(x)}", f"length {len(y)}")
    if norm == L0:
        return sum(1 for a, b in zip(x, y) if a != b)
    if norm == LINF:
        return max((abs(a - b) for a, b in zip(x, y)), default=0)
    raise ValueError(f"unknown norm: {norm!r}")


def binary_constraint(values: Vector) -> bool:
    return all(v in (0, 1) for v in values)


INPUT_CONSTRAINTS = {
    None: lambda values: True,
    "binary": binary_constraint,
}


@dataclass(frozen=True)
class RobustnessSpec:
    """One robustness goal around a reference input.

    epsilon bounds the input perturbation in the chosen norm; delta,
    lipschitz_bound and eta parametrise the standard, Lipschitz and
    approximate-classification variants; target_class names the class the
    classification variants protect.
    """

    variant: str
    epsilon: Scalar
    delta: Scalar = None
    lipschitz_bound: Scalar = None
    eta: Scalar = None
    target_class: int = None
    norm: str = L0
    input_constraint: str = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant: {self.variant!r}")
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm: {self.norm!r}")
        if self.epsilon is None or self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative: {self.epsilon!r}")
        required = {
            CR: ("target_class",),
            SR: ("delta",),
            LR: ("lipschitz_bound",),
            ACR: ("target_class", "eta"),
        }[self.variant]
        for name in required:
            value = getattr(self, name)
            if value is None:
                raise ValueError(f"variant {self.variant!r} requires {name}")
            if name != "target_class" and value < 0:
                raise ValueError(f"{name} must be nonnegative: {value!r}")
        if self.input_constraint not in INPUT_CONSTRAINTS:
            raise ValueError(f"unknown input constraint: {self.input_constraint!r}")

    def constraint_holds(self, values: Vector) -> bool:
        return INPUT_CONSTRAINTS[self.input_constraint](values)


def eval_robustness(net: Network, reference, spec: RobustnessSpec, candidate) -> bool:
    """Evaluate the variant's implication at the single point ``candidate``.

    The antecedent conjoins the input constraint with the epsilon-ball
    membership, so points outside the ball (or outside the constraint)
    satisfy the property vacuously.
    """
    ref = flatten(as_tensor(reference))
    x = flatten(as_tensor(candidate))
    dist = norm_dist(x, ref, spec.norm)
    if not (spec.constraint_holds(x) and dist <= spec.epsilon):
        return True
    fx = run(net, candidate)
    if spec.variant == CR:
        return argmax(fx) == spec.target_class
    f_ref = run(net, reference)
    if spec.variant == SR:
        return norm_dist(fx, f_ref, spec.norm) <= spec.delta
    if spec.variant == LR:
        return norm_dist(fx, f_ref, spec.norm) <= spec.lipschitz_bound * dist
    if spec.variant == ACR:
        return fx[spec.target_class] >= spec.eta
    raise AssertionError(spec.variant)


# -- reachability -------------------------------------------------------------


@dataclass(frozen=True)
class LinearPredicate:
    """coeffs . outputs  <comparator>  threshold."""

    coeffs: tuple
    comparator: str
    threshold: Scalar

    _NEGATIONS = {"<=": ">", ">": "<=", ">=": "<", "<": ">="}

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if self.comparator not in self._NEGATIONS:
            raise ValueError(f"unknown comparator: {self.comparator!r}")

    def holds(self, outputs: Vector) -> bool:
        value = dot_product(list(self.coeffs), list(outputs))
        return {
            "<=": value <= self.threshold,
            "<": value < self.threshold,
            ">=": value >= self.threshold,
            ">": value > self.threshold,
        }[self.comparator]

    def negation(self) -> "LinearPredicate":
        return LinearPredicate(self.coeffs, self._NEGATIONS[self.comparator], self.threshold)


@dataclass(frozen=True)
class ReachSpec:
    """Input box plus a linear output predicate that must hold throughout."""

    bounds: tuple  # per input: (lo, hi)
    predicate: LinearPredicate
    input_names: tuple = ()
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        bounds = tuple((lo, hi) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        for lo, hi in bounds:
            if lo > hi:
                raise ValueError(f"empty bound: [{lo}, {hi}]")

    @property
    def num_inputs(self) -> int:
        return len(self.bounds)

    def contains(self, values: Vector) -> bool:
        return len(values) == len(self.bounds) and all(
            lo <= v <= hi for v, (lo, hi) in zip(values, self.bounds)
        )


def reach_spec_to_document(spec: ReachSpec) -> dict:
    doc = {
        "kind": "reach",
        "inputs": [
            {
                **({"name": spec.input_names[i]} if spec.input_names else {}),
                "lo": scalar_to_text(lo),
                "hi": scalar_to_text(hi),
            }
            for i, (lo, hi) in enumerate(spec.bounds)
        ],
        "output_predicate": {
            "coeffs": [scalar_to_text(c) for c in spec.predicate.coeffs],
            "comparator": spec.predicate.comparator,
            "threshold": scalar_to_text(spec.predicate.threshold),
        },
    }
    if spec.constants:
        doc["constants"] = {k: scalar_to_text(v) for k, v in spec.constants.items()}
    return doc


def reach_spec_from_document(doc: dict) -> ReachSpec:
    inputs = doc["inputs"]
    bounds = [(parse_scalar(e["lo"]), parse_scalar(e["hi"])) for e in inputs]
    names = tuple(e["name"] for e in inputs) if all("name" in e for e in inputs) else ()
    pred = doc["output_predicate"]
    predicate = LinearPredicate(
        coeffs=tuple(parse_scalar(c) for c in pred["coeffs"]),
        comparator=pred["comparator"],
        threshold=parse_scalar(pred["threshold"]),
    )
    constants = {k: parse_scalar(v) for k, v in doc.get("constants", {}).items()}
    return ReachSpec(bounds=tuple(bounds), predicate=predicate, input_names=names, constants=constants)


def robustness_spec_to_document(spec: RobustnessSpec) -> dict:
    doc = {"kind": "robustness", "variant": spec.variant, "norm": spec.norm,
           "epsilon": scalar_to_text(spec.epsilon)}
    for name in ("delta", "lipschitz_bound", "eta"):
        value = getattr(spec, name)
        if value is not None:
            doc[name] = scalar_to_text(value)
    if spec.target_class is not None:
        doc["target_class"] = spec.target_class
    if spec.input_constraint is not None:
        doc["input_constraint"] = spec.input_constraint
    return doc


def robustness_spec_from_document(doc: dict) -> RobustnessSpec:
    def opt(name):
        return parse_scalar(doc[name]) if name in doc else None

    return RobustnessSpec(
        variant=doc["variant"],
        epsilon=parse_scalar(doc["epsilon"]),
        delta=opt("delta"),
        lipschitz_bound=opt("lipschitz_bound"),
        eta=opt("eta"),
        target_class=doc.get("target_class"),
        norm=doc.get("norm", L0),
        input_constraint=doc.get("input_constraint"),
    )


def load_property_spec(path):
    """Load a reach or robustness spec from its JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    kind = doc.get("kind", "reach")
    if kind == "reach":
        return reach_spec_from_document(doc)
    if kind == "robustness":
        return robustness_spec_from_document(doc)
    raise ValueError(f"unknown property kind: {kind!r}")


def save_property_spec(spec, path) -> None:
    doc = (
        reach_spec_to_document(spec)
        if isinstance(spec, ReachSpec)
        else robustness_spec_to_document(spec)
    )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def acas_phi1(path=None) -> ReachSpec:
    """The first collision-avoidance reachability property.

    The triggering precondition fixes dist >= 55948, vown >= 1145 and
    vint <= 60; the goal is that the first output score stays <= 1500.
    Bounds for the remaining inputs come from the property file (the shipped
    defaults are non-normative placeholders for the published ranges).
    """
    if path is not None:
        spec = load_property_spec(path)
    else:
        text = resources.files("exactnn.data").joinpath("acas_phi1.json").read_text("utf-8")
        doc = json.loads(text)
        spec = reach_spec_from_document(doc)
    if not isinstance(spec, ReachSpec):
        raise ValueError("phi1 property file must hold a reach spec")
    return spec


# -- pointwise predicates ------------------------------------------------------


def gte(v1: Vector, v2: Vector) -> bool:
    """Pointwise greater-or-equal on equally long vectors."""
    if len(v1) != len(v2):
        raise DimensionError("gte", f"length {len(v1)}", f"length {len(v2)}")
    return all(a >= b for a, b in zip(v1, v2))


def positive(obj) -> bool:
    """All entries >= 0; accepts scalars, vectors, matrices, tensors, nests."""
    if isinstance(obj, Matrix):
        return all(v >= 0 for _, v in obj.nonzero_items())
    if isinstance(obj, Tensor):
        channels = obj.channels if not obj.is_flat else None
        return positive(list(obj.vector)) if obj.is_flat else all(
            positive(ch) for ch in channels
        )
    if isinstance(obj, (list, tuple)):
        return all(positive(v) for v in obj)
    return obj >= 0


# -- pooling pattern predicates ------------------------------------------------
#
# The 2x2 predicates are strict-maximum line templates over
#
#     [[tl, tr],
#      [bl, br]]
#
# left_vertical:     tl > tr and bl > br        (left column dominates)
# bottom_horizontal: bl > tl and br > tr        (bottom row dominates)
# left_diagonal:     min(tl, br) > max(tr, bl)  (main diagonal dominates)
# is_topright_corner:   tr strictly exceeds tl, bl, br
# is_bottomleft_angle:  bl strictly exceeds tl, tr, br
#
# Wrongly shaped inputs make every predicate false rather than erroring.


def _cells_2x2(m: Matrix):
    if m.shape != (2, 2):
        return None
    return m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)


def is_topright_corner(m: Matrix) -> bool:
    cells = _cells_2x2(m)
    if cells is None:
        return False
    tl, tr, bl, br = cells
    return bl < tr and tl < tr and br < tr


def is_bottomleft_angle(m: Matrix) -> bool:
    cells = _cells_2x2(m)
    if cells is None:
        return False
    tl, tr, bl, br = cells
    return tl < bl and tr < bl and br < bl


def left_vertical(m: Matrix) -> bool:
    cells = _cells_2x2(m)
    if cells is None:
        return False
    tl, tr, bl, br = cells
    return tl > tr and bl > br


def bottom_horizontal(m: Matrix) -> bool:
    cells = _cells_2x2(m)
    if cells is None:
        return False
    tl, tr, bl, br = cells
    return bl > tl and br > tr


def left_diagonal(m: Matrix) -> bool:
    cells = _cells_2x2(m)
    if cells is None:
        return False
    tl, tr, bl, br = cells
    return min(tl, br) > max(tr, bl)


def _unique_max_at(m: Matrix, corner: tuple) -> bool:
    if m.rows < 1 or m.cols < 1:
        return False
    target = m.get(*corner)
    for i in range(m.rows):
        for j in range(m.cols):
            if (i, j) != corner and m.get(i, j) >= target:
                return False
    return True


def max_bottom_left_corner(m: Matrix) -> bool:
    """The matrix maximum is attained uniquely at the bottom-left corner."""
    return _unique_max_at(m, (m.rows - 1, 0))


def max_bottom_right_corner(m: Matrix) -> bool:
    return _unique_max_at(m, (m.rows - 1, m.cols - 1))


def has_pattern(pooled: Tensor) -> bool:
    """Channel 0 peaks at its bottom-left corner and channel 1 at its bottom-right."""
    if pooled.is_flat or len(pooled.channels) < 2:
        return False
    return max_bottom_left_corner(pooled.channels[0]) and max_bottom_right_corner(
        pooled.channels[1]
    )


def mouth_left_region(pooled: Tensor) -> Matrix:
    """Designated pooling sub-region: bottom-left 2x2 of channel 0."""
    if pooled.is_flat:
        raise ValueError("pooled tensor expected")
    ch = pooled.channels[0]
    if ch.rows < 2 or ch.cols < 2:
        raise ValueError(f"channel too small for 2x2 region: {ch.shape}")
    return Matrix.from_rows(
        [
            [ch.get(ch.rows - 2, 0), ch.get(ch.rows - 2, 1)],
            [ch.get(ch.rows - 1, 0), ch.get(ch.rows - 1, 1)],
        ]
    )


def happy_properties(pooled: Tensor) -> bool:
    """Disjunction of the five 2x2 templates over the mouth-left sub-region."""
    if pooled.is_flat or not pooled.channels:
        return False
    ch = pooled.channels[0]
    if ch.rows < 2 or ch.cols < 2:
        return False
    region = mouth_left_region(pooled)
    return (
        left_vertical(region)
        or bottom_horizontal(region)
        or left_diagonal(region)
        or is_topright_corner(region)
        or is_bottomleft_angle(region)
    )


# -- extreme values -------------------------------------------------------------


def extreme_threshold(a: Vector) -> Fraction:
    """mean(a) + (max(a) - mean(a)) / 2, computed exactly."""
    if not a:
        raise ValueError("extreme_threshold of empty vector")
    mean = Fraction(sum(a), len(a))
    return mean + Fraction(max(a) - mean, 2)


def num_extreme(a: Vector, threshold: Scalar) -> int:
    return sum(1 for v in a if v > threshold)


def distinct_pattern(a: Vector) -> bool:
    """Every entry is extreme (above the threshold) or strictly below the mean."""
    if not a:
        raise ValueError("distinct_pattern of empty vector")
    mean = Fraction(sum(a), len(a))
    t = extreme_threshold(a)
    return all(v > t or v < mean for v in a)


@dataclass(frozen=True)
class ExtremeValuesInstance:
    """Weight rows w_x, w_y and activation vector a of equal length.

    All derived quantities are recomputed on access so they can never go
    stale relative to the stored vectors.
    """

    w_x: tuple
    w_y: tuple
    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "w_x", tuple(self.w_x))
        object.__setattr__(self, "w_y", tuple(self.w_y))
        object.__setattr__(self, "a", tuple(self.a))
        if not self.a:
            raise ValueError("instance needs at least one element")
        if not (len(self.w_x) == len(self.w_y) == len(self.a)):
            raise DimensionError(
                "ExtremeValuesInstance",
                f"length {len(self.a)}",
                (len(self.w_x), len(self.w_y)),
            )

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def mean(self) -> Fraction:
        return Fraction(sum(self.a), self.n)

    @property
    def a_max(self):
        return max(self.a)

    @property
    def a_min(self):
        return min(self.a)

    @property
    def threshold(self) -> Fraction:
        return extreme_threshold(list(self.a))

    @property
    def extreme_indices(self) -> tuple:
        t = self.threshold
        return tuple(i for i, v in enumerate(self.a) if v > t)

    @property
    def m(self) -> int:
        return len(self.extreme_indices)


def evl_precondition(case: str, inst: ExtremeValuesInstance, require_m_bound: bool = True) -> bool:
    """Restricted hypotheses under which the extreme-values implication holds.

    Case "r1": a is binary with min != mean != max (so it has a distinct
    pattern and at least one extreme entry) and w_x exceeds w_y on every
    extreme index.

    Case "r2": a is nonnegative with a distinct pattern and nonzero mean,
    both weight rows are binary, w_x exceeds w_y on every extreme index, and
    the extreme count m satisfies m >= n / (3/2 + a_max / (2 * mean)); the
    bound is compared cross-multiplied so only exact products are involved.
    ``require_m_bound=False`` drops that last clause (the negative-control
    hypothesis, under which the implication is falsifiable).
    """
    if case == "r1":
        if any(v not in (0, 1) for v in inst.a):
            return False
        mean = inst.mean
        if inst.a_min == mean or inst.a_max == mean:
            return False
        if not distinct_pattern(list(inst.a)):
            return False
        extremes = inst.extreme_indices
        if not extremes:
            return False
        return all(inst.w_x[i] > inst.w_y[i] for i in extremes)
    if case == "r2":
        if any(v < 0 for v in inst.a):
            return False
        mean = inst.mean
        if mean == 0:
            return False
        if not distinct_pattern(list(inst.a)):
            return False
        if any(v not in (0, 1) for v in inst.w_x):
            return False
        if any(v not in (0, 1) for v in inst.w_y):
            return False
        if not all(inst.w_x[i] > inst.w_y[i] for i in inst.extreme_indices):
            return False
        if require_m_bound:
            # m >= n / (3/2 + a_max/(2 mean))  <=>  m (3 mean + a_max) >= 2 n mean
            if inst.m * (3 * mean + inst.a_max) < 2 * inst.n * mean:
                return False
        return True
    raise ValueError(f"unknown case: {case!r}")


def evl_postcondition(inst: ExtremeValuesInstance) -> bool:
    return dot_product(list(inst.w_x), list(inst.a)) > dot_product(list(inst.w_y), list(inst.a))
