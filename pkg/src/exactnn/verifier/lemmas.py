"""Falsification-oriented lemma checkers.

These checkers search for counterexamples by seeded sampling and exhaustive
enumeration at small dimensions; a clean report means no violation was found
within the budget, not a proof. Both lemmas are exercised exactly as stated:
monotonicity of nonnegative-weight networks under pointwise input ordering,
and the extreme-values implication under its two restricted hypotheses.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from ..layers import FullyConnected, Network, fc_forward, run
from ..matrix import Matrix, scalar_to_text
from ..properties import (
    ExtremeValuesInstance,
    evl_postcondition,
    evl_precondition,
    gte,
    positive,
)
from .generators import mixed_scalar, nonneg_scalar, random_fc_network

EXHAUSTIVE_GRID = "exhaustive-grid"
RANDOM = "random"
MODES = (EXHAUSTIVE_GRID, RANDOM)


@dataclass
class MonotonicityReport:
    trials: int
    seed: int
    violations: list = field(default_factory=list)
    layer_violations: list = field(default_factory=list)
    elapsed_ms: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations and not self.layer_violations

    def to_document(self, deterministic: bool = False) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "violations": len(self.violations),
            "layer_violations": len(self.layer_violations),
            "examples": self.violations[:3] + self.layer_violations[:3],
            "ok": self.ok,
            "elapsed_ms": 0 if deterministic else self.elapsed_ms,
        }


def monotonicity_violation(net: Network, lower, upper) -> bool:
    """True when run(upper) fails to dominate run(lower) pointwise."""
    return not gte(run(net, upper), run(net, lower))


def check_monotonicity(trials: int, seed: int = 0, max_layers: int = 4,
                       max_width: int = 8, weight_sampler=None) -> MonotonicityReport:
    """Random nonnegative-weight networks with ordered nonnegative input pairs.

    Checks the end-to-end ordering property plus the two layer-level lemmas
    it rests on: layers preserve positivity, and each layer is monotone.
    ``weight_sampler`` overrides the nonnegative weight source (letting a
    caller demonstrate that negative weights break the property).
    """
    rng = random.Random(seed)
    sampler = weight_sampler or (lambda r: nonneg_scalar(r))
    report = MonotonicityReport(trials=trials, seed=seed)
    start = time.monotonic()
    for trial in range(trials):
        input_size = rng.randint(1, max_width)
        widths = [rng.randint(1, max_width) for _ in range(rng.randint(1, max_layers))]
        net = random_fc_network(rng, input_size, widths, sampler=sampler)
        lower = [nonneg_scalar(rng) for _ in range(input_size)]
        upper = [v + nonneg_scalar(rng) for v in lower]

        if monotonicity_violation(net, lower, upper):
            report.violations.append(
                {"trial": trial, "kind": "network", "input_size": input_size}
            )
        cur_lo, cur_hi = lower, upper
        for li, layer in enumerate(net.layers):
            out_lo = fc_forward(layer, cur_lo)
            out_hi = fc_forward(layer, cur_hi)
            if not positive(out_lo):
                report.layer_violations.append(
                    {"trial": trial, "kind": "positivity", "layer": li}
                )
            if not gte(out_hi, out_lo):
                report.layer_violations.append(
                    {"trial": trial, "kind": "layer-monotonicity", "layer": li}
                )
            cur_lo, cur_hi = out_lo, out_hi
    report.elapsed_ms = int((time.monotonic() - start) * 1000)
    return report


@dataclass
class ExtremeValuesReport:
    case: str
    dim: int
    mode: str
    budget: int
    seed: int
    tested: int = 0
    violations: list = field(default_factory=list)
    negative_control: dict = None
    elapsed_ms: int = 0

    @property
    def ok(self) -> bool:
        control = self.negative_control
        control_ok = (
            control is None
            or control.get("counterexample") is not None
            or control.get("tested", 0) == 0  # control region unreachable
        )
        return not self.violations and control_ok

    def to_document(self, deterministic: bool = False) -> dict:
        return {
            "case": self.case,
            "dim": self.dim,
            "mode": self.mode,
            "budget": self.budget,
            "seed": self.seed,
            "tested": self.tested,
            "violations": len(self.violations),
            "examples": self.violations[:3],
            "negative_control": self.negative_control,
            "ok": self.ok,
            "elapsed_ms": 0 if deterministic else self.elapsed_ms,
        }


def _instance_document(inst: ExtremeValuesInstance) -> dict:
    return {
        "w_x": [scalar_to_text(v) for v in inst.w_x],
        "w_y": [scalar_to_text(v) for v in inst.w_y],
        "a": [scalar_to_text(v) for v in inst.a],
    }


def _r1_weight_pair(rng, extremes, dim, grid_step=None):
    if grid_step is not None:
        w_y = [(grid_step + i) % 3 - 1 for i in range(dim)]
        w_x = [w_y[i] + (1 if i in extremes else ((grid_step + i) % 3 - 1)) for i in range(dim)]
    else:
        w_y = [mixed_scalar(rng) for _ in range(dim)]
        w_x = [
            w_y[i] + (abs(mixed_scalar(rng)) + 1 if i in extremes else mixed_scalar(rng))
            for i in range(dim)
        ]
    return w_x, w_y


def _check_r1(report, rng, dim, budget, mode):
    for bits in product((0, 1), repeat=dim):
        if all(b == 0 for b in bits) or all(b == 1 for b in bits):
            continue  # constant vectors fail min != mean != max
        extremes = {i for i, b in enumerate(bits) if b == 1}
        first = True
        for k in range(budget):
            grid_step = k if (mode == EXHAUSTIVE_GRID and k < 9) else None
            w_x, w_y = _r1_weight_pair(rng, extremes, dim, grid_step)
            inst = ExtremeValuesInstance(w_x=w_x, w_y=w_y, a=bits)
            if first:
                # The construction guarantees the precondition; verify the
                # a-dependent clauses once per vector with the full check.
                if not evl_precondition("r1", inst):
                    continue
                first = False
            report.tested += 1
            if not evl_postcondition(inst):
                report.violations.append(_instance_document(inst))


def _r2_candidate(rng, dim, small_m=False):
    """Two-level activation vector plus binary weights ordered on extremes."""
    m = rng.randint(1, max(1, dim // 2)) if small_m else rng.randint(1, dim)
    positions = rng.sample(range(dim), m)
    extreme_set = set(positions)
    base = Fraction(rng.randint(0, 8), rng.randint(1, 4))
    high = base + Fraction(rng.randint(1, 8), rng.randint(1, 4))
    a = [high if i in extreme_set else base for i in range(dim)]
    w_x = [1 if i in extreme_set else rng.randint(0, 1) for i in range(dim)]
    w_y = [0 if i in extreme_set else rng.randint(0, 1) for i in range(dim)]
    return ExtremeValuesInstance(w_x=w_x, w_y=w_y, a=a)


def _r2_grid(dim):
    """Deterministic discretized instances sweeping extreme counts and levels."""
    instances = []
    for m in range(1, dim + 1):
        for high in (1, 2, Fraction(3, 2)):
            for base in (0, Fraction(1, 2)):
                if base >= high:
                    continue
                a = [high] * m + [base] * (dim - m)
                for wx_rest, wy_rest in ((0, 0), (0, 1), (1, 0), (1, 1)):
                    instances.append(
                        ExtremeValuesInstance(
                            w_x=[1] * m + [wx_rest] * (dim - m),
                            w_y=[0] * m + [wy_rest] * (dim - m),
                            a=a,
                        )
                    )
    return instances


def _check_r2(report, rng, dim, budget, mode):
    if mode == EXHAUSTIVE_GRID:
        for inst in _r2_grid(dim):
            if evl_precondition("r2", inst):
                report.tested += 1
                if not evl_postcondition(inst):
                    report.violations.append(_instance_document(inst))
    attempts = 0
    # At dimension 1 the hypothesis is unsatisfiable (a constant vector has
    # no distinct pattern), so cap the candidate draws rather than spin.
    while report.tested < budget and attempts < 50 * budget + 1000:
        attempts += 1
        inst = _r2_candidate(rng, dim)
        if not evl_precondition("r2", inst):
            continue
        report.tested += 1
        if not evl_postcondition(inst):
            report.violations.append(_instance_document(inst))

    # Negative control: with the extreme-count bound removed the implication
    # must be falsifiable; search the removed region for a counterexample.
    control = {"tested": 0, "counterexample": None}
    for _ in range(budget):
        inst = _r2_candidate(rng, dim, small_m=True)
        if not evl_precondition("r2", inst, require_m_bound=False):
            continue
        if evl_precondition("r2", inst):
            continue  # still inside the bound; not part of the control region
        control["tested"] += 1
        if not evl_postcondition(inst):
            control["counterexample"] = _instance_document(inst)
            break
    report.negative_control = control


def check_extreme_values(case: str, dim: int, mode: str = RANDOM, budget: int = 1000,
                         seed: int = 0) -> ExtremeValuesReport:
    """Check one restricted extreme-values case at the given dimension.

    Case "r1" enumerates every binary activation vector of the dimension and
    draws ``budget`` hypothesis-satisfying weight pairs for each; case "r2"
    tests ``budget`` hypothesis-satisfying sampled instances (plus a
    deterministic grid in exhaustive-grid mode) and then runs the negative
    control that drops the extreme-count bound and expects a counterexample.
    """
    if case not in ("r1", "r2"):
        raise ValueError(f"unknown case: {case!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode: {mode!r}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1: {dim}")
    rng = random.Random(seed)
    report = ExtremeValuesReport(case=case, dim=dim, mode=mode, budget=budget, seed=seed)
    start = time.monotonic()
    if case == "r1":
        _check_r1(report, rng, dim, budget, mode)
    else:
        _check_r2(report, rng, dim, budget, mode)
    report.elapsed_ms = int((time.monotonic() - start) * 1000)
    return report
