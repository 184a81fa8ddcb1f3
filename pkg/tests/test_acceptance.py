"""Acceptance gate: every criterion at its stated tolerance and time budget.

Each test prints one `[acceptance] <name>: PASS` line (a FAIL line plus the
assertion otherwise), so a plain ``pytest -s tests/test_acceptance.py`` reads
as a checklist.
"""

import json
import random
import time
from contextlib import contextmanager
from fractions import Fraction
from itertools import product

import pytest

from exactnn import model_io
from exactnn.cli import main
from exactnn.dataset import HAPPY, generate, happy_spec, load_manifest
from exactnn.layers import (
    Convolution,
    Flatten,
    FullyConnected,
    LINEAR,
    MaxPool,
    Network,
    RELU,
    Tensor,
    convolve,
    maxpool_forward,
    run,
    unflatten,
)
from exactnn.matrix import Matrix, SPARSE, convert
from exactnn.model_io import (
    PruneParams,
    QuantizationParams,
    dequantize_outputs,
    nonzero_fc_weights,
    prune,
    quantization_error_bound,
    quantize,
    weighted_depth,
)
from exactnn.properties import (
    L0,
    LinearPredicate,
    ReachSpec,
    RobustnessSpec,
    acas_phi1,
    eval_robustness,
)
from exactnn.verifier import (
    PROVED,
    REFUTED,
    check_extreme_values,
    check_monotonicity,
    verify_reach_bab,
    verify_robustness_bab,
    verify_robustness_brute,
)
from exactnn.verifier.generators import random_small_fnn, random_toy_cnn

from oracles import conv_oracle, exhaustive_reach_status, maxpool_oracle


@contextmanager
def criterion(name: str, budget_s: float):
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL ({time.monotonic() - start:.1f}s)")
        raise
    elapsed = time.monotonic() - start
    assert elapsed < budget_s, f"{name} exceeded {budget_s}s budget: {elapsed:.1f}s"
    print(f"[acceptance] {name}: PASS ({elapsed:.1f}s)")


def test_convolution_and_pooling_oracle_equivalence():
    rng = random.Random(1001)
    with criterion("conv/pool oracle equivalence (1000 instances per op)", 10):
        for _ in range(1000):
            h, w = rng.randint(2, 9), rng.randint(2, 9)
            kr, kc = rng.randint(1, h), rng.randint(1, w)
            image = [[rng.randint(-4, 4) for _ in range(w)] for _ in range(h)]
            filt = [[rng.randint(-4, 4) for _ in range(kc)] for _ in range(kr)]
            expected = conv_oracle(image, filt)
            dense = convolve(Matrix.from_rows(image), Matrix.from_rows(filt))
            sparse = convolve(
                convert(Matrix.from_rows(image), SPARSE),
                convert(Matrix.from_rows(filt), SPARSE),
            )
            assert dense.to_rows() == expected
            assert sparse.to_rows() == expected
        for _ in range(1000):
            kr, kc = rng.randint(1, 3), rng.randint(1, 3)
            h, w = kr * rng.randint(1, 3), kc * rng.randint(1, 3)
            image = [[rng.randint(-4, 4) for _ in range(w)] for _ in range(h)]
            expected = maxpool_oracle(image, kr, kc)
            pool = MaxPool(size=(kr, kc))
            dense = maxpool_forward(pool, Tensor.image([Matrix.from_rows(image)]))
            sparse = maxpool_forward(
                pool, Tensor.image([convert(Matrix.from_rows(image), SPARSE)])
            )
            assert dense.channels[0].to_rows() == expected
            assert sparse.channels[0].to_rows() == expected


def test_monotonicity_suite():
    with criterion("monotonicity (10000 nets + layer lemmas)", 60):
        report = check_monotonicity(trials=10_000, seed=7, max_layers=4, max_width=8)
        assert report.trials == 10_000
        assert not report.violations
        assert not report.layer_violations


def test_extreme_values_r1_dims_1_to_8():
    with criterion("extreme values R1 (exhaustive a, dims 1-8, 1000 samples each)", 120):
        for dim in range(1, 9):
            report = check_extreme_values("r1", dim=dim, mode="random", budget=1000, seed=dim)
            assert not report.violations, f"dim {dim}: {report.violations[:1]}"
            if dim >= 2:
                assert report.tested == (2**dim - 2) * 1000


def test_extreme_values_r2_dim_8():
    with criterion("extreme values R2 (dim 8, 1e5 samples + grid + control)", 300):
        report = check_extreme_values(
            "r2", dim=8, mode="exhaustive-grid", budget=100_000, seed=8
        )
        assert report.tested >= 100_000
        assert not report.violations
        assert report.negative_control["counterexample"] is not None
        assert report.negative_control["tested"] > 0


def test_robustness_engine_agreement():
    rng = random.Random(2024)
    manifest = generate(seed=0, count=144)
    images = [manifest.images[i] for i in (0, 29, 58, 87, 116)]
    params = QuantizationParams(scale_bits=6)
    with criterion("robustness brute/BaB agreement (400 cases)", 600):
        cases = 0
        for _ in range(20):
            net = quantize(random_toy_cnn(rng), params)
            for image in images:
                tensor = Tensor.image([image.pixels])
                target = 0 if image.label == HAPPY else 1
                for variant in ("cr", "sr", "lr", "acr"):
                    spec = RobustnessSpec(
                        variant=variant,
                        epsilon=1,
                        delta=1,
                        lipschitz_bound=2,
                        eta=1,
                        target_class=target,
                        norm=L0,
                        input_constraint="binary",
                    )
                    brute = verify_robustness_brute(net, tensor, spec)
                    bab = verify_robustness_bab(net, tensor, spec)
                    cases += 1
                    assert brute.status == bab.status, (
                        f"case {cases}: {variant} brute={brute.status} bab={bab.status}"
                    )
                    for verdict in (brute, bab):
                        if verdict.status == REFUTED:
                            witness = unflatten(list(verdict.witness), (9, 9, 1))
                            assert not eval_robustness(net, tensor, spec, witness)
        assert cases == 400


def test_bab_completeness_small_scale():
    rng = random.Random(555)
    with criterion("BaB completeness vs exhaustive phase oracle (200 nets)", 600):
        for case in range(200):
            net = random_small_fnn(rng)
            n = net.input_shape[0]
            lo = [rng.randint(-3, 0) for _ in range(n)]
            hi = [v + rng.randint(1, 4) for v in lo]
            n_out = len(run(net, [0] * n))
            spec = ReachSpec(
                bounds=tuple(zip(lo, hi)),
                predicate=LinearPredicate(
                    coeffs=tuple(rng.choice([-1, 0, 1]) for _ in range(n_out)),
                    comparator=rng.choice(["<=", ">=", "<", ">"]),
                    threshold=rng.randint(-8, 8),
                ),
            )
            verdict = verify_reach_bab(net, spec)
            oracle = exhaustive_reach_status(net, spec)
            assert verdict.status == oracle, f"case {case}: {verdict.status} != {oracle}"
            if verdict.status == REFUTED:
                assert spec.contains(list(verdict.witness))
                assert not spec.predicate.holds(run(net, list(verdict.witness)))


def test_phi1_constants_and_hand_built_nets():
    with criterion("phi1 constants + hand-built nets", 10):
        spec = acas_phi1()
        assert spec.bounds[0][0] == 55948
        assert spec.bounds[3][0] == 1145
        assert spec.bounds[4][1] == 60
        assert spec.predicate.threshold == 1500
        assert set(spec.constants.values()) >= {55948, 1145, 60, 1500}

        clamped = Network(
            layers=(
                FullyConnected(
                    weights=Matrix.from_rows([[-58000, 1, 0, 0, 0, 0]]), activation=RELU
                ),
                FullyConnected(weights=Matrix.from_rows([[1000, -1]]), activation=LINEAR),
            ),
            input_shape=(5,),
        )
        assert verify_reach_bab(clamped, spec).status == PROVED

        identity = Network(
            layers=(
                FullyConnected(
                    weights=Matrix.from_rows([[0, 1, 0, 0, 0, 0]]), activation=LINEAR
                ),
            ),
            input_shape=(5,),
        )
        verdict = verify_reach_bab(identity, spec)
        assert verdict.status == REFUTED
        assert verdict.witness[0] > 1500


def test_quantization_bound_and_prune_density():
    rng = random.Random(31337)
    params = QuantizationParams(scale_bits=6)
    with criterion("quantization error bound (1e4 inputs/net) + prune density", 600):
        for _ in range(3):
            net = random_toy_cnn(rng)
            quantized = quantize(net, params)
            depth = weighted_depth(net)
            bounds = quantization_error_bound(net, params, (0, 1))
            exceedances = 0
            for _ in range(10_000):
                image = Tensor.image(
                    [
                        Matrix.from_rows(
                            [[rng.randint(0, 1) for _ in range(9)] for _ in range(9)]
                        )
                    ]
                )
                exact = run(net, image)
                approx = dequantize_outputs(run(quantized, image), params, depth)
                if any(abs(a - e) > b for a, e, b in zip(approx, exact, bounds)):
                    exceedances += 1
            assert exceedances == 0

        weights = [Fraction(rng.randint(-2000, 2000), 16) for _ in range(120)]
        layer = FullyConnected(
            weights=Matrix.from_rows([[1] + weights[:60], [2] + weights[60:]]),
            activation=RELU,
        )
        net = Network(layers=(layer,), input_shape=(60,))
        pruned = prune(net, PruneParams(target_density=Fraction(1, 10)))
        assert nonzero_fc_weights(pruned) == 12  # floor(0.10 * 120)


def test_dataset_cli_and_spec_agreement(tmp_path, capsys):
    with criterion("dataset gen 144 unique + label/spec agreement", 60):
        out = tmp_path / "faces"
        code = main(["dataset", "gen", "--seed", "0", "--count", "144", "-o", str(out)])
        assert code == 0
        capsys.readouterr()
        manifest = load_manifest(out / "manifest.json")
        assert len(manifest.images) == 144
        bitsets = {img.bits() for img in manifest.images}
        assert len(bitsets) == 144
        for img in manifest.images:
            assert img.pixels.shape == (9, 9)
            assert set(img.bits()) <= {0, 1}
            assert (img.label == HAPPY) == happy_spec(img)
