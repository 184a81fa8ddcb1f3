#!/usr/bin/env python3
"""Decide the first collision-avoidance property for two hand-built networks.

The first network clamps its advisory score below the threshold and is
proved; the second copies the intruder distance straight to the score and is
refuted with a concrete witness. Also demonstrates quantization and pruning
of a random fully connected network on the same input signature.
"""

import argparse
import json
import random
import sys
from fractions import Fraction

from exactnn.layers import FullyConnected, LINEAR, Network, RELU
from exactnn.matrix import Matrix
from exactnn.model_io import PruneParams, QuantizationParams, nonzero_fc_weights, prune, quantize
from exactnn.properties import acas_phi1
from exactnn.verifier import verify_reach_bab
from exactnn.verifier.generators import random_fc_network


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--timeout-ms", type=int, default=300_000)
    args = parser.parse_args()

    spec = acas_phi1()
    print("property: inputs", dict(zip(spec.input_names, spec.bounds)))
    print("goal:", spec.predicate)

    clamped = Network(
        layers=(
            FullyConnected(weights=Matrix.from_rows([[-58000, 1, 0, 0, 0, 0]]), activation=RELU),
            FullyConnected(weights=Matrix.from_rows([[1000, -1]]), activation=LINEAR),
        ),
        input_shape=(5,),
    )
    verdict = verify_reach_bab(clamped, spec, timeout_ms=args.timeout_ms)
    print("clamped net:", json.dumps(verdict.to_document()))

    identity = Network(
        layers=(
            FullyConnected(weights=Matrix.from_rows([[0, 1, 0, 0, 0, 0]]), activation=LINEAR),
        ),
        input_shape=(5,),
    )
    verdict = verify_reach_bab(identity, spec, timeout_ms=args.timeout_ms)
    print("identity net:", json.dumps(verdict.to_document()))

    rng = random.Random(args.seed)
    net = random_fc_network(
        rng, 5, [6, 5], sampler=lambda r: Fraction(r.randint(-32, 32), 32)
    )
    pruned = prune(net, PruneParams(target_density=Fraction(1, 10)))
    quantized = quantize(pruned, QuantizationParams(scale_bits=8))
    print(
        "compressed random net:",
        nonzero_fc_weights(net), "->", nonzero_fc_weights(pruned),
        "nonzero weights; dtype", quantized.dtype,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
