#!/usr/bin/env python3
"""Robustness sweep over the toy 9x9 face dataset.

Builds a seeded random CNN of the toy architecture, quantizes it, picks a
handful of dataset images, and checks all four robustness variants with both
engines, printing one verdict row per case. Epsilon/delta/L/eta default to
the 1/1/2/1 parameter set the property suite uses throughout.
"""

import argparse
import random
import sys

from exactnn.dataset import HAPPY, generate
from exactnn.layers import Tensor
from exactnn.model_io import QuantizationParams, quantize
from exactnn.properties import L0, RobustnessSpec
from exactnn.verifier import verify_robustness_bab, verify_robustness_brute
from exactnn.verifier.generators import random_toy_cnn


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--images", type=int, default=2, help="images per label")
    parser.add_argument("--scale-bits", type=int, default=6)
    parser.add_argument("--epsilon", type=int, default=1)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    net = quantize(random_toy_cnn(rng), QuantizationParams(scale_bits=args.scale_bits))
    manifest = generate(seed=args.seed, count=144)
    happy = [img for img in manifest.images if img.label == HAPPY][: args.images]
    sad = [img for img in manifest.images if img.label != HAPPY][: args.images]

    print(f"{'image':>8} {'variant':>8} {'brute':>8} {'bab':>8} {'nodes':>6}")
    for image in happy + sad:
        tensor = Tensor.image([image.pixels])
        target = 0 if image.label == HAPPY else 1
        for variant in ("cr", "sr", "lr", "acr"):
            spec = RobustnessSpec(
                variant=variant,
                epsilon=args.epsilon,
                delta=1,
                lipschitz_bound=2,
                eta=1,
                target_class=target,
                norm=L0,
                input_constraint="binary",
            )
            brute = verify_robustness_brute(net, tensor, spec)
            bab = verify_robustness_bab(net, tensor, spec)
            mark = "" if brute.status == bab.status else "  <-- MISMATCH"
            print(
                f"{image.label:>8} {variant:>8} {brute.status:>8} {bab.status:>8} "
                f"{bab.stats.nodes_explored:>6}{mark}"
            )
            if brute.status != bab.status:
                return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
