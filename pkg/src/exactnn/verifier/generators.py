"""Seeded random networks and inputs used by lemma checkers, tests, scripts."""

from __future__ import annotations

from fractions import Fraction

from ..layers import (
    Convolution,
    Flatten,
    FullyConnected,
    LINEAR,
    MaxPool,
    Network,
    RELU,
)
from ..matrix import Matrix


def random_fraction(rng, lo=-2, hi=2, max_den=8) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(lo * den, hi * den), den)


def mixed_scalar(rng, lo=-3, hi=3, rational_share=0.2):
    """Small integer most of the time, small rational otherwise."""
    if rng.random() < rational_share:
        return random_fraction(rng, lo, hi)
    return rng.randint(lo, hi)


def nonneg_scalar(rng, hi=3, rational_share=0.2):
    if rng.random() < rational_share:
        return abs(random_fraction(rng, 0, hi))
    return rng.randint(0, hi)


def random_fc_network(rng, input_size, widths, activations=None, sampler=None,
                      dtype="rational") -> Network:
    """Fully connected network with the given layer widths."""
    sampler = sampler or (lambda r: mixed_scalar(r))
    layers = []
    prev = input_size
    for idx, width in enumerate(widths):
        rows = [[sampler(rng) for _ in range(prev + 1)] for _ in range(width)]
        activation = (
            activations[idx]
            if activations
            else (RELU if rng.random() < 0.7 else LINEAR)
        )
        layers.append(FullyConnected(weights=Matrix.from_rows(rows), activation=activation))
        prev = width
    return Network(layers=tuple(layers), input_shape=(input_size,), dtype=dtype)


def random_toy_cnn(rng) -> Network:
    """Random rational network of the toy 9x9 image architecture.

    conv(2 filters, 2x2, relu) -> maxpool(2x2) -> flatten -> fc(2, linear).
    """
    def weight():
        return Fraction(rng.randint(-16, 16), 16)

    filters = tuple(
        (Matrix.from_rows([[weight(), weight()], [weight(), weight()]]),)
        for _ in range(2)
    )
    fc_rows = [[weight() for _ in range(33)] for _ in range(2)]
    return Network(
        layers=(
            Convolution(filters=filters, activation=RELU),
            MaxPool(size=(2, 2)),
            Flatten(),
            FullyConnected(weights=Matrix.from_rows(fc_rows), activation=LINEAR),
        ),
        input_shape=(9, 9, 1),
        dtype="rational",
    )


def random_small_fnn(rng, max_inputs=3, max_relu=6) -> Network:
    """Tiny relu network whose total relu unit count stays enumerable."""
    input_size = rng.randint(1, max_inputs)
    hidden = rng.randint(1, max_relu - 1)
    rest = max_relu - hidden
    widths = [hidden] + ([rest] if rest and rng.random() < 0.7 else [])
    activations = [RELU] * len(widths)
    out_rows = rng.randint(1, 2)
    net = random_fc_network(rng, input_size, widths, activations=activations)
    final = FullyConnected(
        weights=Matrix.from_rows(
            [[mixed_scalar(rng) for _ in range(widths[-1] + 1)] for _ in range(out_rows)]
        ),
        activation=LINEAR,
    )
    return Network(
        layers=net.layers + (final,), input_shape=(input_size,), dtype="rational"
    )
