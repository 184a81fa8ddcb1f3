"""Lowering of piecewise-linear networks to a flat affine-layer form.

Convolutions become sparse fully connected rows over the flattened input
(channel-major, then row-major, matching ``layers.flatten``), flatten layers
disappear, and max pooling is rejected: the branch-and-bound engine handles
pooling networks only through degenerate (single-point) boxes, which never
reach this code path.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..layers import (
    Convolution,
    Flatten,
    FullyConnected,
    LINEAR,
    MaxPool,
    Network,
    RELU,
)
from ..matrix import Matrix, Scalar


class UnsupportedLayerError(Exception):
    """Layer kind outside the affine engine's scope."""


@dataclass(frozen=True)
class LinearForm:
    """Affine function of the network inputs: coeffs . x + constant."""

    coeffs: tuple
    constant: Scalar

    def evaluate(self, x) -> Scalar:
        total = self.constant
        for c, v in zip(self.coeffs, x):
            if c != 0:
                total += c * v
        return total


@dataclass(frozen=True)
class AffineLayer:
    """One lowered layer; each weight row is [bias, w_1 .. w_d]."""

    weights: Matrix
    activation: str

    @property
    def size(self) -> int:
        return self.weights.rows


def _flat_index(shape, ch, i, j) -> int:
    r, c, _ = shape
    return ch * r * c + i * c + j


def lower_network(net: Network):
    """Return (affine layers, input size); raises on pooling layers."""
    net.validate()
    shape = net.input_shape
    input_size = shape[0] if len(shape) == 1 else shape[0] * shape[1] * shape[2]
    lowered = []
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            lowered.append(AffineLayer(weights=layer.weights, activation=layer.activation))
            shape = (layer.weights.rows,)
        elif isinstance(layer, Convolution):
            r, c, ch = shape
            kr, kc = layer.kernel_shape
            out_r, out_c = r - kr + 1, c - kc + 1
            size = r * c * ch
            mapping = {}
            row = 0
            for f, per_channel in enumerate(layer.filters):
                kernels = [k.to_rows() for k in per_channel]
                for i in range(out_r):
                    for n in range(out_c):
                        bias = layer.bias(f)
                        if bias != 0:
                            mapping[(row, 0)] = bias
                        for ci in range(ch):
                            kern = kernels[ci]
                            for s in range(kr):
                                for p in range(kc):
                                    w = kern[s][p]
                                    if w != 0:
                                        col = 1 + _flat_index(shape, ci, i + s, n + p)
                                        mapping[(row, col)] = mapping.get((row, col), 0) + w
                        row += 1
            weights = Matrix.sparse(row, size + 1, mapping)
            lowered.append(AffineLayer(weights=weights, activation=layer.activation))
            shape = (out_r, out_c, layer.num_filters)
        elif isinstance(layer, Flatten):
            r, c, ch = shape
            shape = (r * c * ch,)
        elif isinstance(layer, MaxPool):
            raise UnsupportedLayerError(
                "max pooling is not affine; only single-point boxes reach pooling networks"
            )
        else:
            raise UnsupportedLayerError(f"cannot lower layer {layer!r}")
    return lowered, input_size


def relu_nodes(lowered) -> list:
    """All (layer index, unit index) pairs owning a relu phase."""
    nodes = []
    for li, layer in enumerate(lowered):
        if layer.activation == RELU:
            nodes.extend((li, u) for u in range(layer.size))
    return nodes


ACTIVE = "active"
INACTIVE = "inactive"


def affine_forms(lowered, input_size: int, phases: dict):
    """Pre-activation forms per layer plus the network's output forms.

    ``phases`` must fix every relu unit; with all phases fixed the network is
    affine, so each neuron is one :class:`LinearForm` over the inputs.
    """
    current = [
        LinearForm(tuple(1 if k == i else 0 for k in range(input_size)), 0)
        for i in range(input_size)
    ]
    pre_per_layer = []
    for li, layer in enumerate(lowered):
        pre = []
        for u in range(layer.size):
            row = layer.weights.row(u)
            const = row[0]
            acc = [0] * input_size
            for j, w in enumerate(row[1:]):
                if w == 0:
                    continue
                f = current[j]
                const += w * f.constant
                for k, ck in enumerate(f.coeffs):
                    if ck != 0:
                        acc[k] += w * ck
            pre.append(LinearForm(tuple(acc), const))
        pre_per_layer.append(pre)
        if layer.activation == LINEAR:
            current = pre
        else:
            nxt = []
            zero = LinearForm(tuple([0] * input_size), 0)
            for u, form in enumerate(pre):
                phase = phases.get((li, u))
                if phase == ACTIVE:
                    nxt.append(form)
                elif phase == INACTIVE:
                    nxt.append(zero)
                else:
                    raise ValueError(f"relu node ({li}, {u}) has no fixed phase")
            current = nxt
    return pre_per_layer, current
