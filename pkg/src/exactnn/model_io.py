"""Bit-exact model files, static quantization, and magnitude pruning.

The model file is UTF-8 JSON whose numeric literals are always strings, so
parsing is exact and byte-level canonicalization is stable: loading a file
and saving it again yields identical bytes modulo the canonical layout this
module emits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .layers import (
    ACTIVATIONS,
    Convolution,
    Flatten,
    FullyConnected,
    INT,
    MaxPool,
    Network,
    RATIONAL,
    Tensor,
    relu,
)
from .matrix import Matrix, Scalar, parse_scalar, scalar_to_text

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """Model or property document rejected; the message carries field context."""


@dataclass(frozen=True)
class QuantizationParams:
    """Power-of-two scale factor 2**scale_bits."""

    scale_bits: int

    def __post_init__(self):
        if self.scale_bits < 1:
            raise ValueError(f"scale_bits must be >= 1: {self.scale_bits}")


@dataclass(frozen=True)
class PruneParams:
    """Target fraction of fully connected weights left nonzero."""

    target_density: Fraction

    def __post_init__(self):
        density = Fraction(self.target_density)
        object.__setattr__(self, "target_density", density)
        if not 0 < density <= 1:
            raise ValueError(f"target_density must be in (0, 1]: {density}")


# -- serialization ----------------------------------------------------------


def _matrix_to_lists(m: Matrix) -> list:
    return [[scalar_to_text(v) for v in m.row(i)] for i in range(m.rows)]


def _matrix_from_lists(rows, dtype: str, where: str) -> Matrix:
    try:
        parsed = [[parse_scalar(v, dtype) for v in row] for row in rows]
        return Matrix.from_rows(parsed)
    except (ValueError, TypeError) as exc:
        raise ModelFormatError(f"{where}: {exc}") from None


def network_to_document(net: Network) -> dict:
    """Canonical JSON-ready document; key order is fixed for byte stability."""
    layers = []
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            entry = {
                "type": "fc",
                "activation": layer.activation,
                "weights": _matrix_to_lists(layer.weights),
            }
        elif isinstance(layer, Convolution):
            entry = {
                "type": "conv",
                "activation": layer.activation,
                "filters": [
                    [_matrix_to_lists(k) for k in per_channel]
                    for per_channel in layer.filters
                ],
            }
            if layer.biases and any(b != 0 for b in layer.biases):
                entry["biases"] = [scalar_to_text(b) for b in layer.biases]
        elif isinstance(layer, MaxPool):
            entry = {"type": "maxpool", "size": list(layer.size)}
        elif isinstance(layer, Flatten):
            entry = {"type": "flatten"}
        else:
            raise ModelFormatError(f"unserializable layer: {layer!r}")
        layers.append(entry)
    return {
        "format_version": FORMAT_VERSION,
        "dtype": net.dtype,
        "input_shape": list(net.input_shape),
        "layers": layers,
    }


def network_from_document(doc: dict) -> Network:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"format_version: expected {FORMAT_VERSION}, got {version}")
    dtype = doc.get("dtype")
    if dtype not in (RATIONAL, INT):
        raise ModelFormatError(f"dtype: expected 'rational' or 'int', got {dtype!r}")
    shape = doc.get("input_shape")
    if not isinstance(shape, list) or len(shape) not in (1, 3):
        raise ModelFormatError(f"input_shape: expected 1 or 3 entries, got {shape!r}")
    layers = []
    for idx, entry in enumerate(doc.get("layers", [])):
        where = f"layers[{idx}]"
        kind = entry.get("type")
        if kind == "fc":
            activation = entry.get("activation")
            if activation not in ACTIVATIONS:
                raise ModelFormatError(f"{where}.activation: {activation!r}")
            layers.append(
                FullyConnected(
                    weights=_matrix_from_lists(entry["weights"], dtype, where + ".weights"),
                    activation=activation,
                )
            )
        elif kind == "conv":
            activation = entry.get("activation")
            if activation not in ACTIVATIONS:
                raise ModelFormatError(f"{where}.activation: {activation!r}")
            filters = tuple(
                tuple(
                    _matrix_from_lists(k, dtype, f"{where}.filters[{f}][{c}]")
                    for c, k in enumerate(per_channel)
                )
                for f, per_channel in enumerate(entry["filters"])
            )
            biases = entry.get("biases", [])
            layers.append(
                Convolution(
                    filters=filters,
                    activation=activation,
                    biases=tuple(
                        parse_scalar(b, dtype) for b in biases
                    ),
                )
            )
        elif kind == "maxpool":
            size = entry.get("size")
            if not isinstance(size, list) or len(size) != 2:
                raise ModelFormatError(f"{where}.size: {size!r}")
            layers.append(MaxPool(size=tuple(int(s) for s in size)))
        elif kind == "flatten":
            layers.append(Flatten())
        else:
            raise ModelFormatError(f"{where}.type: unknown layer type {kind!r}")
    net = Network(layers=tuple(layers), input_shape=tuple(int(s) for s in shape), dtype=dtype)
    net.validate()
    return net


def dumps(net: Network) -> str:
    return json.dumps(network_to_document(net), indent=1) + "\n"


def save(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(net))


def load(path) -> Network:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    return network_from_document(doc)


# -- quantization -----------------------------------------------------------


def round_half_away_from_zero(value: Scalar) -> int:
    """Exact rounding with halves moving away from zero."""
    f = Fraction(value)
    magnitude = (2 * abs(f).numerator + abs(f).denominator) // (2 * abs(f).denominator)
    return magnitude if f >= 0 else -magnitude


def quantize(net: Network, params: QuantizationParams) -> Network:
    """Scale rational weights to integers.

    Weights scale by 2**S. The bias of the k-th weighted layer scales by
    2**(S*k), the accumulator scale at that depth, so the integer network
    tracks 2**(S*k) times the rational activations and can be dequantized by
    2**(S * depth). Activations are unchanged; relu and max pooling commute
    with positive scaling.
    """
    if net.dtype != RATIONAL:
        raise ValueError(f"quantize expects a rational network, got dtype {net.dtype!r}")
    scale = 2 ** params.scale_bits
    depth = 0
    layers = []
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            depth += 1
            bias_scale = scale**depth
            rows = []
            for i in range(layer.weights.rows):
                row = layer.weights.row(i)
                rows.append(
                    [round_half_away_from_zero(row[0] * bias_scale)]
                    + [round_half_away_from_zero(w * scale) for w in row[1:]]
                )
            layers.append(
                FullyConnected(weights=Matrix.from_rows(rows), activation=layer.activation)
            )
        elif isinstance(layer, Convolution):
            depth += 1
            bias_scale = scale**depth
            filters = tuple(
                tuple(
                    k.map_scalars(lambda w: round_half_away_from_zero(w * scale))
                    for k in per_channel
                )
                for per_channel in layer.filters
            )
            biases = tuple(
                round_half_away_from_zero(b * bias_scale) for b in layer.biases
            )
            layers.append(
                Convolution(filters=filters, activation=layer.activation, biases=biases)
            )
        else:
            layers.append(layer)
    return Network(layers=tuple(layers), input_shape=net.input_shape, dtype=INT)


def weighted_depth(net: Network) -> int:
    """Number of weighted (fc/conv) layers; the dequantization exponent."""
    return sum(1 for l in net.layers if isinstance(l, (FullyConnected, Convolution)))


def quantization_error_bound(net: Network, params: QuantizationParams, input_bounds) -> list:
    """Sound per-output bound on |int_output / 2**(S*depth) - rational_output|.

    ``input_bounds`` is one (lo, hi) pair applying to every input element
    (inputs themselves are shared between the two networks and must be
    integer-valued for the int network). The bound propagates the at most
    1/2 rounding error of every quantized parameter through exact interval
    arithmetic; relu and max pooling are 1-Lipschitz so errors pass through
    unchanged.
    """
    if net.dtype != RATIONAL:
        raise ValueError("error bound is computed from the rational network")
    lo, hi = Fraction(input_bounds[0]), Fraction(input_bounds[1])
    scale = 2 ** params.scale_bits
    half = Fraction(1, 2)

    def initial(shape):
        if len(shape) == 1:
            return [(lo, hi, Fraction(0))] * shape[0]
        r, c, ch = shape
        return [[[(lo, hi, Fraction(0))] * c for _ in range(r)] for _ in range(ch)]

    def int_mag(cell, depth):
        clo, chi, d = cell
        s = scale**depth
        return max(abs(s * clo - d), abs(s * chi + d))

    def affine_cell(pairs, bias, activation, depth_in):
        # pairs: (weight, input cell); result cell at depth_in + 1
        zlo = zhi = Fraction(bias)
        err = half  # bias rounding
        for w, cell in pairs:
            clo, chi, d = cell
            a, b = w * clo, w * chi
            if a > b:
                a, b = b, a
            zlo += a
            zhi += b
            err += half * int_mag(cell, depth_in) + scale * abs(w) * d
        if activation == "relu":
            zlo, zhi = max(zlo, 0), max(zhi, 0)
        return (zlo, zhi, err)

    shape = net.input_shape
    state = initial(shape)
    depth = 0
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            rows = [layer.weights.row(i) for i in range(layer.weights.rows)]
            state = [
                affine_cell(list(zip(row[1:], state)), row[0], layer.activation, depth)
                for row in rows
            ]
            depth += 1
            shape = (len(state),)
        elif isinstance(layer, Convolution):
            r, c, ch = shape
            kr, kc = layer.kernel_shape
            out = []
            for f, per_channel in enumerate(layer.filters):
                kernels = [k.to_rows() for k in per_channel]
                chan = []
                for i in range(r - kr + 1):
                    row_cells = []
                    for n in range(c - kc + 1):
                        pairs = []
                        for ci in range(ch):
                            for s in range(kr):
                                for p in range(kc):
                                    pairs.append(
                                        (kernels[ci][s][p], state[ci][i + s][n + p])
                                    )
                        row_cells.append(
                            affine_cell(pairs, layer.bias(f), layer.activation, depth)
                        )
                    chan.append(row_cells)
                out.append(chan)
            state = out
            depth += 1
            shape = (r - kr + 1, c - kc + 1, layer.num_filters)
        elif isinstance(layer, MaxPool):
            r, c, ch = shape
            kr, kc = layer.size
            out = []
            for chan in state:
                pooled = []
                for i in range(0, r, kr):
                    row_cells = []
                    for j in range(0, c, kc):
                        window = [
                            chan[i + s][j + p] for s in range(kr) for p in range(kc)
                        ]
                        row_cells.append(
                            (
                                max(w[0] for w in window),
                                max(w[1] for w in window),
                                max(w[2] for w in window),
                            )
                        )
                    pooled.append(row_cells)
                out.append(pooled)
            state = out
            shape = (r // kr, c // kc, ch)
        elif isinstance(layer, Flatten):
            r, c, ch = shape
            state = [cell for chan in state for row in chan for cell in row]
            shape = (r * c * ch,)
        else:
            raise ValueError(f"unknown layer {layer!r}")
    if len(shape) != 1:
        r, c, ch = shape
        state = [cell for chan in state for row in chan for cell in row]
    total = scale**depth
    return [Fraction(cell[2], total) for cell in state]


def dequantize_outputs(outputs, params: QuantizationParams, depth: int) -> list:
    return [Fraction(v, (2 ** params.scale_bits) ** depth) for v in outputs]


# -- pruning ----------------------------------------------------------------


def prune(net: Network, params: PruneParams) -> Network:
    """Global magnitude pruning over fully connected weights, biases exempt.

    Keeps the floor(target_density * N) entries of largest absolute value,
    breaking magnitude ties in favour of earlier (layer, row, col) entries,
    and zeroes the rest. Pruned weight matrices come back sparse.
    """
    entries = []  # (|w|, layer, row, col, w)
    for li, layer in enumerate(net.layers):
        if not isinstance(layer, FullyConnected):
            continue
        for i in range(layer.weights.rows):
            row = layer.weights.row(i)
            for j, w in enumerate(row[1:], start=1):
                entries.append((abs(w), li, i, j, w))
    total = len(entries)
    keep = int(params.target_density * total)
    ranked = sorted(entries, key=lambda e: (-e[0], e[1], e[2], e[3]))
    kept = {(li, i, j) for _, li, i, j, _ in ranked[:keep]}

    layers = []
    for li, layer in enumerate(net.layers):
        if not isinstance(layer, FullyConnected):
            layers.append(layer)
            continue
        mapping = {}
        for i in range(layer.weights.rows):
            row = layer.weights.row(i)
            if row[0] != 0:
                mapping[(i, 0)] = row[0]
            for j, w in enumerate(row[1:], start=1):
                if w != 0 and (li, i, j) in kept:
                    mapping[(i, j)] = w
        layers.append(
            FullyConnected(
                weights=Matrix.sparse(layer.weights.rows, layer.weights.cols, mapping),
                activation=layer.activation,
            )
        )
    return Network(layers=tuple(layers), input_shape=net.input_shape, dtype=net.dtype)


def nonzero_fc_weights(net: Network) -> int:
    count = 0
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            for i in range(layer.weights.rows):
                count += sum(1 for w in layer.weights.row(i)[1:] if w != 0)
    return count
