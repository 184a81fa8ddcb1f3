"""Layer functions and network composition over exact scalars.

A network is an ordered sequence of typed layers over a single scalar kind
(rational or integer). Every forward function is pure; dimension mismatches
raise :class:`~exactnn.matrix.DimensionError` and the first failure aborts
the whole composition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

from .matrix import DimensionError, Matrix, Scalar, Vector, dot_product, sub_matrix

RELU = "relu"
LINEAR = "linear"
ACTIVATIONS = (RELU, LINEAR)

RATIONAL = "rational"
INT = "int"
DTYPES = (RATIONAL, INT)


def relu(x: Scalar) -> Scalar:
    """max(x, 0); the identity for x >= 0 and constant 0 for x <= 0."""
    return x if x >= 0 else 0


def apply_activation(name: str, x: Scalar) -> Scalar:
    if name == RELU:
        return relu(x)
    if name == LINEAR:
        return x
    raise ValueError(f"unknown activation: {name!r}")


@dataclass(frozen=True)
class FullyConnected:
    """Dense layer; each weight row is [bias, w_1 .. w_d]."""

    weights: Matrix
    activation: str = RELU

    @property
    def input_size(self) -> int:
        return self.weights.cols - 1

    @property
    def output_size(self) -> int:
        return self.weights.rows


@dataclass(frozen=True)
class Convolution:
    """Stride-1, no-padding convolution.

    ``filters[f][ch]`` is the k x k kernel the f-th output channel applies to
    input channel ch; channel contributions are summed. Biases default to 0.
    """

    filters: tuple
    activation: str = RELU
    biases: tuple = ()

    @property
    def num_filters(self) -> int:
        return len(self.filters)

    @property
    def num_channels(self) -> int:
        return len(self.filters[0]) if self.filters else 0

    @property
    def kernel_shape(self) -> tuple:
        return self.filters[0][0].shape

    def bias(self, f: int) -> Scalar:
        return self.biases[f] if self.biases else 0


@dataclass(frozen=True)
class MaxPool:
    """Non-overlapping max pooling; stride equals the pool size."""

    size: tuple = (2, 2)


@dataclass(frozen=True)
class Flatten:
    pass


Layer = Union[FullyConnected, Convolution, MaxPool, Flatten]


@dataclass(frozen=True)
class Tensor:
    """Either a stack of equally shaped channel matrices or a flat vector."""

    channels: tuple = None
    vector: tuple = None

    @staticmethod
    def image(channels: Sequence[Matrix]) -> "Tensor":
        channels = tuple(channels)
        if not channels:
            raise ValueError("image tensor needs at least one channel")
        shape = channels[0].shape
        for ch in channels[1:]:
            if ch.shape != shape:
                raise DimensionError("Tensor.image", shape, ch.shape)
        return Tensor(channels=channels)

    @staticmethod
    def flat(values: Sequence[Scalar]) -> "Tensor":
        return Tensor(vector=tuple(values))

    @property
    def is_flat(self) -> bool:
        return self.vector is not None

    @property
    def shape(self) -> tuple:
        if self.is_flat:
            return (len(self.vector),)
        rows, cols = self.channels[0].shape
        return (rows, cols, len(self.channels))


@dataclass(frozen=True)
class Network:
    """Ordered layer sequence plus the declared input shape.

    ``input_shape`` is (rows, cols, channels) for image input or (length,)
    for flat input. ``dtype`` names the scalar kind the weights use.
    """

    layers: tuple
    input_shape: tuple
    dtype: str = RATIONAL

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "input_shape", tuple(self.input_shape))
        if self.dtype not in DTYPES:
            raise ValueError(f"unknown dtype: {self.dtype!r}")
        if len(self.input_shape) not in (1, 3):
            raise ValueError(f"input_shape must be (n,) or (r, c, ch): {self.input_shape}")

    def validate(self) -> list:
        """Static shape inference; returns the shape after every layer."""
        return infer_shapes(self)


def infer_shapes(net: Network) -> list:
    """Propagate the declared input shape through every layer.

    Raises DimensionError naming the failing layer index, so a network that
    validates cleanly can never hit a shape error at run time.
    """
    shape = net.input_shape
    shapes = []
    for idx, layer in enumerate(net.layers):
        where = f"layer[{idx}]"
        if isinstance(layer, FullyConnected):
            if len(shape) != 1:
                raise DimensionError(where + ":fc", "flat input", shape)
            if layer.weights.cols != shape[0] + 1:
                raise DimensionError(
                    where + ":fc", f"rows of length {shape[0] + 1}", layer.weights.cols
                )
            shape = (layer.weights.rows,)
        elif isinstance(layer, Convolution):
            if len(shape) != 3:
                raise DimensionError(where + ":conv", "image input", shape)
            r, c, ch = shape
            if layer.num_channels != ch:
                raise DimensionError(where + ":conv", f"{ch} channels", layer.num_channels)
            kr, kc = layer.kernel_shape
            for f, per_channel in enumerate(layer.filters):
                if len(per_channel) != layer.num_channels:
                    raise DimensionError(
                        where + ":conv", f"{layer.num_channels} channels", len(per_channel)
                    )
                for k in per_channel:
                    if k.shape != (kr, kc):
                        raise DimensionError(where + ":conv", (kr, kc), k.shape)
            if layer.biases and len(layer.biases) != layer.num_filters:
                raise DimensionError(
                    where + ":conv", f"{layer.num_filters} biases", len(layer.biases)
                )
            if kr > r or kc > c:
                raise DimensionError(where + ":conv", f"kernel within {(r, c)}", (kr, kc))
            shape = (r - kr + 1, c - kc + 1, layer.num_filters)
        elif isinstance(layer, MaxPool):
            if len(shape) != 3:
                raise DimensionError(where + ":maxpool", "image input", shape)
            r, c, ch = shape
            kr, kc = layer.size
            if kr < 1 or kc < 1:
                raise ValueError(f"{where}: pool size must be >= 1: {layer.size}")
            if r % kr or c % kc:
                raise DimensionError(
                    where + ":maxpool", f"dims divisible by {layer.size}", (r, c)
                )
            shape = (r // kr, c // kc, ch)
        elif isinstance(layer, Flatten):
            if len(shape) != 3:
                raise DimensionError(where + ":flatten", "image input", shape)
            r, c, ch = shape
            shape = (r * c * ch,)
        else:
            raise ValueError(f"{where}: unknown layer {layer!r}")
        shapes.append(shape)
    return shapes


def fc_forward(layer: FullyConnected, inputs: Vector) -> Vector:
    """activation(dot(row, 1 :: inputs)) for each weight row."""
    extended = [1] + list(inputs)
    out = []
    for i in range(layer.weights.rows):
        row = layer.weights.row(i)
        if len(row) != len(extended):
            raise DimensionError("fc_forward", f"row length {len(extended)}", len(row))
        out.append(apply_activation(layer.activation, dot_product(row, extended)))
    return out


def convolve(inputs: Matrix, filt: Matrix) -> Matrix:
    """Single-channel convolution; output dims (h-k_r+1) x (w-k_c+1)."""
    kr, kc = filt.shape
    if kr > inputs.rows:
        raise DimensionError("convolve", f"filter height <= {inputs.rows}", kr)
    if kc > inputs.cols:
        raise DimensionError("convolve", f"filter width <= {inputs.cols}", kc)
    out_rows = inputs.rows - kr + 1
    out_cols = inputs.cols - kc + 1
    values = []
    for i in range(out_rows):
        for n in range(out_cols):
            window = sub_matrix(inputs, (i, n), (kr, kc))
            total = 0
            for s in range(kr):
                total += dot_product(filt.row(s), window.row(s))
            values.append(total)
    return Matrix.dense(out_rows, out_cols, values)


def conv_forward(layer: Convolution, tensor: Tensor) -> Tensor:
    """One output channel per filter; channel contributions are summed."""
    if tensor.is_flat:
        raise DimensionError("conv_forward", "image input", tensor.shape)
    if layer.num_channels != len(tensor.channels):
        raise DimensionError(
            "conv_forward", f"{len(tensor.channels)} channels", layer.num_channels
        )
    out_channels = []
    for f, per_channel in enumerate(layer.filters):
        acc = None
        for k, chan in zip(per_channel, tensor.channels):
            fm = convolve(chan, k)
            if acc is None:
                acc = fm.to_rows()
            else:
                if fm.shape != (len(acc), len(acc[0])):
                    raise DimensionError("conv_forward", (len(acc), len(acc[0])), fm.shape)
                for i, row in enumerate(fm.to_rows()):
                    for j, v in enumerate(row):
                        acc[i][j] += v
        bias = layer.bias(f)
        out_channels.append(
            Matrix.from_rows(
                [
                    [apply_activation(layer.activation, v + bias) for v in row]
                    for row in acc
                ]
            )
        )
    return Tensor.image(out_channels)


def maxpool2d(m: Matrix, size: tuple) -> Matrix:
    kr, kc = size
    if m.rows % kr or m.cols % kc:
        raise DimensionError("maxpool", f"dims divisible by {size}", m.shape)
    values = []
    for i in range(0, m.rows, kr):
        for j in range(0, m.cols, kc):
            window = sub_matrix(m, (i, j), (kr, kc))
            values.append(max(v for row in window.to_rows() for v in row))
    return Matrix.dense(m.rows // kr, m.cols // kc, values)


def maxpool_forward(layer: MaxPool, tensor: Tensor) -> Tensor:
    if tensor.is_flat:
        raise DimensionError("maxpool_forward", "image input", tensor.shape)
    return Tensor.image([maxpool2d(ch, layer.size) for ch in tensor.channels])


def flatten(tensor: Tensor) -> Vector:
    """Channel-major, then row-major within each channel."""
    if tensor.is_flat:
        return list(tensor.vector)
    out = []
    for ch in tensor.channels:
        for i in range(ch.rows):
            out.extend(ch.row(i))
    return out


def unflatten(values: Vector, shape: tuple) -> Tensor:
    """Inverse of :func:`flatten` for the given (rows, cols, channels) shape."""
    if len(shape) == 1:
        if len(values) != shape[0]:
            raise DimensionError("unflatten", shape[0], len(values))
        return Tensor.flat(values)
    r, c, ch = shape
    if len(values) != r * c * ch:
        raise DimensionError("unflatten", r * c * ch, len(values))
    channels = []
    for k in range(ch):
        base = k * r * c
        channels.append(
            Matrix.dense(r, c, values[base : base + r * c])
        )
    return Tensor.image(channels)


def as_tensor(value) -> Tensor:
    """Coerce a Tensor, Matrix, flat sequence, or channel list to a Tensor."""
    if isinstance(value, Tensor):
        return value
    if isinstance(value, Matrix):
        return Tensor.image([value])
    value = list(value)
    if value and isinstance(value[0], Matrix):
        return Tensor.image(value)
    return Tensor.flat(value)


def run(net: Network, inputs) -> Vector:
    """Left-to-right layer composition; the result is always a flat vector.

    An empty network is the identity modulo flattening. The first dimension
    error raised by any layer aborts the run.
    """
    tensor = as_tensor(inputs)
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            if not tensor.is_flat:
                raise DimensionError("run:fc", "flat input", tensor.shape)
            tensor = Tensor.flat(fc_forward(layer, list(tensor.vector)))
        elif isinstance(layer, Convolution):
            tensor = conv_forward(layer, tensor)
        elif isinstance(layer, MaxPool):
            tensor = maxpool_forward(layer, tensor)
        elif isinstance(layer, Flatten):
            tensor = Tensor.flat(flatten(tensor))
        else:
            raise ValueError(f"unknown layer {layer!r}")
    return flatten(tensor)


def argmax(values: Vector) -> int:
    """Index of the maximum; ties break toward the lowest index."""
    if not values:
        raise ValueError("argmax of empty vector")
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best
