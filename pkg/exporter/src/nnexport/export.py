"""Keras model conversion to the exact-arithmetic model JSON format.

Supported source layers: Dense, Conv2D (valid padding, stride 1,
channels-last), MaxPooling2D (stride = pool size), Flatten, plus
parameter-free layers that drop out at inference (InputLayer, Dropout).
Activations must be relu or linear. Weights are serialized with 17
significant decimal digits, which round-trips double precision exactly, so
the importing side parses the same values the source framework computed
with.

The emitted fully connected rows are [bias, w_1 .. w_d]; because the target
format flattens channel-major while Keras flattens channels-last
(interleaved), the first dense layer after a spatial flatten has its kernel
rows permuted accordingly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

SUPPORTED_ACTIVATIONS = ("relu", "linear")


class ExportError(ValueError):
    """Source model outside the exportable fragment; names the layer."""


@dataclass
class ExportReport:
    source_format: str
    output_path: str
    layer_mapping: list = field(default_factory=list)
    dropped: list = field(default_factory=list)
    checksum: str = ""

    def to_document(self) -> dict:
        return {
            "source_format": self.source_format,
            "output_path": self.output_path,
            "layer_mapping": self.layer_mapping,
            "dropped": self.dropped,
            "checksum": self.checksum,
        }


def _render(value) -> str:
    return f"{float(value):.17g}"


def _pair(value, name, layer_name):
    pair = tuple(value) if isinstance(value, (tuple, list)) else (value, value)
    if len(pair) != 2:
        raise ExportError(f"{layer_name}: {name} must be 2-dimensional, got {value!r}")
    return pair


def _activation_name(layer) -> str:
    activation = getattr(layer, "activation", None)
    name = getattr(activation, "__name__", "linear")
    if name not in SUPPORTED_ACTIVATIONS:
        raise ExportError(
            f"{layer.name}: unsupported activation {name!r} (only relu/linear)"
        )
    return name


def _input_shape(model) -> tuple:
    shape = model.input_shape
    if isinstance(shape, list):
        if len(shape) != 1:
            raise ExportError("multi-input models are not exportable")
        shape = shape[0]
    dims = tuple(int(d) for d in shape[1:])
    if len(dims) not in (1, 3):
        raise ExportError(f"unsupported input shape {shape}")
    return dims


def convert_model(model) -> tuple:
    """Map a loaded Keras model to (model document, mapping rows, dropped rows)."""
    dims = _input_shape(model)
    layers_doc = []
    mapping = []
    dropped = []
    # permutation[j] = keras flat index feeding target flat index j, or None
    permutation = None

    for layer in model.layers:
        kind = type(layer).__name__
        name = layer.name
        if kind in ("InputLayer",):
            dropped.append({"layer": name, "type": kind, "reason": "shape bookkeeping only"})
            continue
        if kind in ("Dropout",):
            dropped.append({"layer": name, "type": kind, "reason": "identity at inference"})
            continue
        if kind == "Dense":
            if len(dims) != 1:
                raise ExportError(f"{name}: dense layer needs flat input, have {dims}")
            activation = _activation_name(layer)
            weights = layer.get_weights()
            kernel = weights[0]  # (input_dim, units)
            d, units = kernel.shape
            if d != dims[0]:
                raise ExportError(f"{name}: kernel expects {d} inputs, chain has {dims[0]}")
            bias = weights[1] if len(weights) > 1 else [0.0] * units
            order = permutation or range(d)
            rows = [
                [_render(bias[u])] + [_render(kernel[j, u]) for j in order]
                for u in range(units)
            ]
            layers_doc.append({"type": "fc", "activation": activation, "weights": rows})
            mapping.append({"layer": name, "type": kind, "target": "fc", "units": units})
            dims = (units,)
            permutation = None
        elif kind == "Conv2D":
            if len(dims) != 3:
                raise ExportError(f"{name}: conv layer needs image input, have {dims}")
            if _pair(layer.strides, "strides", name) != (1, 1):
                raise ExportError(f"{name}: only stride 1 convolutions are exportable")
            if layer.padding != "valid":
                raise ExportError(f"{name}: only valid padding is exportable")
            if getattr(layer, "data_format", "channels_last") != "channels_last":
                raise ExportError(f"{name}: only channels_last data format is exportable")
            if _pair(getattr(layer, "dilation_rate", (1, 1)), "dilation", name) != (1, 1):
                raise ExportError(f"{name}: dilated convolutions are not exportable")
            activation = _activation_name(layer)
            weights = layer.get_weights()
            kernel = weights[0]  # (kh, kw, in_channels, out_channels)
            kh, kw, cin, cout = kernel.shape
            h, w, c = dims
            if cin != c:
                raise ExportError(f"{name}: kernel expects {cin} channels, chain has {c}")
            filters = [
                [
                    [[_render(kernel[s, p, ci, f]) for p in range(kw)] for s in range(kh)]
                    for ci in range(cin)
                ]
                for f in range(cout)
            ]
            entry = {"type": "conv", "activation": activation, "filters": filters}
            if len(weights) > 1 and any(float(b) != 0.0 for b in weights[1]):
                entry["biases"] = [_render(b) for b in weights[1]]
            layers_doc.append(entry)
            mapping.append({"layer": name, "type": kind, "target": "conv", "filters": cout})
            dims = (h - kh + 1, w - kw + 1, cout)
        elif kind == "MaxPooling2D":
            if len(dims) != 3:
                raise ExportError(f"{name}: pooling layer needs image input, have {dims}")
            pool = _pair(layer.pool_size, "pool_size", name)
            strides = _pair(layer.strides or layer.pool_size, "strides", name)
            if strides != pool:
                raise ExportError(f"{name}: strides must equal the pool size")
            if layer.padding != "valid":
                raise ExportError(f"{name}: only valid padding is exportable")
            h, w, c = dims
            if h % pool[0] or w % pool[1]:
                raise ExportError(f"{name}: input {h}x{w} not divisible by pool {pool}")
            layers_doc.append({"type": "maxpool", "size": [int(pool[0]), int(pool[1])]})
            mapping.append({"layer": name, "type": kind, "target": "maxpool"})
            dims = (h // pool[0], w // pool[1], c)
        elif kind == "Flatten":
            if len(dims) == 1:
                dropped.append({"layer": name, "type": kind, "reason": "input already flat"})
                continue
            h, w, c = dims
            # target order: channel-major (c, i, j); keras order: (i, j, c)
            permutation = [
                i * (w * c) + j * c + ci
                for ci in range(c)
                for i in range(h)
                for j in range(w)
            ]
            layers_doc.append({"type": "flatten"})
            mapping.append({"layer": name, "type": kind, "target": "flatten"})
            dims = (h * w * c,)
        else:
            raise ExportError(f"{name}: unsupported layer type {kind}")

    document = {
        "format_version": 1,
        "dtype": "rational",
        "input_shape": list(_input_shape(model)),
        "layers": layers_doc,
    }
    return document, mapping, dropped


def load_source(path):
    """Load a Keras model plus a short tag for the report."""
    from tensorflow import keras  # deferred: slow import

    path = Path(path)
    if not path.exists():
        raise ExportError(f"source model not found: {path}")
    suffix = path.suffix.lower()
    if path.is_dir():
        tag = "keras-saved-dir"
    elif suffix == ".h5":
        tag = "keras-h5"
    elif suffix == ".keras":
        tag = "keras-file"
    else:
        tag = "keras"
    try:
        model = keras.models.load_model(path, compile=False)
    except Exception as exc:
        raise ExportError(f"cannot load {path} as a Keras model: {exc}") from exc
    return model, tag


def export_model(source_path, out_path, dtype: str = "rational") -> ExportReport:
    """Convert a saved Keras model into the exact-arithmetic JSON format."""
    if dtype != "rational":
        raise ExportError(f"only dtype 'rational' is exportable, got {dtype!r}")
    model, tag = load_source(source_path)
    document, mapping, dropped = convert_model(model)
    payload = json.dumps(document, indent=1) + "\n"
    out_path = Path(out_path)
    out_path.write_text(payload, encoding="utf-8")
    return ExportReport(
        source_format=tag,
        output_path=str(out_path),
        layer_mapping=mapping,
        dropped=dropped,
        checksum=hashlib.sha256(payload.encode("utf-8")).hexdigest(),
    )
