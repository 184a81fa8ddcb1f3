"""Pattern analysis of the convolution-and-pooling prefix over a dataset."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..dataset import DatasetManifest, HAPPY, SAD
from ..layers import Convolution, MaxPool, Network, Tensor, conv_forward, maxpool_forward
from ..matrix import scalar_to_text
from ..properties import (
    bottom_horizontal,
    happy_properties,
    has_pattern,
    is_bottomleft_angle,
    is_topright_corner,
    left_diagonal,
    left_vertical,
    max_bottom_left_corner,
    max_bottom_right_corner,
    mouth_left_region,
)


def _on_region(predicate):
    def check(pooled: Tensor) -> bool:
        ch = pooled.channels[0]
        if ch.rows < 2 or ch.cols < 2:
            return False
        return predicate(mouth_left_region(pooled))

    return check


PATTERN_PREDICATES = {
    "has_pattern": has_pattern,
    "happy_properties": happy_properties,
    "max_bottom_left_corner[ch0]": lambda t: max_bottom_left_corner(t.channels[0]),
    "max_bottom_right_corner[ch1]": (
        lambda t: len(t.channels) > 1 and max_bottom_right_corner(t.channels[1])
    ),
    "left_vertical[mouth_left]": _on_region(left_vertical),
    "bottom_horizontal[mouth_left]": _on_region(bottom_horizontal),
    "left_diagonal[mouth_left]": _on_region(left_diagonal),
    "topright_corner[mouth_left]": _on_region(is_topright_corner),
    "bottomleft_angle[mouth_left]": _on_region(is_bottomleft_angle),
}


@dataclass
class PatternReport:
    total_happy: int
    total_sad: int
    counts: dict  # name -> {"happy": int, "sad": int}
    universal_happy: list = field(default_factory=list)

    def fraction(self, name: str, label: str):
        total = self.total_happy if label == HAPPY else self.total_sad
        if total == 0:
            return None
        return Fraction(self.counts[name][label], total)

    def to_document(self) -> dict:
        def cell(name, label):
            frac = self.fraction(name, label)
            return {
                "count": self.counts[name][label],
                "fraction": None if frac is None else scalar_to_text(frac),
            }

        return {
            "total_happy": self.total_happy,
            "total_sad": self.total_sad,
            "predicates": {
                name: {HAPPY: cell(name, HAPPY), SAD: cell(name, SAD)}
                for name in self.counts
            },
            "universal_happy": list(self.universal_happy),
        }


def conv_pool_prefix(net: Network) -> tuple:
    """Layers up to and including the first pooling layer.

    The prefix must contain at least one convolution before the pool; a
    network without a pooling layer is rejected.
    """
    prefix = []
    saw_conv = False
    for layer in net.layers:
        prefix.append(layer)
        if isinstance(layer, Convolution):
            saw_conv = True
        if isinstance(layer, MaxPool):
            if not saw_conv:
                raise ValueError("pooling layer appears before any convolution")
            return tuple(prefix)
    raise ValueError("network has no pooling layer to analyse")


def pooled_output(prefix, image) -> Tensor:
    tensor = Tensor.image([image.pixels])
    for layer in prefix:
        if isinstance(layer, Convolution):
            tensor = conv_forward(layer, tensor)
        elif isinstance(layer, MaxPool):
            tensor = maxpool_forward(layer, tensor)
        else:
            raise ValueError(f"unexpected layer in prefix: {layer!r}")
    return tensor


def explain_patterns(net: Network, manifest: DatasetManifest,
                     predicates: dict = None) -> PatternReport:
    """Fractions of happy and sad images whose pooled output shows each pattern.

    Predicates that hold for every happy image (when any exist) are flagged
    in ``universal_happy``.
    """
    predicates = predicates or PATTERN_PREDICATES
    prefix = conv_pool_prefix(net)
    counts = {name: {HAPPY: 0, SAD: 0} for name in predicates}
    totals = {HAPPY: 0, SAD: 0}
    for image in manifest.images:
        totals[image.label] += 1
        pooled = pooled_output(prefix, image)
        for name, predicate in predicates.items():
            if predicate(pooled):
                counts[name][image.label] += 1
    report = PatternReport(
        total_happy=totals[HAPPY], total_sad=totals[SAD], counts=counts
    )
    report.universal_happy = [
        name
        for name in predicates
        if report.total_happy > 0 and counts[name][HAPPY] == report.total_happy
    ]
    return report
