"""Command-line entry point for every pipeline stage.

Results go to standard output as JSON; a one-line human summary goes to
standard error. Exit codes: 0 proved/success, 1 refuted (or lemma violation),
2 timeout, 64 usage error, 65 input data error. ``--deterministic`` zeroes
elapsed-time fields so identical configurations yield byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import dataset as ds
from . import model_io
from .layers import Network, Tensor, run, unflatten
from .matrix import DimensionError, Matrix, parse_scalar, scalar_to_text
from .properties import (
    ReachSpec,
    RobustnessSpec,
    load_property_spec,
    eval_robustness,
)
from .verifier import (
    PROVED,
    REFUTED,
    TIMEOUT,
    UnsupportedLayerError,
    UnsupportedQueryError,
    check_extreme_values,
    check_monotonicity,
    explain_patterns,
    verify_reach_bab,
    verify_robustness_bab,
    verify_robustness_brute,
)

EXIT_PROVED = 0
EXIT_REFUTED = 1
EXIT_TIMEOUT = 2
EXIT_USAGE = 64
EXIT_DATA = 65

_STATUS_EXIT = {PROVED: EXIT_PROVED, REFUTED: EXIT_REFUTED, TIMEOUT: EXIT_TIMEOUT}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(doc: dict, summary: str) -> None:
    print(json.dumps(doc, indent=1))
    print(summary, file=sys.stderr)


def _load_model(path) -> Network:
    return model_io.load(path)


def _load_input(path, net: Network):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict) and "channels" in doc:
        channels = [
            Matrix.from_rows([[parse_scalar(str(v), net.dtype) for v in row] for row in chan])
            for chan in doc["channels"]
        ]
        return Tensor.image(channels)
    if isinstance(doc, dict) and "values" in doc:
        doc = doc["values"]
    if not isinstance(doc, list):
        raise ValueError("input file must hold a list, {'values': ...} or {'channels': ...}")
    values = [parse_scalar(str(v), net.dtype) for v in doc]
    # flat vectors are reshaped to the model's declared input shape
    return unflatten(values, net.input_shape)


def _robustness_spec(args) -> RobustnessSpec:
    if args.spec:
        spec = load_property_spec(args.spec)
        if not isinstance(spec, RobustnessSpec):
            raise ValueError(f"{args.spec} does not hold a robustness spec")
        return spec
    if args.variant is None or args.epsilon is None:
        raise _UsageError("verify robustness needs --variant and --epsilon (or --spec)")

    def opt(text):
        return None if text is None else parse_scalar(text)

    return RobustnessSpec(
        variant=args.variant,
        epsilon=parse_scalar(args.epsilon),
        delta=opt(args.delta),
        lipschitz_bound=opt(args.lipschitz),
        eta=opt(args.eta),
        target_class=args.target_class,
        norm=args.norm,
        input_constraint=None if args.input_constraint == "none" else args.input_constraint,
    )


def _cmd_run(args) -> int:
    net = _load_model(args.model)
    outputs = run(net, _load_input(args.input, net))
    doc = {"output": [scalar_to_text(v) for v in outputs]}
    _emit(doc, f"ran {len(net.layers)} layers -> {len(outputs)} outputs")
    return EXIT_PROVED


def _cmd_verify_robustness(args) -> int:
    net = _load_model(args.model)
    reference = _load_input(args.input, net)
    spec = _robustness_spec(args)
    if args.method == "brute":
        verdict = verify_robustness_brute(net, reference, spec, timeout_ms=args.timeout_ms)
    else:
        verdict = verify_robustness_bab(
            net, reference, spec,
            timeout_ms=args.timeout_ms, max_depth=args.max_depth, workers=args.workers,
        )
    doc = verdict.to_document(deterministic=args.deterministic)
    _emit(doc, f"{spec.variant} robustness ({args.method}): {verdict.status}")
    return _STATUS_EXIT[verdict.status]


def _cmd_verify_reach(args) -> int:
    net = _load_model(args.model)
    spec = load_property_spec(args.spec)
    if not isinstance(spec, ReachSpec):
        raise ValueError(f"{args.spec} does not hold a reach spec")
    verdict = verify_reach_bab(
        net, spec, timeout_ms=args.timeout_ms, max_depth=args.max_depth, workers=args.workers
    )
    doc = verdict.to_document(deterministic=args.deterministic)
    _emit(doc, f"reach property: {verdict.status}")
    return _STATUS_EXIT[verdict.status]


def _cmd_lemma_monotonicity(args) -> int:
    report = check_monotonicity(
        trials=args.trials, seed=args.seed,
        max_layers=args.max_layers, max_width=args.max_width,
    )
    _emit(
        report.to_document(deterministic=args.deterministic),
        f"monotonicity: {'ok' if report.ok else 'violated'} over {report.trials} trials",
    )
    return EXIT_PROVED if report.ok else EXIT_REFUTED


def _cmd_lemma_extreme_values(args) -> int:
    report = check_extreme_values(
        case=args.case, dim=args.dim, mode=args.mode, budget=args.budget, seed=args.seed
    )
    _emit(
        report.to_document(deterministic=args.deterministic),
        f"extreme values {args.case} dim {args.dim}: "
        f"{'ok' if report.ok else 'violated'} ({report.tested} instances)",
    )
    return EXIT_PROVED if report.ok else EXIT_REFUTED


def _cmd_quantize(args) -> int:
    net = _load_model(args.model)
    quantized = model_io.quantize(net, model_io.QuantizationParams(scale_bits=args.scale_bits))
    model_io.save(quantized, args.output)
    doc = {"written": str(args.output), "dtype": quantized.dtype, "scale_bits": args.scale_bits}
    _emit(doc, f"quantized with scale 2^{args.scale_bits} -> {args.output}")
    return EXIT_PROVED


def _cmd_prune(args) -> int:
    net = _load_model(args.model)
    params = model_io.PruneParams(target_density=Fraction(args.density))
    pruned = model_io.prune(net, params)
    model_io.save(pruned, args.output)
    doc = {
        "written": str(args.output),
        "target_density": scalar_to_text(params.target_density),
        "nonzero_fc_weights": model_io.nonzero_fc_weights(pruned),
    }
    _emit(doc, f"pruned to density {args.density} -> {args.output}")
    return EXIT_PROVED


def _cmd_dataset_gen(args) -> int:
    manifest = ds.generate(seed=args.seed, count=args.count)
    path = ds.save_manifest(manifest, args.output, pgm=args.pgm)
    doc = {
        "manifest": str(path),
        "count": len(manifest.images),
        "counts": manifest.counts,
    }
    _emit(doc, f"wrote {len(manifest.images)} images to {args.output}")
    return EXIT_PROVED


def _cmd_explain(args) -> int:
    net = _load_model(args.model)
    manifest = ds.load_manifest(args.dataset)
    report = explain_patterns(net, manifest)
    _emit(
        report.to_document(),
        f"analysed {report.total_happy} happy / {report.total_sad} sad images; "
        f"universal on happy: {', '.join(report.universal_happy) or 'none'}",
    )
    return EXIT_PROVED


def build_parser() -> _Parser:
    parser = _Parser(prog="exactnn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--deterministic", action="store_true",
                       help="zero elapsed-time fields for byte-stable output")

    p_run = sub.add_parser("run", help="forward pass")
    p_run.add_argument("--model", required=True)
    p_run.add_argument("--input", required=True)
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="verification engines")
    verify_sub = p_verify.add_subparsers(dest="goal", required=True)

    p_rob = verify_sub.add_parser("robustness", help="epsilon-ball robustness")
    p_rob.add_argument("--model", required=True)
    p_rob.add_argument("--input", required=True, help="reference input file")
    p_rob.add_argument("--spec", help="robustness spec file (overrides flags)")
    p_rob.add_argument("--variant", choices=["cr", "sr", "lr", "acr"])
    p_rob.add_argument("--epsilon")
    p_rob.add_argument("--delta")
    p_rob.add_argument("--lipschitz")
    p_rob.add_argument("--eta")
    p_rob.add_argument("--target-class", type=int)
    p_rob.add_argument("--norm", choices=["l0", "linf"], default="l0")
    p_rob.add_argument("--input-constraint", choices=["none", "binary"], default="none")
    p_rob.add_argument("--method", choices=["brute", "bab"], default="bab")
    p_rob.add_argument("--timeout-ms", type=int)
    p_rob.add_argument("--max-depth", type=int)
    p_rob.add_argument("--workers", type=int, default=1)
    common(p_rob)
    p_rob.set_defaults(func=_cmd_verify_robustness)

    p_reach = verify_sub.add_parser("reach", help="input box implies output predicate")
    p_reach.add_argument("--model", required=True)
    p_reach.add_argument("--spec", required=True)
    p_reach.add_argument("--timeout-ms", type=int)
    p_reach.add_argument("--max-depth", type=int)
    p_reach.add_argument("--workers", type=int, default=1)
    common(p_reach)
    p_reach.set_defaults(func=_cmd_verify_reach)

    p_lemma = sub.add_parser("lemma", help="lemma checkers")
    lemma_sub = p_lemma.add_subparsers(dest="lemma", required=True)

    p_mono = lemma_sub.add_parser("monotonicity", help="nonnegative-weight monotonicity")
    p_mono.add_argument("--trials", type=int, default=10000)
    p_mono.add_argument("--seed", type=int, default=0)
    p_mono.add_argument("--max-layers", type=int, default=4)
    p_mono.add_argument("--max-width", type=int, default=8)
    common(p_mono)
    p_mono.set_defaults(func=_cmd_lemma_monotonicity)

    p_evl = lemma_sub.add_parser("extreme-values", help="extreme values lemma cases")
    p_evl.add_argument("--case", choices=["r1", "r2"], required=True)
    p_evl.add_argument("--dim", type=int, required=True)
    p_evl.add_argument("--budget", type=int, default=1000)
    p_evl.add_argument("--mode", choices=["random", "exhaustive-grid"], default="random")
    p_evl.add_argument("--seed", type=int, default=0)
    common(p_evl)
    p_evl.set_defaults(func=_cmd_lemma_extreme_values)

    p_quant = sub.add_parser("quantize", help="rational weights to integers")
    p_quant.add_argument("--model", required=True)
    p_quant.add_argument("--scale-bits", type=int, required=True)
    p_quant.add_argument("-o", "--output", required=True)
    common(p_quant)
    p_quant.set_defaults(func=_cmd_quantize)

    p_prune = sub.add_parser("prune", help="global magnitude pruning")
    p_prune.add_argument("--model", required=True)
    p_prune.add_argument("--density", required=True)
    p_prune.add_argument("-o", "--output", required=True)
    common(p_prune)
    p_prune.set_defaults(func=_cmd_prune)

    p_data = sub.add_parser("dataset", help="dataset tooling")
    data_sub = p_data.add_subparsers(dest="action", required=True)
    p_gen = data_sub.add_parser("gen", help="generate the face dataset")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--count", type=int, default=144)
    p_gen.add_argument("-o", "--output", required=True)
    p_gen.add_argument("--pgm", action="store_true", help="also dump P2 images")
    common(p_gen)
    p_gen.set_defaults(func=_cmd_dataset_gen)

    p_explain = sub.add_parser("explain", help="pooled pattern analysis over a dataset")
    p_explain.add_argument("--model", required=True)
    p_explain.add_argument("--dataset", required=True, help="manifest.json path")
    common(p_explain)
    p_explain.set_defaults(func=_cmd_explain)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        OSError,
        json.JSONDecodeError,
        KeyError,
        ValueError,
        DimensionError,
        UnsupportedLayerError,
        UnsupportedQueryError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
