"""``evsr`` command line.

Exit codes: 0 success, 1 usage error, 2 data error, 3 pipeline failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import io
from .events import SensorGeometry
from .exceptions import DataError, EvsrError, PipelineError
from .metrics import rmse, stats
from .pipeline import super_resolve
from .spatial import SpatialConfig
from .synth import SynthConfig, downsample_stream, simulate, upsample_stream_nearest
from .temporal import TemporalConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PIPELINE = 0, 1, 2, 3

log = logging.getLogger("evsr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text, sep, cast, what):
    try:
        a, b = text.lower().split(sep)
        return cast(a), cast(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}") from None


def _size(text):
    return _pair(text, "x", int, "WxH")


def _velocity(text):
    return _pair(text, ",", float, "VX,VY")


def _micros(text):
    text = text.strip().lower()
    return float(text[:-2] if text.endswith("us") else text)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="evsr", description="Self-supervised super-resolution of event streams.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sr = sub.add_parser("sr", help="super-resolve an event file")
    sr.add_argument("--in", dest="inp", required=True)
    sr.add_argument("--scale", type=int, required=True)
    sr.add_argument("--out", required=True)
    sr.add_argument("--iters", type=int, default=1000)
    sr.add_argument("--epochs", type=int, default=1000)
    sr.add_argument("--lr", type=float, default=1e-3)
    sr.add_argument("--kernel", choices=("bicubic", "bilinear", "random", "box"), default="bicubic")
    sr.add_argument("--seed", type=int, default=0)
    sr.add_argument("--dtype", choices=("float32", "float64"), default="float32")
    sr.add_argument("--fallback", choices=("naive",), default=None,
                    help="write a nearest-neighbour upsampling if the pipeline fails")
    sr.add_argument("--report")
    sr.add_argument("--log", help="CSV of per-step training losses")

    ds = sub.add_parser("downsample", help="spatially downsample an event file")
    ds.add_argument("--in", dest="inp", required=True)
    ds.add_argument("--scale", type=int, required=True)
    ds.add_argument("--out", required=True)
    ds.add_argument("--refractory", type=_micros, default=100.0, help="merge window, e.g. 100us")

    sy = sub.add_parser("synth", help="simulate a moving-pattern scene")
    sy.add_argument("--pattern", choices=("bar", "checkerboard", "disk", "ramp"), default="bar")
    sy.add_argument("--velocity", type=_velocity, default=(1.0, 0.0), help="px/ms as VX,VY")
    sy.add_argument("--duration", type=float, default=10.0, help="milliseconds")
    sy.add_argument("--size", type=_size, default=(32, 32), help="sensor WxH")
    sy.add_argument("--contrast", type=float, default=0.2)
    sy.add_argument("--pattern-size", type=float, default=6.0)
    sy.add_argument("--dt", type=float, default=10.0, help="simulation step in microseconds")
    sy.add_argument("--out", required=True)

    rm = sub.add_parser("rmse", help="binned RMSE between two event files")
    rm.add_argument("--a", required=True)
    rm.add_argument("--b", required=True)
    rm.add_argument("--bins", type=int, default=16)

    rd = sub.add_parser("render", help="render an event file to PGM/PPM")
    rd.add_argument("--in", dest="inp", required=True)
    rd.add_argument("--out", required=True)
    rd.add_argument("--mode", choices=("accumulate", "polarity-color"), default="accumulate")
    rd.add_argument("--window", type=lambda s: _pair(s, ",", int, "T0,T1"), default=None)

    st = sub.add_parser("stats", help="summarize an event file")
    st.add_argument("--in", dest="inp", required=True)
    return p


def _sr(args):
    if args.scale < 1:
        raise UsageError("--scale must be >= 1")
    stream = io.read(args.inp)
    records = []
    spatial = SpatialConfig(scale=args.scale, iterations=args.iters, lr=args.lr, kernel=args.kernel,
                            seed=args.seed, dtype=args.dtype)
    temporal = TemporalConfig(epochs=args.epochs, lr=args.lr, seed=args.seed, dtype=args.dtype)
    try:
        result = super_resolve(stream, args.scale, spatial, temporal,
                               callback=lambda stage, r: records.append((stage, r)))
        out, diagnostics = result.stream, dict(result.diagnostics)
        diagnostics["fallback"] = "none"
    except PipelineError as exc:
        if args.fallback != "naive":
            raise
        log.warning("pipeline failed at %s (%s); writing nearest-neighbour output", exc.stage, exc.cause)
        out = upsample_stream_nearest(stream, args.scale)
        diagnostics = {"scale": args.scale, "lr_events": len(stream), "sr_events": len(out),
                       "fallback": "naive", "failed_stage": exc.stage, "error": str(exc.cause)}
    io.write(out, args.out)
    if args.report:
        io.write_report(diagnostics, args.report)
    if args.log:
        io.write_training_log(records, args.log)
    print(f"wrote {len(out)} events ({out.geometry}) to {args.out}")


def _downsample(args):
    if args.scale < 1:
        raise UsageError("--scale must be >= 1")
    out = downsample_stream(io.read(args.inp), args.scale, args.refractory)
    io.write(out, args.out)
    print(f"wrote {len(out)} events ({out.geometry}) to {args.out}")


def _synth(args):
    W, H = args.size
    try:
        cfg = SynthConfig(args.pattern, SensorGeometry(W, H), args.velocity, args.duration,
                          args.contrast, args.dt, args.pattern_size)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = simulate(cfg)
    io.write(out, args.out)
    print(f"wrote {len(out)} events ({out.geometry}) to {args.out}")


def _rmse(args):
    value = rmse(io.read(args.a), io.read(args.b), args.bins)
    sys.stdout.write(io.format_report({"metric": "rmse", "bins": args.bins, "value": f"{value:.6f}"}))


def _render(args):
    io.render(io.read(args.inp), args.out, io.RenderSpec(args.mode, args.window))
    print(f"wrote {args.out}")


def _stats(args):
    sys.stdout.write(io.format_report(stats(io.read(args.inp))))


COMMANDS = {"sr": _sr, "downsample": _downsample, "synth": _synth, "rmse": _rmse,
            "render": _render, "stats": _stats}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"evsr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    warnings.simplefilter("default")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"evsr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        print(f"evsr: pipeline failure: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except (DataError, OSError) as exc:
        print(f"evsr: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EvsrError as exc:
        print(f"evsr: pipeline failure: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
