"""Command line: ``parkplate <command> ...``.

Exit codes: 0 success, 1 runtime errors occurred, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import socketserver
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .classifier import (LabeledSample, build_model, evaluate, load_model, save_model,
                         split_train_test)
from .config import Config, load_config
from .errors import ConfigError, FormatError, InvalidRange, InvalidRatio, JournalCorrupt, StratifyError
from .features import chain_code_features
from .gatesim import Gate, GateDeps, format_transcript, run_script, tick_clock
from .imgfile import ImageFormatError, read_raster, write_image
from .inventory import Journal, ReceiptPrinter, Tariff, parse_time, report
from .pipeline import (MANIFEST_NAME, batch_evaluate, load_scene_dir, manifest_lines, read_plate)
from .platetype import PlateType
from .segmentation import CorpusError, read_glyph_corpus, write_glyph_corpus
from .synth import SceneSpec, generate_glyph_corpus, generate_scene, scene_seed

OK, RUNTIME_ERROR, USAGE_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _ratio(text: str) -> float:
    value = float(text)
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError("ratio must lie strictly between 0 and 1")
    return value


def _load_model_or_exit(path: str):
    try:
        return load_model(path)
    except OSError as exc:
        raise UsageError(f"cannot read model {path}: {exc.strerror or exc}") from None
    except FormatError as exc:
        raise UsageError(f"model {path}: {exc}") from None


# -- commands -------------------------------------------------------------------

def cmd_gen(args, cfg: Config, out: TextIO) -> int:
    spec = SceneSpec(width=args.width, height=args.height, plates=args.plates,
                     max_tilt_deg=args.max_tilt, tilt_deg=args.tilt,
                     scale_range=(args.scale_min, args.scale_max),
                     plate_type=PlateType(args.type) if args.type else None,
                     palette=args.palette, speckle=args.speckle, alphabet=cfg.classifier.alphabet)
    directory = Path(args.out)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(args.count):
        scene = generate_scene(scene_seed(args.seed, i), spec)
        name = f"scene_{i:04d}.ppm"
        write_image(directory / name, scene.image)
        lines.extend(manifest_lines(name, scene.truth))
    (directory / MANIFEST_NAME).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    print(f"wrote {args.count} scenes to {directory}", file=out)
    return OK


def cmd_gen_glyphs(args, cfg: Config, out: TextIO) -> int:
    corpus = generate_glyph_corpus(args.seed, args.per_class, cfg.classifier.alphabet)
    paths = write_glyph_corpus(args.out, corpus)
    print(f"wrote {len(paths)} glyphs to {args.out}", file=out)
    return OK


def cmd_train(args, cfg: Config, out: TextIO) -> int:
    try:
        corpus = read_glyph_corpus(args.corpus)
    except CorpusError as exc:
        raise UsageError(str(exc)) from None
    alphabet = cfg.classifier.alphabet
    unknown = sorted({label for label, _ in corpus} - set(alphabet))
    if unknown:
        raise UsageError(f"{args.corpus}: labels {' '.join(unknown)} are not in the alphabet")
    try:
        train, test = split_train_test(corpus, args.ratio, args.seed, label_of=lambda s: s[0])
    except (StratifyError, InvalidRatio) as exc:
        raise UsageError(str(exc)) from None
    k = args.k or cfg.classifier.k
    model = build_model(train, alphabet, k, cfg.features.normalize)
    normalize = cfg.features.normalize == "per-glyph"
    rep = evaluate(model, [LabeledSample(chain_code_features(b, normalize=normalize), label)
                           for label, b in test])
    save_model(model, args.out)
    if args.json:
        json.dump({"train": len(train), "test": len(test), "model": str(args.out), **rep.to_dict()},
                  out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        print(f"train {len(train)} | test {len(test)} | k {k}", file=out)
        print(rep.table(), file=out)
        print(rep.class_table(), file=out)
        print(f"model saved to {args.out}", file=out)
    return OK


def cmd_recognize(args, cfg: Config, out: TextIO) -> int:
    model = _load_model_or_exit(args.model)
    failed = False
    results = []
    for path in args.images:
        try:
            img = read_raster(path)
        except (OSError, ImageFormatError) as exc:
            failed = True
            results.append({"file": path, "error": str(exc), "readings": []})
            continue
        readings = read_plate(img, model, cfg)
        results.append({"file": path, "readings": [
            {"text": r.text, "type": r.plate_type.value, "elapsed_ms": round(r.elapsed, 1),
             "box": list(r.box), "tilt": r.candidate.tilt,
             "per_glyph": [[label, conf] for label, conf in r.per_glyph]} for r in readings]})
    if args.json:
        json.dump(results, out, indent=2)
        out.write("\n")
    else:
        for res in results:
            if "error" in res:
                print(f"ERR {res['file']} {res['error']}", file=out)
            elif not res["readings"]:
                print(f"{res['file']} - - -", file=out)
            for r in res["readings"]:
                print(f"{res['file']} {r['text']} {r['type']} {r['elapsed_ms']:.1f}", file=out)
    return RUNTIME_ERROR if failed else OK


def cmd_eval(args, cfg: Config, out: TextIO) -> int:
    model = _load_model_or_exit(args.model)
    try:
        scenes = load_scene_dir(args.scenes)
    except (OSError, ValueError) as exc:
        raise UsageError(f"{args.scenes}: {exc}") from None
    rep = batch_evaluate(scenes, model, cfg)
    if args.json:
        data = rep.to_dict()
        data.pop("median_ms")  # timing stays off stdout so reruns compare byte for byte
        json.dump(data, out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        print(rep.table(), file=out)
    if rep.median_ms is not None:
        print(f"median read_plate time {rep.median_ms:.1f} ms", file=sys.stderr)
    return OK


def _pipeline_recognizer(model, cfg: Config):
    def recognize(path: str):
        readings = read_plate(read_raster(path), model, cfg)
        return readings[0] if readings else None
    return recognize


def _serve_lines(gate: Gate, lines, write, clock_start: float) -> None:
    """Feed protocol lines to the gate.

    Tick-prefixed lines use their own tick and get it echoed on every reply;
    bare lines are stamped with milliseconds elapsed since ``clock_start``.
    """
    for raw in lines:
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        if head.isdigit() and rest:
            tick, event, prefix = int(head), rest, f"{head} "
        else:
            tick = max(gate.now, int((time.monotonic() - clock_start) * 1000))
            event, prefix = line, ""
        try:
            outbound = gate.feed(tick, event)
        except ValueError as exc:
            gate.deps.diagnostics.append(str(exc))
            outbound = ["ERR SYNTAX"]
        for msg in outbound:
            write(prefix + msg + "\n")


def cmd_serve(args, cfg: Config, out: TextIO) -> int:
    model = _load_model_or_exit(args.model)
    epoch = parse_time(args.epoch) if args.epoch else datetime.now(timezone.utc).replace(microsecond=0)
    deps = GateDeps(_pipeline_recognizer(model, cfg), Tariff.from_config(cfg.tariff), Journal(args.journal),
                    ReceiptPrinter(args.first_serial))
    if args.pipe:
        gate = Gate(deps, cfg.gate)
        deps.clock = tick_clock(gate, epoch)
        source = open(args.script, encoding="utf-8") if args.script else sys.stdin
        with source:
            _serve_lines(gate, source, lambda s: (out.write(s), out.flush()), time.monotonic())
        for d in deps.diagnostics:
            print(d, file=sys.stderr)
        return OK

    host, _, port = args.listen.rpartition(":")

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            gate = Gate(deps, cfg.gate)
            deps.clock = lambda: datetime.now(timezone.utc)
            lines = (raw.decode("ascii", "replace") for raw in self.rfile)
            _serve_lines(gate, lines, lambda s: (self.wfile.write(s.encode("ascii", "replace")),
                                                 self.wfile.flush()), time.monotonic())

    with socketserver.TCPServer((host or "127.0.0.1", int(port)), Handler) as server:
        print(f"listening on {server.server_address[0]}:{server.server_address[1]}", file=sys.stderr)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return OK


def cmd_report(args, cfg: Config, out: TextIO) -> int:
    try:
        start, end = parse_time(args.from_), parse_time(args.to)
    except ValueError as exc:
        raise UsageError(f"{exc}; expected YYYY-MM-DDTHH:MM:SSZ") from None
    try:
        records = Journal(args.journal).read_all()
    except JournalCorrupt as exc:
        print(f"ERR {args.journal}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    try:
        summary = report(records, start, end)
    except InvalidRange as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        json.dump(summary.to_dict(), out, indent=2, sort_keys=True)
        out.write("\n")
    else:
        print(summary.table(), file=out)
    return OK


def cmd_replay(args, cfg: Config, out: TextIO) -> int:
    """Run a gate scenario with the pipeline recognizer and print the transcript."""
    model = _load_model_or_exit(args.model)
    deps = GateDeps(_pipeline_recognizer(model, cfg), Tariff.from_config(cfg.tariff),
                    Journal(args.journal) if args.journal else None, ReceiptPrinter(args.first_serial))
    try:
        with open(args.script, encoding="utf-8") as fh:
            transcript = run_script(fh, deps, cfg.gate, parse_time(args.epoch))
    except (OSError, ValueError) as exc:  # ScriptError and bad --epoch are ValueErrors
        raise UsageError(str(exc)) from None
    out.write(format_transcript(transcript))
    return OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="parkplate", description="License plate recognition and parking gate toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="INI configuration file")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="render synthetic scenes and a truth manifest")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--out", required=True)
    g.add_argument("--width", type=int, default=640)
    g.add_argument("--height", type=int, default=480)
    g.add_argument("--plates", type=int, default=1)
    g.add_argument("--max-tilt", type=float, default=0.0, help="tilt drawn from [-D, D] degrees")
    g.add_argument("--tilt", type=float, default=None, help="fixed tilt in degrees")
    g.add_argument("--scale-min", type=float, default=1.0)
    g.add_argument("--scale-max", type=float, default=1.0)
    g.add_argument("--type", choices=[t.value for t in PlateType])
    g.add_argument("--palette", default="literal", choices=["literal", "standard-hue"])
    g.add_argument("--speckle", type=float, default=0.0)
    g.set_defaults(func=cmd_gen)

    gg = sub.add_parser("gen-glyphs", help="render a jittered glyph corpus")
    gg.add_argument("--seed", type=int, default=0)
    gg.add_argument("--per-class", type=int, default=50)
    gg.add_argument("--out", required=True)
    gg.set_defaults(func=cmd_gen_glyphs)

    t = sub.add_parser("train", help="split a glyph corpus, train, evaluate and save a model")
    t.add_argument("corpus")
    t.add_argument("--out", required=True, help="model file to write")
    t.add_argument("--ratio", type=_ratio, default=0.7)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--k", type=int, default=None)
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("recognize", help="read plates in image files")
    r.add_argument("images", nargs="+")
    r.add_argument("--model", required=True)
    r.add_argument("--json", action="store_true")
    r.set_defaults(func=cmd_recognize)

    e = sub.add_parser("eval", help="score a scene directory against its truth manifest")
    e.add_argument("scenes")
    e.add_argument("--model", required=True)
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("serve", help="run the gate protocol on stdio or TCP")
    s.add_argument("--model", required=True)
    s.add_argument("--journal", required=True)
    mode = s.add_mutually_exclusive_group(required=True)
    mode.add_argument("--pipe", action="store_true", help="read protocol lines from stdin")
    mode.add_argument("--listen", metavar="HOST:PORT")
    s.add_argument("--script", help="with --pipe, read lines from this file instead of stdin")
    s.add_argument("--epoch", help="timestamp of tick 0 in --pipe mode (YYYY-MM-DDTHH:MM:SSZ)")
    s.add_argument("--first-serial", type=int, default=1)
    s.set_defaults(func=cmd_serve)

    rp = sub.add_parser("replay", help="run a gate scenario script and print the outbound transcript")
    rp.add_argument("script")
    rp.add_argument("--model", required=True)
    rp.add_argument("--journal")
    rp.add_argument("--epoch", default="2026-01-01T00:00:00Z")
    rp.add_argument("--first-serial", type=int, default=1)
    rp.set_defaults(func=cmd_replay)

    rep = sub.add_parser("report", help="summarize journal records in [from, to)")
    rep.add_argument("--journal", required=True)
    rep.add_argument("--from", dest="from_", required=True)
    rep.add_argument("--to", required=True)
    rep.add_argument("--json", action="store_true")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg, out)
    except (UsageError, ConfigError) as exc:
        print(f"parkplate {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
